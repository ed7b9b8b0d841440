#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "autodiff.hpp"
#include "conllu.hpp"

namespace morpho {

// Pretrained vectors in the word2vec/fastText text format: a "count dim"
// header, then one "token v1 ... vdim" line per row.
struct WordVectors {
  int dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  ad::Matrix matrix;  // dim x words.size(), one column per word

  int find(const std::string& word) const;
  std::size_t size() const { return words.size(); }
};

WordVectors parse_vectors(std::string_view text, std::vector<std::string>* warnings = nullptr);
WordVectors load_vectors(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::string serialize_vectors(const WordVectors& v);

// Word vocabulary of a model. Id 0 is the learned UNK entry.
struct WordVocab {
  std::vector<std::string> words;  // words[0] == "<unk>"
  std::unordered_map<std::string, int> ids;

  int id(const std::string& form) const;
  std::size_t size() const { return words.size(); }
  static WordVocab build(const std::vector<Sentence>& train, int min_count, const WordVectors* vectors);
  static WordVocab from_list(std::vector<std::string> words);
};

// Feature-value vocabularies from the training split. Value id 0 is the
// NONE row (feature absent or value unseen in training).
struct MorphVocab {
  std::array<std::vector<std::string>, kFeatureCount> values;

  int value_id(std::size_t feature, const std::string& value) const;
  static MorphVocab build(const std::vector<Sentence>& train);
};

// Precomputed per-layer contextual vectors aligned with a corpus.
struct ContextDump {
  std::uint32_t layers = 0;
  std::uint32_t dim = 0;
  // Per sentence: token-major, then layer-major, `dim` floats each.
  std::vector<std::vector<float>> sentences;

  std::size_t tokens(std::size_t sentence) const {
    return sentences[sentence].size() / (std::size_t(layers) * dim);
  }
  // d x n matrix of one layer for one sentence.
  ad::Matrix layer(std::size_t sentence, std::uint32_t l) const;
};

inline constexpr std::uint32_t kContextDumpVersion = 1;

ContextDump parse_context_dump(std::string_view bytes);
ContextDump load_context_dump(const std::string& path);
std::string serialize_context_dump(const ContextDump& dump);
// Throws naming the first sentence whose token count differs.
void check_context_alignment(const ContextDump& dump, const std::vector<Sentence>& corpus);

// gamma * sum_l softmax(logits)_l * layers[l].
ad::Var scalar_mix(std::span<const ad::Var> layers, ad::Var logits, ad::Var gamma);

struct Parts {
  bool word = true;
  bool ctx = false;
  bool upos = false;
  bool feats = false;
};

struct EmbedSpec {
  Parts parts;
  int word_dim = 100;
  int upos_dim = 15;
  int feat_dim = 15;
  int ctx_layers = 0;
  int ctx_dim = 0;
};

// Builds the per-token input vectors word ⊙ ctx ⊙ upos ⊙ feats for a
// sentence. Owns no parameters; they live in the model's store under
// "embed.*".
class Embedder {
 public:
  Embedder(EmbedSpec spec, WordVocab words, MorphVocab morph);

  // Creates the embedding parameters in `store`. Word vectors, if given,
  // initialise the rows of words they contain.
  void create_parameters(ad::ParameterStore& store, std::uint64_t seed,
                         const WordVectors* vectors = nullptr) const;

  int output_dim() const;
  // Columns are tokens. `ctx` must be given iff the ctx part is enabled.
  ad::Var embed(ad::Graph& g, ad::ParameterStore& store, const Sentence& s,
                const ContextDump* ctx = nullptr, std::size_t ctx_index = 0) const;
  // Same for a subset of the enabled parts.
  ad::Var embed_parts(ad::Graph& g, ad::ParameterStore& store, const Sentence& s, Parts parts,
                      const ContextDump* ctx = nullptr, std::size_t ctx_index = 0) const;
  // Word part only.
  ad::Var embed_words(ad::Graph& g, ad::ParameterStore& store, const Sentence& s) const;
  ad::Var embed_upos(ad::Graph& g, ad::ParameterStore& store, const Sentence& s) const;
  ad::Var embed_feats(ad::Graph& g, ad::ParameterStore& store, const Sentence& s) const;

  const EmbedSpec& spec() const { return spec_; }
  const WordVocab& words() const { return words_; }
  const MorphVocab& morph() const { return morph_; }

 private:
  EmbedSpec spec_;
  WordVocab words_;
  MorphVocab morph_;
};

}  // namespace morpho
