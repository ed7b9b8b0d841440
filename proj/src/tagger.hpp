#pragma once

#include <array>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "encoder.hpp"
#include "nerdata.hpp"

namespace morpho {

struct Span {
  std::string cls;
  int start = 0;
  int end = 0;  // inclusive
  auto operator<=>(const Span&) const = default;
};

// IOB2 spans. An I- tag that does not continue a span of its own class
// opens a new one; anything outside the tagset counts as OTHR.
std::vector<Span> extract_spans(const std::vector<std::string>& labels);

inline constexpr std::array<std::string_view, 3> kEntityClasses = {"PER", "ORG", "LOC"};

struct ClassScore {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  double precision() const { return predicted ? double(correct) / double(predicted) : 0.0; }
  double recall() const { return gold ? double(correct) / double(gold) : 0.0; }
  double f1() const;
};

enum class F1Mode { Span, Token };

struct F1Report {
  std::array<ClassScore, 3> classes;  // kEntityClasses order
  double weighted_f1 = 0.0;           // weights: gold counts over the three classes
  std::size_t support() const;
};

using LabelSequences = std::vector<std::vector<std::string>>;

F1Report weighted_f1(const LabelSequences& gold, const LabelSequences& pred, F1Mode mode = F1Mode::Span);
LabelSequences ner_labels(const std::vector<Sentence>& corpus);

// Optional tanh interaction layer (D x D) followed by the output layer
// (|tagset| x D), as parameters "tagger.inter.*" and "tagger.out.*".
void create_tag_head(ad::ParameterStore& store, int input_dim, bool interaction, std::uint64_t seed);
// Logits, |tagset| x n.
ad::Var tag_scores(ad::Graph& g, ad::ParameterStore& store, ad::Var hidden, bool interaction);

struct TaggerSpec {
  LstmSpec lstm;  // over word (and ctx); input_dim filled in
  bool interaction = false;
  Real dropout = 0.33f;
};

// Word (⊙ ctx) -> LSTM -> ⊙ upos ⊙ feats -> [interaction] -> output.
class TaggerModel {
 public:
  TaggerModel(Embedder embedder, TaggerSpec spec);

  void create_parameters(std::uint64_t seed, const WordVectors* vectors = nullptr);
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  ad::Var logits(ad::Graph& g, const Sentence& s, const ContextDump* ctx = nullptr, std::size_t ctx_index = 0);
  ad::Var loss(ad::Graph& g, const Sentence& s, const ContextDump* ctx = nullptr, std::size_t ctx_index = 0);
  std::vector<std::string> predict(const Sentence& s, const ContextDump* ctx = nullptr,
                                   std::size_t ctx_index = 0);

  const Embedder& embedder() const { return embedder_; }
  const TaggerSpec& spec() const { return spec_; }
  int head_input_dim() const;

 private:
  Embedder embedder_;
  TaggerSpec spec_;
  ad::ParameterStore params_;
};

}  // namespace morpho
