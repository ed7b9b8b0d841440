#pragma once

#include <array>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "encoder.hpp"

namespace morpho {

enum class Pooling { Mean, Weighted, Lstm };
const char* pooling_name(Pooling p);
Pooling pooling_from_name(std::string_view name);

struct PoolingSpec {
  Pooling kind = Pooling::Mean;
  int lstm_hidden = 15;  // pooling-LSTM size
};

// Parameters for pooling `dim`-sized vectors under `prefix`: "<prefix>.a"
// for weighted pooling, an LSTM "<prefix>.lstm" for LSTM pooling.
void create_pooling(ad::ParameterStore& store, const std::string& prefix, int dim, const PoolingSpec& spec,
                    std::uint64_t seed);
int pooled_dim(int dim, const PoolingSpec& spec);
// Columns of `vectors` are sequence positions; returns a column vector.
ad::Var pool(ad::Graph& g, ad::ParameterStore& store, const std::string& prefix, ad::Var vectors,
             const PoolingSpec& spec);
// Softmax weights of weighted pooling (n x 1).
ad::Var pooling_weights(ad::Graph& g, ad::ParameterStore& store, const std::string& prefix, ad::Var vectors);

struct LabeledSentence {
  Sentence sentence;
  int label = 0;  // 0 or 1
};

// Lines "label<TAB>space-separated tokens".
std::vector<LabeledSentence> read_labeled_corpus(std::string_view text);
std::vector<LabeledSentence> load_labeled_corpus(const std::string& path);
// UPOS/feats from a CoNLL-U file of the same tokens, sentence by sentence.
void attach_companion(std::vector<LabeledSentence>& corpus, const std::vector<Sentence>& companion);

struct ClassifierSpec {
  LstmSpec lstm;  // sequence LSTM over word (and ctx); input_dim filled in
  PoolingSpec pooling;
  Real dropout = 0.33f;
};

// Last LSTM state ⊙ pooled UPOS ⊙ pooled feats -> linear -> 2 classes.
class ClassifierModel {
 public:
  ClassifierModel(Embedder embedder, ClassifierSpec spec);

  void create_parameters(std::uint64_t seed, const WordVectors* vectors = nullptr);
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  ad::Var logits(ad::Graph& g, const Sentence& s, const ContextDump* ctx = nullptr, std::size_t ctx_index = 0);
  ad::Var loss(ad::Graph& g, const LabeledSentence& ex, const ContextDump* ctx = nullptr,
               std::size_t ctx_index = 0);
  std::array<double, 2> distribution(const Sentence& s, const ContextDump* ctx = nullptr,
                                     std::size_t ctx_index = 0);
  int classify(const Sentence& s, const ContextDump* ctx = nullptr, std::size_t ctx_index = 0);

  const Embedder& embedder() const { return embedder_; }
  const ClassifierSpec& spec() const { return spec_; }
  int feature_dim() const;

 private:
  bool has_sequence() const;

  Embedder embedder_;
  ClassifierSpec spec_;
  ad::ParameterStore params_;
};

double accuracy(const std::vector<int>& gold, const std::vector<int>& pred);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);

struct SplitIndices {
  std::vector<std::size_t> train, dev, test;
};
// Seeded shuffle, then the first 60% / next 20% / rest.
SplitIndices split_60_20_20(std::size_t count, std::uint64_t seed);

}  // namespace morpho
