#pragma once

#include <string>
#include <vector>

#include "autodiff.hpp"
#include "conllu.hpp"
#include "encoder.hpp"

namespace morpho {

// ---------------------------------------------------------------- decoding

// Scores are (n+1) x n: row h is the candidate head (0 = ROOT), column d is
// dependent d+1. Decoders return heads[d] for d = 0..n-1 (values 0..n).

// Per-dependent argmax over heads other than the token itself; ties go to
// the lowest head index. May produce cycles or several roots.
std::vector<int> decode_greedy(const ad::Matrix& scores);

// Maximum spanning arborescence with exactly one child of ROOT
// (Chu-Liu-Edmonds, repeated per root candidate when needed).
std::vector<int> decode_mst(const ad::Matrix& scores);

// Sum of the selected arc scores.
double tree_score(const ad::Matrix& scores, const std::vector<int>& heads);

// ---------------------------------------------------------------- evaluation

struct AttachmentReport {
  std::size_t tokens = 0;
  std::size_t head_correct = 0;
  std::size_t both_correct = 0;

  double uas() const { return tokens ? double(head_correct) / double(tokens) : 0.0; }
  double las() const { return tokens ? double(both_correct) / double(tokens) : 0.0; }
  AttachmentReport& operator+=(const AttachmentReport& o);
};

// Token-weighted over the corpus. With exclude_punct, tokens whose gold UPOS
// is PUNCT are not counted.
AttachmentReport attachment_scores(const Sentence& gold, const Sentence& pred, bool exclude_punct = false);
AttachmentReport attachment_scores(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred,
                                   bool exclude_punct = false);

// ---------------------------------------------------------------- biaffine head

struct BiaffineSpec {
  int input_dim = 0;
  int arc_dim = 128;
  int label_dim = 64;
  int labels = 1;
};

// Parameters under "parser.*": root (input x 1), four tanh MLPs
// (arc_dep, arc_head, lab_dep, lab_head), U_arc, b_arc, U_lab (stacked
// per label), W_lab, b_lab.
void create_biaffine(ad::ParameterStore& store, const BiaffineSpec& spec, std::uint64_t seed);

struct BiaffineScores {
  ad::Var arcs;        // (n+1) x n
  ad::Var label_dep;   // d_lab x n
  ad::Var label_head;  // d_lab x (n+1)
};

// `hidden` is input x n; the learned ROOT column is prepended internally.
BiaffineScores score_arcs(ad::Graph& g, ad::ParameterStore& store, ad::Var hidden, Real dropout = 0);

// L x n label scores for the given head of each dependent.
ad::Var score_labels(ad::Graph& g, ad::ParameterStore& store, const BiaffineScores& s,
                     const std::vector<int>& heads);

// Mean arc cross-entropy plus mean label cross-entropy at the gold heads.
ad::Var parse_loss(ad::Var arcs, ad::Var labels, const std::vector<int>& gold_heads,
                   const std::vector<int>& gold_labels);

// ---------------------------------------------------------------- model

struct ParserSpec {
  LstmSpec lstm;  // input_dim filled from the input encoder
  int arc_dim = 128;
  int label_dim = 64;
  Real dropout = 0.33f;
  bool mst = true;
};

class ParserModel {
 public:
  ParserModel(InputEncoder input, ParserSpec spec, std::vector<std::string> labels);

  void create_parameters(std::uint64_t seed, const WordVectors* vectors = nullptr);
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  ad::Var loss(ad::Graph& g, const Sentence& s, const ContextDump* ctx = nullptr, std::size_t ctx_index = 0);
  // Heads and labels filled in; everything else copied from `s`.
  Sentence predict(const Sentence& s, const ContextDump* ctx = nullptr, std::size_t ctx_index = 0);

  const InputEncoder& input() const { return input_; }
  const ParserSpec& spec() const { return spec_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int label_id(const std::string& deprel) const;

 private:
  ad::Var encode(ad::Graph& g, const Sentence& s, const ContextDump* ctx, std::size_t ctx_index);

  InputEncoder input_;
  ParserSpec spec_;
  std::vector<std::string> labels_;
  ad::ParameterStore params_;
};

std::vector<std::string> collect_deprels(const std::vector<Sentence>& train);

}  // namespace morpho
