#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common.hpp"

namespace morpho {

// The 17 UD part-of-speech categories plus UNK. The numeric values index the
// UPOS embedding table.
enum class Upos : std::uint8_t {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT,
  SCONJ, SYM, VERB, X, UNK
};
inline constexpr std::size_t kUposCount = 18;

std::string_view upos_name(Upos tag);
std::optional<Upos> upos_from_name(std::string_view name);

// Universal feature inventory (Typo excluded), in canonical order.
inline constexpr std::size_t kFeatureCount = 23;
const std::array<std::string_view, kFeatureCount>& feature_inventory();
// Position of a feature name in the inventory, if present.
std::optional<std::size_t> feature_index(std::string_view name);

// UD sorts feature names case-insensitively.
struct FeatureNameLess {
  bool operator()(const std::string& a, const std::string& b) const;
};
using FeatureMap = std::map<std::string, std::string, FeatureNameLess>;

enum class ParseMode { Strict, Lenient };

struct ParseOptions {
  ParseMode mode = ParseMode::Strict;
  // Non-fatal findings (dropped features, repaired trees) are appended here.
  std::vector<std::string>* warnings = nullptr;
};

FeatureMap parse_feats(std::string_view text, const ParseOptions& opts = {});
std::string serialize_feats(const FeatureMap& feats);

struct Token {
  int index = 1;
  std::string form;
  std::string lemma = "_";
  Upos upos = Upos::UNK;
  std::string xpos = "_";
  FeatureMap feats;
  int head = 0;
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";
  std::string ner;  // empty when the corpus carries no entity labels
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<std::string> comments;
  // Multiword-token ranges and empty nodes are not part of the syntactic
  // word sequence; they are carried verbatim, keyed by the number of tokens
  // preceding them, so that writing reproduces the input.
  std::vector<std::pair<std::size_t, std::string>> passthrough;

  std::size_t size() const { return tokens.size(); }
};

struct Treebank {
  std::string language;
  std::vector<Sentence> train, dev, test;
};

std::vector<Sentence> parse_treebank(std::string_view text, const ParseOptions& opts = {});
std::vector<Sentence> read_treebank(const std::string& path, const ParseOptions& opts = {});
std::string serialize_treebank(const std::vector<Sentence>& sentences);
void write_treebank(const std::string& path, const std::vector<Sentence>& sentences);

// Checks the single-root/acyclic invariant; returns a description of the
// first violation or an empty string.
std::string tree_violation(const std::vector<int>& heads);
std::vector<int> heads_of(const Sentence& s);

struct AnnotationAgreement {
  std::size_t tokens = 0;
  std::size_t upos_equal = 0;
  std::size_t feats_equal = 0;
  double upos_accuracy() const { return tokens ? double(upos_equal) / double(tokens) : 1.0; }
  double feats_accuracy() const { return tokens ? double(feats_equal) / double(tokens) : 1.0; }
};

struct AttachedAnnotations {
  std::vector<Sentence> sentences;  // gold syntax with predicted upos/feats
  std::vector<std::vector<bool>> upos_agrees;
  std::vector<std::vector<bool>> feats_agree;
  AnnotationAgreement agreement;
};

AttachedAnnotations attach_predicted_annotations(const std::vector<Sentence>& gold,
                                                 const std::vector<Sentence>& predicted);

// Fraction of tokens with equal UPOS and with an identical feature map.
AnnotationAgreement feats_quality(const std::vector<Sentence>& gold,
                                  const std::vector<Sentence>& predicted);
std::string format_feats_quality(const AnnotationAgreement& q);

// Replaces the UPOS and feature map of a `rate` fraction of tokens with those
// of a randomly drawn different token of the same corpus. Simulates a tagger
// of known accuracy.
std::vector<Sentence> corrupt_annotations(const std::vector<Sentence>& sentences,
                                          double rate, std::uint64_t seed);

}  // namespace morpho
