#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "conllu.hpp"

namespace morpho {

// Canonical IOB2 tag set after trimming: B-/I- over PER, ORG, LOC plus OTHR.
inline constexpr std::size_t kNerTagCount = 7;
const std::array<std::string_view, kNerTagCount>& ner_tagset();
int ner_tag_id(std::string_view tag);  // -1 when not canonical

std::string trim_label(std::string_view raw);

enum class NerFormat { TwoColumn, Conll2003 };

// Reads token/tag columns (blank-line separated sentences). Tags are trimmed
// to the canonical set; plain IOB1 input is converted to IOB2 on load.
std::vector<Sentence> read_ner_corpus(std::string_view text, NerFormat format = NerFormat::TwoColumn);
std::vector<Sentence> load_ner_corpus(const std::string& path, NerFormat format = NerFormat::TwoColumn);
std::string serialize_ner(const std::vector<Sentence>& sentences);

// Copies UPOS/feats from an aligned CoNLL-U annotation of the same tokens.
void attach_morphology(std::vector<Sentence>& corpus, const std::vector<Sentence>& annotation);

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // sentence index -> fold id

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::size_t fold_size(std::size_t fold) const;
};

FoldPlan make_folds(std::size_t sentence_count, std::size_t k, std::uint64_t seed);

}  // namespace morpho
