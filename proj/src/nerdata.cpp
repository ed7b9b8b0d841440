#include "nerdata.hpp"

#include <numeric>

namespace morpho {
namespace {

constexpr std::array<std::string_view, kNerTagCount> kTags = {
    "OTHR", "B-PER", "I-PER", "B-ORG", "I-ORG", "B-LOC", "I-LOC"};

std::string_view entity_class(std::string_view tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I' || tag[0] == 'E' || tag[0] == 'S' ||
                         tag[0] == 'L' || tag[0] == 'U') &&
      (tag[1] == '-' || tag[1] == '_'))
    tag.remove_prefix(2);
  // Subtype suffixes such as PER-deriv or LOC.city.
  std::size_t cut = tag.find_first_of("-_.:");
  if (cut != std::string_view::npos) tag = tag.substr(0, cut);
  return tag;
}

}  // namespace

const std::array<std::string_view, kNerTagCount>& ner_tagset() { return kTags; }

int ner_tag_id(std::string_view tag) {
  for (std::size_t i = 0; i < kTags.size(); ++i)
    if (kTags[i] == tag) return static_cast<int>(i);
  return -1;
}

std::string trim_label(std::string_view raw) {
  raw = trim(raw);
  std::string_view cls = entity_class(raw);
  std::string canonical;
  if (cls == "PER" || cls == "PERSON") canonical = "PER";
  else if (cls == "ORG" || cls == "ORGANIZATION") canonical = "ORG";
  else if (cls == "LOC" || cls == "LOCATION") canonical = "LOC";
  else return "OTHR";
  // Inside-type prefixes keep I-, everything that opens a span becomes B-.
  bool inside = raw.size() > 2 && (raw[0] == 'I' || raw[0] == 'E' || raw[0] == 'L') &&
                (raw[1] == '-' || raw[1] == '_');
  if (raw == cls) inside = true;  // bare class name continues like IOB1 "I"
  return (inside ? "I-" : "B-") + canonical;
}

std::vector<Sentence> read_ner_corpus(std::string_view text, NerFormat format) {
  std::vector<Sentence> out;
  Sentence cur;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    // IOB1 -> IOB2: an I- that does not continue a same-class span opens one.
    for (std::size_t i = 0; i < cur.tokens.size(); ++i) {
      std::string& tag = cur.tokens[i].ner;
      if (tag.size() > 2 && tag[0] == 'I') {
        const std::string prev = i ? cur.tokens[i - 1].ner : "OTHR";
        if (prev.size() <= 2 || prev.substr(2) != tag.substr(2)) tag[0] = 'B';
      }
    }
    out.push_back(std::move(cur));
    cur = Sentence{};
  };
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (format == NerFormat::Conll2003 && starts_with(line, "-DOCSTART-")) continue;
    std::vector<std::string_view> cols;
    if (format == NerFormat::TwoColumn) {
      cols = split(line, '\t');
      if (cols.size() != 2)
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 'token<TAB>tag'");
    } else {
      for (auto c : split(line, ' '))
        if (!c.empty()) cols.push_back(c);
      if (cols.size() < 2)
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected at least two columns");
    }
    Token t;
    t.index = static_cast<int>(cur.tokens.size()) + 1;
    t.form = std::string(cols.front());
    t.ner = trim_label(cols.back());
    cur.tokens.push_back(std::move(t));
  }
  flush();
  // Syntactic fields are unknown; a flat chain keeps the tree invariant.
  for (auto& s : out)
    for (std::size_t i = 0; i < s.tokens.size(); ++i) s.tokens[i].head = static_cast<int>(i);
  return out;
}

std::vector<Sentence> load_ner_corpus(const std::string& path, NerFormat format) {
  try {
    return read_ner_corpus(read_file(path), format);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string serialize_ner(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) out += t.form + '\t' + (t.ner.empty() ? "OTHR" : t.ner) + '\n';
    out += '\n';
  }
  return out;
}

void attach_morphology(std::vector<Sentence>& corpus, const std::vector<Sentence>& annotation) {
  if (corpus.size() != annotation.size())
    fail(ErrorCode::InvalidArgument, "annotation has " + std::to_string(annotation.size()) +
                                         " sentences, corpus has " + std::to_string(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].size() != annotation[i].size())
      fail(ErrorCode::InvalidArgument, "token count mismatch at sentence " + std::to_string(i));
    for (std::size_t j = 0; j < corpus[i].size(); ++j) {
      corpus[i].tokens[j].upos = annotation[i].tokens[j].upos;
      corpus[i].tokens[j].feats = annotation[i].tokens[j].feats;
    }
  }
}

FoldPlan make_folds(std::size_t sentence_count, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "fold count must be at least 2");
  if (sentence_count == 0) fail(ErrorCode::InvalidArgument, "cannot fold an empty corpus");
  if (k > sentence_count)
    fail(ErrorCode::InvalidArgument, "fold count " + std::to_string(k) + " exceeds sentence count " +
                                         std::to_string(sentence_count));
  std::vector<std::size_t> order(sentence_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(sentence_count, 0);
  for (std::size_t pos = 0; pos < sentence_count; ++pos) plan.assignment[order[pos]] = pos % k;
  return plan;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

std::size_t FoldPlan::fold_size(std::size_t fold) const { return test_indices(fold).size(); }

}  // namespace morpho
