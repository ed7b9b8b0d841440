#include "conllu.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace morpho {
namespace {

constexpr std::array<std::string_view, kUposCount> kUposNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X", "UNK"};

constexpr std::array<std::string_view, kFeatureCount> kFeatures = {
    "Abbr",     "Animacy", "Aspect",  "Case",     "Clusivity", "Definite",
    "Degree",   "Evident", "Foreign", "Gender",   "Mood",      "NounClass",
    "Number",   "NumType", "Person",  "Polarity", "Polite",    "Poss",
    "PronType", "Reflex",  "Tense",   "VerbForm", "Voice"};

void warn(const ParseOptions& opts, std::string msg) {
  if (opts.warnings) opts.warnings->push_back(std::move(msg));
}

int to_int(std::string_view s, const std::string& where) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorCode::Parse, where + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::string field(std::string_view s) { return s.empty() ? "_" : std::string(s); }

// Repairs a head vector in place so that it forms a single-rooted tree.
// Returns descriptions of the repairs performed.
std::vector<std::string> repair_tree(std::vector<int>& heads) {
  std::vector<std::string> notes;
  const int n = static_cast<int>(heads.size());
  int root = -1;
  for (int i = 0; i < n; ++i) {
    if (heads[i] != 0) continue;
    if (root < 0) {
      root = i + 1;
    } else {
      notes.push_back("token " + std::to_string(i + 1) + " re-attached to first root " +
                      std::to_string(root));
      heads[i] = root;
    }
  }
  // Walk each token towards the root; a revisit means a cycle, which is cut
  // by attaching its smallest member to the root (or making it the root).
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    std::set<int> on_path;
    int cur = start;
    while (cur != 0 && !on_path.count(cur)) {
      on_path.insert(cur);
      path.push_back(cur);
      cur = heads[cur - 1];
    }
    if (cur == 0) continue;
    auto it = std::find(path.begin(), path.end(), cur);
    int smallest = *std::min_element(it, path.end());
    if (root < 0) {
      root = smallest;
      heads[smallest - 1] = 0;
      notes.push_back("cycle broken by making token " + std::to_string(smallest) + " the root");
    } else {
      heads[smallest - 1] = root;
      notes.push_back("cycle broken by attaching token " + std::to_string(smallest) +
                      " to root " + std::to_string(root));
    }
  }
  return notes;
}

void finish_sentence(Sentence& s, std::size_t ordinal, const ParseOptions& opts,
                     std::vector<Sentence>& out) {
  if (s.tokens.empty()) {
    if (!s.comments.empty() || !s.passthrough.empty())
      fail(ErrorCode::Parse, "sentence " + std::to_string(ordinal) + " has no syntactic words");
    return;
  }
  const int n = static_cast<int>(s.tokens.size());
  for (const Token& t : s.tokens) {
    if (t.head < 0 || t.head > n)
      fail(ErrorCode::Parse, "sentence " + std::to_string(ordinal) + ": token " +
                                 std::to_string(t.index) + " has head " + std::to_string(t.head) +
                                 " outside 0.." + std::to_string(n));
  }
  std::vector<int> heads = heads_of(s);
  std::string violation = tree_violation(heads);
  if (!violation.empty()) {
    if (opts.mode == ParseMode::Strict)
      fail(ErrorCode::Parse, "sentence " + std::to_string(ordinal) + ": " + violation);
    for (auto& note : repair_tree(heads))
      warn(opts, "sentence " + std::to_string(ordinal) + ": " + note);
    for (int i = 0; i < n; ++i) s.tokens[i].head = heads[i];
  }
  out.push_back(std::move(s));
}

}  // namespace

std::string_view upos_name(Upos tag) { return kUposNames[static_cast<std::size_t>(tag)]; }

std::optional<Upos> upos_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kUposCount; ++i)
    if (kUposNames[i] == name) return static_cast<Upos>(i);
  return std::nullopt;
}

const std::array<std::string_view, kFeatureCount>& feature_inventory() { return kFeatures; }

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kFeatures[i] == name) return i;
  return std::nullopt;
}

bool FeatureNameLess::operator()(const std::string& a, const std::string& b) const {
  auto lower = [](unsigned char c) { return std::tolower(c); };
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int ca = lower(static_cast<unsigned char>(a[i]));
    int cb = lower(static_cast<unsigned char>(b[i]));
    if (ca != cb) return ca < cb;
  }
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

FeatureMap parse_feats(std::string_view text, const ParseOptions& opts) {
  FeatureMap out;
  if (text == "_" || text.empty()) return out;
  std::set<std::string_view> seen;
  for (std::string_view pair : split(text, '|')) {
    std::size_t eq = pair.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == pair.size())
      fail(ErrorCode::Parse, "feature '" + std::string(pair) + "' is not a Name=Value pair");
    std::string_view name = pair.substr(0, eq);
    if (!seen.insert(name).second)
      fail(ErrorCode::Parse, "duplicate feature name '" + std::string(name) + "'");
    if (!feature_index(name)) {
      if (opts.mode == ParseMode::Strict)
        fail(ErrorCode::Parse, "feature '" + std::string(name) + "' is not in the inventory");
      warn(opts, "dropped feature '" + std::string(name) + "' outside the inventory");
      continue;
    }
    out.emplace(std::string(name), std::string(pair.substr(eq + 1)));
  }
  return out;
}

std::string serialize_feats(const FeatureMap& feats) {
  if (feats.empty()) return "_";
  std::string out;
  for (const auto& [name, value] : feats) {
    if (!out.empty()) out += '|';
    out += name;
    out += '=';
    out += value;
  }
  return out;
}

std::vector<int> heads_of(const Sentence& s) {
  std::vector<int> heads;
  heads.reserve(s.tokens.size());
  for (const Token& t : s.tokens) heads.push_back(t.head);
  return heads;
}

std::string tree_violation(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (heads[i] < 0 || heads[i] > n) return "head of token " + std::to_string(i + 1) + " out of range";
    if (heads[i] == i + 1) return "token " + std::to_string(i + 1) + " is its own head";
    if (heads[i] == 0) ++roots;
  }
  if (roots != 1) return std::to_string(roots) + " root tokens (expected exactly 1)";
  for (int start = 1; start <= n; ++start) {
    int cur = start;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) return "cycle through token " + std::to_string(start);
      cur = heads[cur - 1];
    }
  }
  return {};
}

std::vector<Sentence> parse_treebank(std::string_view text, const ParseOptions& opts) {
  std::vector<Sentence> out;
  Sentence cur;
  std::size_t ordinal = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  if (starts_with(text, "\xEF\xBB\xBF")) start = 3;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (trim(line).empty()) {
      if (!cur.tokens.empty() || !cur.comments.empty()) {
        finish_sentence(cur, ++ordinal, opts, out);
        cur = Sentence{};
      }
    } else if (line.front() == '#') {
      cur.comments.emplace_back(line);
      std::string_view body = trim(line.substr(1));
      if (starts_with(body, "sent_id")) {
        std::size_t eq = body.find('=');
        if (eq != std::string_view::npos) cur.id = std::string(trim(body.substr(eq + 1)));
      }
    } else {
      auto cols = split(line, '\t');
      if (cols.size() != 10)
        fail(ErrorCode::Parse, where + ": expected 10 tab-separated columns, found " +
                                   std::to_string(cols.size()));
      if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) {
        cur.passthrough.emplace_back(cur.tokens.size(), std::string(line));
      } else {
        Token t;
        t.index = to_int(cols[0], where);
        if (t.index != static_cast<int>(cur.tokens.size()) + 1)
          fail(ErrorCode::Parse, where + ": token index " + std::to_string(t.index) +
                                     " is not contiguous (expected " +
                                     std::to_string(cur.tokens.size() + 1) + ")");
        t.form = std::string(cols[1]);
        t.lemma = field(cols[2]);
        if (auto tag = upos_from_name(cols[3])) {
          t.upos = *tag;
        } else {
          if (cols[3] != "_") warn(opts, where + ": unknown UPOS '" + std::string(cols[3]) + "' mapped to UNK");
          t.upos = Upos::UNK;
        }
        t.xpos = field(cols[4]);
        try {
          t.feats = parse_feats(cols[5], opts);
        } catch (const Error& e) {
          fail(e.code(), where + ": " + e.what());
        }
        if (cols[6] == "_") {
          if (opts.mode == ParseMode::Strict) fail(ErrorCode::Parse, where + ": missing head");
          warn(opts, where + ": missing head treated as root");
          t.head = 0;
        } else {
          t.head = to_int(cols[6], where);
        }
        t.deprel = field(cols[7]);
        t.deps = field(cols[8]);
        t.misc = field(cols[9]);
        cur.tokens.push_back(std::move(t));
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!cur.tokens.empty() || !cur.comments.empty()) finish_sentence(cur, ++ordinal, opts, out);
  return out;
}

std::vector<Sentence> read_treebank(const std::string& path, const ParseOptions& opts) {
  std::string text = read_file(path);
  try {
    return parse_treebank(text, opts);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string serialize_treebank(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const Sentence& s : sentences) {
    for (const auto& c : s.comments) {
      out += c;
      out += '\n';
    }
    std::size_t pass = 0;
    for (std::size_t i = 0; i <= s.tokens.size(); ++i) {
      while (pass < s.passthrough.size() && s.passthrough[pass].first == i) {
        out += s.passthrough[pass++].second;
        out += '\n';
      }
      if (i == s.tokens.size()) break;
      const Token& t = s.tokens[i];
      std::string upos = t.upos == Upos::UNK ? "_" : std::string(upos_name(t.upos));
      out += std::to_string(t.index) + '\t' + t.form + '\t' + t.lemma + '\t' + upos + '\t' +
             t.xpos + '\t' + serialize_feats(t.feats) + '\t' + std::to_string(t.head) + '\t' +
             t.deprel + '\t' + t.deps + '\t' + t.misc + '\n';
    }
    out += '\n';
  }
  return out;
}

void write_treebank(const std::string& path, const std::vector<Sentence>& sentences) {
  write_file(path, serialize_treebank(sentences));
}

namespace {

void check_aligned(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred) {
  if (gold.size() != pred.size())
    fail(ErrorCode::InvalidArgument, "sentence count mismatch: " + std::to_string(gold.size()) +
                                         " gold vs " + std::to_string(pred.size()) + " predicted");
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].size() != pred[i].size())
      fail(ErrorCode::InvalidArgument,
           "token count mismatch at sentence " + std::to_string(i) + ": " +
               std::to_string(gold[i].size()) + " gold vs " + std::to_string(pred[i].size()) +
               " predicted");
}

}  // namespace

AttachedAnnotations attach_predicted_annotations(const std::vector<Sentence>& gold,
                                                 const std::vector<Sentence>& predicted) {
  check_aligned(gold, predicted);
  AttachedAnnotations out;
  out.sentences = gold;
  out.upos_agrees.resize(gold.size());
  out.feats_agree.resize(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      const Token& g = gold[i].tokens[j];
      const Token& p = predicted[i].tokens[j];
      bool upos_ok = g.upos == p.upos;
      bool feats_ok = g.feats == p.feats;
      out.upos_agrees[i].push_back(upos_ok);
      out.feats_agree[i].push_back(feats_ok);
      out.agreement.tokens++;
      out.agreement.upos_equal += upos_ok;
      out.agreement.feats_equal += feats_ok;
      out.sentences[i].tokens[j].upos = p.upos;
      out.sentences[i].tokens[j].feats = p.feats;
    }
  }
  return out;
}

AnnotationAgreement feats_quality(const std::vector<Sentence>& gold,
                                  const std::vector<Sentence>& predicted) {
  return attach_predicted_annotations(gold, predicted).agreement;
}

std::string format_feats_quality(const AnnotationAgreement& q) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "UPOS accuracy (%%): %.2f\nfeats accuracy (%%): %.2f\n",
                100.0 * q.upos_accuracy(), 100.0 * q.feats_accuracy());
  return buf;
}

std::vector<Sentence> corrupt_annotations(const std::vector<Sentence>& sentences, double rate,
                                          std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) fail(ErrorCode::InvalidArgument, "noise rate must be in [0, 1]");
  std::vector<const Token*> pool;
  std::set<Upos> tags;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens) {
      pool.push_back(&t);
      tags.insert(t.upos);
    }
  std::vector<Upos> tag_list(tags.begin(), tags.end());
  std::vector<Sentence> out = sentences;
  if (pool.empty()) return out;
  Rng rng(seed);
  for (auto& s : out) {
    for (auto& t : s.tokens) {
      if (rng.uniform() >= rate) continue;
      if (tag_list.size() > 1) {
        Upos replacement;
        do {
          replacement = tag_list[rng.below(tag_list.size())];
        } while (replacement == t.upos);
        t.upos = replacement;
      }
      for (int attempt = 0; attempt < 32; ++attempt) {
        const Token* donor = pool[rng.below(pool.size())];
        if (donor->feats != t.feats) {
          t.feats = donor->feats;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace morpho
