#include "tagger.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace morpho {

using ad::Index;
using ad::Var;

namespace {

// Class of a tag in the tagset and whether it is a B- tag; empty for OTHR.
std::pair<std::string_view, bool> decompose(std::string_view tag) {
  if (ner_tag_id(tag) <= 0) return {{}, false};
  return {tag.substr(2), tag[0] == 'B'};
}

int class_index(std::string_view cls) {
  for (std::size_t i = 0; i < kEntityClasses.size(); ++i)
    if (kEntityClasses[i] == cls) return static_cast<int>(i);
  return -1;
}

void check_aligned(const LabelSequences& gold, const LabelSequences& pred) {
  if (gold.size() != pred.size())
    fail(ErrorCode::InvalidArgument, "gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                                         std::to_string(pred.size()));
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].size() != pred[i].size())
      fail(ErrorCode::InvalidArgument, "sentence " + std::to_string(i) + ": gold and predicted lengths differ");
}

}  // namespace

std::vector<Span> extract_spans(const std::vector<std::string>& labels) {
  std::vector<Span> spans;
  std::string_view open;  // class of the span ending at the previous token
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [cls, begin] = decompose(labels[i]);
    if (cls.empty()) {
      open = {};
      continue;
    }
    if (begin || cls != open) {
      spans.push_back({std::string(cls), static_cast<int>(i), static_cast<int>(i)});
      open = cls;
    } else {
      spans.back().end = static_cast<int>(i);
    }
  }
  return spans;
}

double ClassScore::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

std::size_t F1Report::support() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c.gold;
  return n;
}

F1Report weighted_f1(const LabelSequences& gold, const LabelSequences& pred, F1Mode mode) {
  check_aligned(gold, pred);
  F1Report r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (mode == F1Mode::Span) {
      std::vector<Span> gs = extract_spans(gold[i]);
      std::vector<Span> ps = extract_spans(pred[i]);
      std::set<Span> gset(gs.begin(), gs.end());
      for (const auto& s : gs) ++r.classes[class_index(s.cls)].gold;
      for (const auto& s : ps) {
        auto& c = r.classes[class_index(s.cls)];
        ++c.predicted;
        if (gset.count(s)) ++c.correct;
      }
    } else {
      for (std::size_t t = 0; t < gold[i].size(); ++t) {
        int g = class_index(decompose(gold[i][t]).first);
        int p = class_index(decompose(pred[i][t]).first);
        if (g >= 0) ++r.classes[g].gold;
        if (p >= 0) ++r.classes[p].predicted;
        if (g >= 0 && g == p) ++r.classes[g].correct;
      }
    }
  }
  const std::size_t total = r.support();
  if (total)
    for (const auto& c : r.classes) r.weighted_f1 += double(c.gold) / double(total) * c.f1();
  return r;
}

LabelSequences ner_labels(const std::vector<Sentence>& corpus) {
  LabelSequences out;
  for (const auto& s : corpus) {
    std::vector<std::string> labels;
    for (const auto& t : s.tokens) labels.push_back(t.ner.empty() ? "OTHR" : t.ner);
    out.push_back(std::move(labels));
  }
  return out;
}

void create_tag_head(ad::ParameterStore& store, int input_dim, bool interaction, std::uint64_t seed) {
  const double bound = 1.0 / std::sqrt(double(input_dim));
  if (interaction) {
    store.add_uniform("tagger.inter.W", input_dim, input_dim, bound, seed);
    store.add("tagger.inter.b", input_dim, 1);
  }
  store.add_uniform("tagger.out.W", static_cast<Index>(kNerTagCount), input_dim, bound, seed);
  store.add("tagger.out.b", static_cast<Index>(kNerTagCount), 1);
}

Var tag_scores(ad::Graph& g, ad::ParameterStore& store, Var hidden, bool interaction) {
  Var h = hidden;
  if (interaction)
    h = ad::tanh(ad::add(ad::matmul(g.param(store.get("tagger.inter.W")), h), g.param(store.get("tagger.inter.b"))));
  return ad::add(ad::matmul(g.param(store.get("tagger.out.W")), h), g.param(store.get("tagger.out.b")));
}

TaggerModel::TaggerModel(Embedder embedder, TaggerSpec spec) : embedder_(std::move(embedder)), spec_(spec) {
  const auto& p = embedder_.spec().parts;
  if (!p.word && !p.ctx) fail(ErrorCode::InvalidArgument, "the tagger needs the word or ctx part");
  spec_.lstm.input_dim = (p.word ? embedder_.spec().word_dim : 0) + (p.ctx ? embedder_.spec().ctx_dim : 0);
}

int TaggerModel::head_input_dim() const {
  const auto& e = embedder_.spec();
  return spec_.lstm.output_dim() + (e.parts.upos ? e.upos_dim : 0) +
         (e.parts.feats ? e.feat_dim * static_cast<int>(kFeatureCount) : 0);
}

void TaggerModel::create_parameters(std::uint64_t seed, const WordVectors* vectors) {
  embedder_.create_parameters(params_, seed, vectors);
  create_lstm(params_, "tagger.lstm", spec_.lstm, seed);
  create_tag_head(params_, head_input_dim(), spec_.interaction, seed);
}

Var TaggerModel::logits(ad::Graph& g, const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  Parts seq = embedder_.spec().parts;
  seq.upos = seq.feats = false;
  Var x = ad::dropout(embedder_.embed_parts(g, params_, s, seq, ctx, ctx_index), spec_.dropout);
  std::vector<Var> parts{ad::dropout(lstm_forward(g, params_, "tagger.lstm", spec_.lstm, x), spec_.dropout)};
  if (embedder_.spec().parts.upos) parts.push_back(embedder_.embed_upos(g, params_, s));
  if (embedder_.spec().parts.feats) parts.push_back(embedder_.embed_feats(g, params_, s));
  Var h = parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
  return tag_scores(g, params_, h, spec_.interaction);
}

Var TaggerModel::loss(ad::Graph& g, const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  std::vector<int> targets;
  for (const auto& t : s.tokens) {
    int id = ner_tag_id(t.ner.empty() ? "OTHR" : t.ner);
    if (id < 0) fail(ErrorCode::InvalidArgument, "tag '" + t.ner + "' outside the tagset");
    targets.push_back(id);
  }
  return ad::cross_entropy(logits(g, s, ctx, ctx_index), std::move(targets));
}

std::vector<std::string> TaggerModel::predict(const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  ad::Graph g(false);
  const ad::Matrix& z = logits(g, s, ctx, ctx_index).value();
  std::vector<std::string> out;
  for (Index t = 0; t < z.cols(); ++t) {
    Index best = 0;
    for (Index k = 1; k < z.rows(); ++k)
      if (z(k, t) > z(best, t)) best = k;
    out.emplace_back(ner_tagset()[static_cast<std::size_t>(best)]);
  }
  return out;
}

}  // namespace morpho
