#include "classifier.hpp"

#include <cmath>
#include <numeric>

namespace morpho {

using ad::Index;
using ad::Var;

const char* pooling_name(Pooling p) {
  switch (p) {
    case Pooling::Mean: return "mean";
    case Pooling::Weighted: return "weighted";
    case Pooling::Lstm: return "lstm";
  }
  return "?";
}

Pooling pooling_from_name(std::string_view name) {
  if (name == "mean") return Pooling::Mean;
  if (name == "weighted") return Pooling::Weighted;
  if (name == "lstm") return Pooling::Lstm;
  fail(ErrorCode::InvalidArgument, "unknown pooling '" + std::string(name) + "' (mean, weighted, lstm)");
}

void create_pooling(ad::ParameterStore& store, const std::string& prefix, int dim, const PoolingSpec& spec,
                    std::uint64_t seed) {
  if (spec.kind == Pooling::Weighted) store.add_uniform(prefix + ".a", dim, 1, 1.0 / std::sqrt(double(dim)), seed);
  if (spec.kind == Pooling::Lstm) create_lstm(store, prefix + ".lstm", {1, spec.lstm_hidden, false, dim}, seed);
}

int pooled_dim(int dim, const PoolingSpec& spec) { return spec.kind == Pooling::Lstm ? spec.lstm_hidden : dim; }

Var pooling_weights(ad::Graph& g, ad::ParameterStore& store, const std::string& prefix, Var vectors) {
  Var a = g.param(store.get(prefix + ".a"));
  // One score per position, softmax across positions.
  return ad::softmax(ad::transpose(ad::matmul(ad::transpose(a), vectors)));
}

Var pool(ad::Graph& g, ad::ParameterStore& store, const std::string& prefix, Var vectors, const PoolingSpec& spec) {
  if (vectors.cols() == 0) fail(ErrorCode::InvalidArgument, "cannot pool an empty sequence");
  switch (spec.kind) {
    case Pooling::Mean:
      return ad::mean_cols(vectors);
    case Pooling::Weighted:
      return ad::matmul(vectors, pooling_weights(g, store, prefix, vectors));
    case Pooling::Lstm: {
      LstmSpec ls{1, spec.lstm_hidden, false, static_cast<int>(vectors.rows())};
      Var h = lstm_forward(g, store, prefix + ".lstm", ls, vectors);
      return ad::cols(h, h.cols() - 1, 1);
    }
  }
  fail(ErrorCode::Internal, "unhandled pooling kind");
}

std::vector<LabeledSentence> read_labeled_corpus(std::string_view text) {
  std::vector<LabeledSentence> out;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) fail(ErrorCode::Parse, where + ": expected 'label<TAB>text'");
    std::string_view label = trim(line.substr(0, tab));
    if (label != "0" && label != "1") fail(ErrorCode::Parse, where + ": label must be 0 or 1");
    LabeledSentence ex;
    ex.label = label == "1" ? 1 : 0;
    for (auto w : split(line.substr(tab + 1), ' ')) {
      if (trim(w).empty()) continue;
      Token t;
      t.index = static_cast<int>(ex.sentence.tokens.size()) + 1;
      t.form = std::string(trim(w));
      ex.sentence.tokens.push_back(std::move(t));
    }
    if (ex.sentence.tokens.empty()) fail(ErrorCode::Parse, where + ": empty text");
    // Flat chain keeps the tree invariant; syntax is not used.
    for (std::size_t i = 0; i < ex.sentence.tokens.size(); ++i) ex.sentence.tokens[i].head = static_cast<int>(i);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledSentence> load_labeled_corpus(const std::string& path) {
  try {
    return read_labeled_corpus(read_file(path));
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

void attach_companion(std::vector<LabeledSentence>& corpus, const std::vector<Sentence>& companion) {
  if (corpus.size() != companion.size())
    fail(ErrorCode::InvalidArgument, "companion annotation has " + std::to_string(companion.size()) +
                                         " sentences, corpus has " + std::to_string(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& tokens = corpus[i].sentence.tokens;
    if (tokens.size() != companion[i].size())
      fail(ErrorCode::InvalidArgument, "token count mismatch at sentence " + std::to_string(i));
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      tokens[j].upos = companion[i].tokens[j].upos;
      tokens[j].feats = companion[i].tokens[j].feats;
    }
  }
}

ClassifierModel::ClassifierModel(Embedder embedder, ClassifierSpec spec)
    : embedder_(std::move(embedder)), spec_(spec) {
  const auto& p = embedder_.spec().parts;
  spec_.lstm.input_dim = (p.word ? embedder_.spec().word_dim : 0) + (p.ctx ? embedder_.spec().ctx_dim : 0);
}

bool ClassifierModel::has_sequence() const { return spec_.lstm.input_dim > 0; }

int ClassifierModel::feature_dim() const {
  const auto& e = embedder_.spec();
  int d = has_sequence() ? spec_.lstm.output_dim() : 0;
  if (e.parts.upos) d += pooled_dim(e.upos_dim, spec_.pooling);
  if (e.parts.feats) d += pooled_dim(e.feat_dim * static_cast<int>(kFeatureCount), spec_.pooling);
  return d;
}

void ClassifierModel::create_parameters(std::uint64_t seed, const WordVectors* vectors) {
  const auto& e = embedder_.spec();
  embedder_.create_parameters(params_, seed, vectors);
  if (has_sequence()) create_lstm(params_, "classifier.lstm", spec_.lstm, seed);
  if (e.parts.upos) create_pooling(params_, "classifier.pool_upos", e.upos_dim, spec_.pooling, seed);
  if (e.parts.feats)
    create_pooling(params_, "classifier.pool_feats", e.feat_dim * static_cast<int>(kFeatureCount), spec_.pooling,
                   seed);
  const int d = feature_dim();
  params_.add_uniform("classifier.out.W", 2, d, 1.0 / std::sqrt(double(d)), seed);
  params_.add("classifier.out.b", 2, 1);
}

Var ClassifierModel::logits(ad::Graph& g, const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  const auto& e = embedder_.spec();
  std::vector<Var> parts;
  if (has_sequence()) {
    Parts seq = e.parts;
    seq.upos = seq.feats = false;
    Var x = ad::dropout(embedder_.embed_parts(g, params_, s, seq, ctx, ctx_index), spec_.dropout);
    Var h = lstm_forward(g, params_, "classifier.lstm", spec_.lstm, x, spec_.dropout);
    parts.push_back(ad::dropout(ad::cols(h, h.cols() - 1, 1), spec_.dropout));
  }
  if (e.parts.upos)
    parts.push_back(pool(g, params_, "classifier.pool_upos", embedder_.embed_upos(g, params_, s), spec_.pooling));
  if (e.parts.feats)
    parts.push_back(pool(g, params_, "classifier.pool_feats", embedder_.embed_feats(g, params_, s), spec_.pooling));
  Var feats = parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
  return ad::add(ad::matmul(g.param(params_.get("classifier.out.W")), feats), g.param(params_.get("classifier.out.b")));
}

Var ClassifierModel::loss(ad::Graph& g, const LabeledSentence& ex, const ContextDump* ctx, std::size_t ctx_index) {
  return ad::cross_entropy(logits(g, ex.sentence, ctx, ctx_index), {ex.label});
}

std::array<double, 2> ClassifierModel::distribution(const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  ad::Graph g(false);
  const ad::Matrix& p = ad::softmax(logits(g, s, ctx, ctx_index)).value();
  return {double(p(0, 0)), double(p(1, 0))};
}

int ClassifierModel::classify(const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  auto p = distribution(s, ctx, ctx_index);
  return p[1] > p[0] ? 1 : 0;
}

double accuracy(const std::vector<int>& gold, const std::vector<int>& pred) {
  if (gold.size() != pred.size())
    fail(ErrorCode::InvalidArgument, "gold and predicted label counts differ");
  if (gold.empty()) fail(ErrorCode::InvalidArgument, "accuracy of an empty set");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) ok += gold[i] == pred[i];
  return double(ok) / double(gold.size());
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "mean of an empty set");
  MeanStd r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / double(values.size() - 1));
  }
  return r;
}

SplitIndices split_60_20_20(std::size_t count, std::uint64_t seed) {
  if (count < 3) fail(ErrorCode::InvalidArgument, "need at least 3 examples to split 60/20/20");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = count * 60 / 100;
  const std::size_t n_dev = count * 20 / 100;
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  s.dev.assign(order.begin() + static_cast<long>(n_train), order.begin() + static_cast<long>(n_train + n_dev));
  s.test.assign(order.begin() + static_cast<long>(n_train + n_dev), order.end());
  return s;
}

}  // namespace morpho
