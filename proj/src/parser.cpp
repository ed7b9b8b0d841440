#include "parser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace morpho {

using ad::Index;
using ad::Matrix;
using ad::Var;

namespace {

constexpr double kNoArc = -std::numeric_limits<double>::infinity();
using Weights = std::vector<std::vector<double>>;  // w[head][dependent], node 0 is ROOT

// Returns the nodes of some cycle among the head pointers, or nothing.
std::vector<int> find_cycle(const std::vector<int>& head) {
  const int n = static_cast<int>(head.size());
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 new, 1 on current walk, 2 done
  for (int start = 1; start < n; ++start) {
    if (state[static_cast<std::size_t>(start)]) continue;
    std::vector<int> walk;
    int v = start;
    while (v > 0 && state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      walk.push_back(v);
      v = head[static_cast<std::size_t>(v)];
    }
    if (v > 0 && state[static_cast<std::size_t>(v)] == 1) {
      std::vector<int> cycle;
      int u = v;
      do {
        cycle.push_back(u);
        u = head[static_cast<std::size_t>(u)];
      } while (u != v);
      return cycle;
    }
    for (int u : walk) state[static_cast<std::size_t>(u)] = 2;
  }
  return {};
}

std::vector<int> chu_liu_edmonds(const Weights& w) {
  const int n = static_cast<int>(w.size());
  std::vector<int> head(static_cast<std::size_t>(n), -1);
  for (int v = 1; v < n; ++v) {
    int best = -1;
    for (int h = 0; h < n; ++h) {
      if (h == v) continue;
      if (best < 0 || w[h][v] > w[best][v]) best = h;
    }
    head[static_cast<std::size_t>(v)] = best;
  }
  std::vector<int> cycle = find_cycle(head);
  if (cycle.empty()) return head;

  std::vector<bool> in_cycle(static_cast<std::size_t>(n), false);
  for (int v : cycle) in_cycle[static_cast<std::size_t>(v)] = true;
  std::vector<int> new_id(static_cast<std::size_t>(n), -1), old_id;
  for (int v = 0; v < n; ++v)
    if (!in_cycle[static_cast<std::size_t>(v)]) {
      new_id[static_cast<std::size_t>(v)] = static_cast<int>(old_id.size());
      old_id.push_back(v);
    }
  const int m = static_cast<int>(old_id.size()) + 1;
  const int c = m - 1;
  Weights cw(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), kNoArc));
  std::vector<int> enter(static_cast<std::size_t>(m), -1);  // contracted head -> cycle node entered
  std::vector<int> leave(static_cast<std::size_t>(m), -1);  // outside dependent -> cycle node leaving
  for (int u = 0; u < n; ++u) {
    const bool uc = in_cycle[static_cast<std::size_t>(u)];
    for (int v = 1; v < n; ++v) {
      if (u == v) continue;
      const bool vc = in_cycle[static_cast<std::size_t>(v)];
      if (!uc && !vc) {
        cw[new_id[u]][new_id[v]] = w[u][v];
      } else if (!uc && vc) {
        const double val = w[u][v] - w[head[v]][v];
        auto& slot = cw[new_id[u]][c];
        if (enter[new_id[u]] < 0 || val > slot) {
          slot = val;
          enter[new_id[u]] = v;
        }
      } else if (uc && !vc) {
        auto& slot = cw[c][new_id[v]];
        if (leave[new_id[v]] < 0 || w[u][v] > slot) {
          slot = w[u][v];
          leave[new_id[v]] = u;
        }
      }
    }
  }
  std::vector<int> sub = chu_liu_edmonds(cw);
  std::vector<int> out = head;
  for (int v = 1; v < n; ++v) {
    if (in_cycle[static_cast<std::size_t>(v)]) continue;
    const int h = sub[static_cast<std::size_t>(new_id[v])];
    out[static_cast<std::size_t>(v)] = h == c ? leave[new_id[v]] : old_id[static_cast<std::size_t>(h)];
  }
  const int h = sub[static_cast<std::size_t>(c)];
  out[static_cast<std::size_t>(enter[h])] = old_id[static_cast<std::size_t>(h)];
  return out;
}

Weights to_weights(const Matrix& scores) {
  const Index n = scores.cols();
  Weights w(static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(n + 1), kNoArc));
  for (Index h = 0; h <= n; ++h)
    for (Index d = 1; d <= n; ++d)
      if (h != d) w[h][d] = double(scores(h, d - 1));
  return w;
}

void check_scores(const Matrix& scores) {
  if (scores.cols() == 0) fail(ErrorCode::InvalidArgument, "cannot decode an empty sentence");
  if (scores.rows() != scores.cols() + 1)
    fail(ErrorCode::Shape, "arc scores must be (n+1) x n, got " + std::to_string(scores.rows()) + "x" +
                               std::to_string(scores.cols()));
  if (!scores.allFinite()) fail(ErrorCode::Numeric, "arc scores contain non-finite values");
}

int argmax_col(const Matrix& m, Index col) {
  Index best = 0;
  for (Index r = 1; r < m.rows(); ++r)
    if (m(r, col) > m(best, col)) best = r;
  return static_cast<int>(best);
}

Var mlp(ad::Graph& g, ad::ParameterStore& store, const std::string& name, Var x) {
  return ad::tanh(ad::add(ad::matmul(g.param(store.get(name + ".W")), x), g.param(store.get(name + ".b"))));
}

}  // namespace

std::vector<int> decode_greedy(const Matrix& scores) {
  check_scores(scores);
  const Index n = scores.cols();
  std::vector<int> heads(static_cast<std::size_t>(n));
  for (Index d = 0; d < n; ++d) {
    Index best = -1;
    for (Index h = 0; h <= n; ++h) {
      if (h == d + 1) continue;
      if (best < 0 || scores(h, d) > scores(best, d)) best = h;
    }
    heads[static_cast<std::size_t>(d)] = static_cast<int>(best);
  }
  return heads;
}

std::vector<int> decode_mst(const Matrix& scores) {
  check_scores(scores);
  const Index n = scores.cols();
  if (n == 1) return {0};
  Weights w = to_weights(scores);
  auto strip = [](std::vector<int> full) { return std::vector<int>(full.begin() + 1, full.end()); };
  std::vector<int> heads = strip(chu_liu_edmonds(w));
  if (std::count(heads.begin(), heads.end(), 0) == 1) return heads;

  // The unconstrained optimum has several roots: find the best tree for
  // each possible single child of ROOT.
  std::vector<int> best;
  double best_score = kNoArc;
  for (Index r = 1; r <= n; ++r) {
    Weights wr = w;
    for (Index d = 1; d <= n; ++d)
      if (d != r) wr[0][d] = kNoArc;
    std::vector<int> cand = strip(chu_liu_edmonds(wr));
    double s = tree_score(scores, cand);
    if (best.empty() || s > best_score) {
      best = std::move(cand);
      best_score = s;
    }
  }
  return best;
}

double tree_score(const Matrix& scores, const std::vector<int>& heads) {
  double s = 0;
  for (std::size_t d = 0; d < heads.size(); ++d) s += double(scores(heads[d], static_cast<Index>(d)));
  return s;
}

AttachmentReport& AttachmentReport::operator+=(const AttachmentReport& o) {
  tokens += o.tokens;
  head_correct += o.head_correct;
  both_correct += o.both_correct;
  return *this;
}

AttachmentReport attachment_scores(const Sentence& gold, const Sentence& pred, bool exclude_punct) {
  if (gold.size() != pred.size())
    fail(ErrorCode::InvalidArgument, "gold and predicted sentences differ in length");
  AttachmentReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Token& g = gold.tokens[i];
    const Token& p = pred.tokens[i];
    if (exclude_punct && g.upos == Upos::PUNCT) continue;
    ++r.tokens;
    if (g.head == p.head) {
      ++r.head_correct;
      if (g.deprel == p.deprel) ++r.both_correct;
    }
  }
  return r;
}

AttachmentReport attachment_scores(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred,
                                   bool exclude_punct) {
  if (gold.size() != pred.size())
    fail(ErrorCode::InvalidArgument, "gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                                         std::to_string(pred.size()));
  AttachmentReport total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    try {
      total += attachment_scores(gold[i], pred[i], exclude_punct);
    } catch (const Error& e) {
      fail(e.code(), "sentence " + std::to_string(i) + ": " + e.what());
    }
  }
  return total;
}

void create_biaffine(ad::ParameterStore& store, const BiaffineSpec& spec, std::uint64_t seed) {
  if (spec.input_dim < 1 || spec.arc_dim < 1 || spec.label_dim < 1 || spec.labels < 1)
    fail(ErrorCode::InvalidArgument, "biaffine sizes must be >= 1");
  const double in_bound = std::sqrt(6.0 / (spec.input_dim + spec.arc_dim));
  const double lab_bound = std::sqrt(6.0 / (spec.input_dim + spec.label_dim));
  store.add_uniform("parser.root", spec.input_dim, 1, 0.1, seed);
  for (const char* name : {"parser.arc_dep", "parser.arc_head"}) {
    store.add_uniform(std::string(name) + ".W", spec.arc_dim, spec.input_dim, in_bound, seed);
    store.add(std::string(name) + ".b", spec.arc_dim, 1);
  }
  for (const char* name : {"parser.lab_dep", "parser.lab_head"}) {
    store.add_uniform(std::string(name) + ".W", spec.label_dim, spec.input_dim, lab_bound, seed);
    store.add(std::string(name) + ".b", spec.label_dim, 1);
  }
  // Bilinear terms start at zero, as in the original biaffine parser.
  store.add("parser.U_arc", spec.arc_dim, spec.arc_dim);
  store.add("parser.b_arc", spec.arc_dim, 1);
  store.add("parser.U_lab", Index(spec.labels) * spec.label_dim, spec.label_dim);
  store.add("parser.W_lab", spec.labels, 2 * spec.label_dim);
  store.add("parser.b_lab", spec.labels, 1);
}

BiaffineScores score_arcs(ad::Graph& g, ad::ParameterStore& store, Var hidden, Real dropout) {
  if (hidden.cols() < 1) fail(ErrorCode::InvalidArgument, "score_arcs: empty sentence");
  const Var with_root_parts[] = {g.param(store.get("parser.root")), hidden};
  Var all = ad::concat_cols(with_root_parts);  // input x (n+1)
  Var arc_dep = ad::dropout(mlp(g, store, "parser.arc_dep", hidden), dropout);
  Var arc_head = ad::dropout(mlp(g, store, "parser.arc_head", all), dropout);
  Var head_t = ad::transpose(arc_head);  // (n+1) x d_arc
  Var bilinear = ad::matmul(head_t, ad::matmul(g.param(store.get("parser.U_arc")), arc_dep));
  Var head_bias = ad::matmul(head_t, g.param(store.get("parser.b_arc")));  // (n+1) x 1
  BiaffineScores out;
  out.arcs = ad::add(bilinear, head_bias);
  out.label_dep = ad::dropout(mlp(g, store, "parser.lab_dep", hidden), dropout);
  out.label_head = ad::dropout(mlp(g, store, "parser.lab_head", all), dropout);
  return out;
}

Var score_labels(ad::Graph& g, ad::ParameterStore& store, const BiaffineScores& s,
                 const std::vector<int>& heads) {
  if (static_cast<Index>(heads.size()) != s.label_dep.cols())
    fail(ErrorCode::Shape, "score_labels: " + std::to_string(heads.size()) + " heads for " +
                               std::to_string(s.label_dep.cols()) + " dependents");
  Var head = ad::select_cols(s.label_head, heads);
  Var bilinear = ad::bilinear_label(s.label_dep, head, g.param(store.get("parser.U_lab")));
  const Var pair_parts[] = {s.label_dep, head};
  Var linear = ad::matmul(g.param(store.get("parser.W_lab")), ad::concat_rows(pair_parts));
  return ad::add(ad::add(bilinear, linear), g.param(store.get("parser.b_lab")));
}

Var parse_loss(Var arcs, Var labels, const std::vector<int>& gold_heads, const std::vector<int>& gold_labels) {
  for (int h : gold_heads)
    if (h < 0 || h >= arcs.rows())
      fail(ErrorCode::InvalidArgument, "gold head " + std::to_string(h) + " out of range");
  return ad::add(ad::cross_entropy(arcs, gold_heads), ad::cross_entropy(labels, gold_labels));
}

std::vector<std::string> collect_deprels(const std::vector<Sentence>& train) {
  std::set<std::string> seen;
  for (const auto& s : train)
    for (const auto& t : s.tokens) seen.insert(t.deprel);
  return {seen.begin(), seen.end()};
}

ParserModel::ParserModel(InputEncoder input, ParserSpec spec, std::vector<std::string> labels)
    : input_(std::move(input)), spec_(spec), labels_(std::move(labels)) {
  if (labels_.empty()) fail(ErrorCode::InvalidArgument, "parser needs at least one dependency label");
  spec_.lstm.input_dim = input_.output_dim();
}

void ParserModel::create_parameters(std::uint64_t seed, const WordVectors* vectors) {
  input_.create_parameters(params_, seed, vectors);
  create_lstm(params_, "parser.lstm", spec_.lstm, seed);
  create_biaffine(params_, {spec_.lstm.output_dim(), spec_.arc_dim, spec_.label_dim, int(labels_.size())}, seed);
}

int ParserModel::label_id(const std::string& deprel) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), deprel);
  return it != labels_.end() && *it == deprel ? static_cast<int>(it - labels_.begin()) : -1;
}

Var ParserModel::encode(ad::Graph& g, const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  Var x = ad::dropout(input_.encode(g, params_, s, ctx, ctx_index), spec_.dropout);
  return ad::dropout(lstm_forward(g, params_, "parser.lstm", spec_.lstm, x, spec_.dropout), spec_.dropout);
}

Var ParserModel::loss(ad::Graph& g, const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  BiaffineScores sc = score_arcs(g, params_, encode(g, s, ctx, ctx_index), spec_.dropout);
  std::vector<int> heads, labels;
  for (const auto& t : s.tokens) {
    heads.push_back(t.head);
    int l = label_id(t.deprel);
    if (l < 0) fail(ErrorCode::InvalidArgument, "label '" + t.deprel + "' not in the label vocabulary");
    labels.push_back(l);
  }
  return parse_loss(sc.arcs, score_labels(g, params_, sc, heads), heads, labels);
}

Sentence ParserModel::predict(const Sentence& s, const ContextDump* ctx, std::size_t ctx_index) {
  ad::Graph g(false);
  BiaffineScores sc = score_arcs(g, params_, encode(g, s, ctx, ctx_index));
  std::vector<int> heads = spec_.mst ? decode_mst(sc.arcs.value()) : decode_greedy(sc.arcs.value());
  const Matrix& lab = score_labels(g, params_, sc, heads).value();
  Sentence out = s;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    out.tokens[i].head = heads[i];
    out.tokens[i].deprel = labels_[static_cast<std::size_t>(argmax_col(lab, static_cast<Index>(i)))];
  }
  return out;
}

}  // namespace morpho
