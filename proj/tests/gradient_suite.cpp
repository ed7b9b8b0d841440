#include "gradient_suite.hpp"

#include <array>
#include <functional>
#include <map>

#include "classifier.hpp"
#include "embed.hpp"
#include "encoder.hpp"
#include "gradcheck.hpp"
#include "parser.hpp"
#include "tagger.hpp"

namespace gradsuite {

using namespace morpho;
using gradcheck::project;
using gradcheck::random_matrix;

namespace {

using Case = std::function<gradcheck::Result(std::uint64_t seed)>;

// A case over input matrices only.
Case unary(std::vector<std::pair<int, int>> shapes, std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)> f,
           bool training = false, double scale = 1.0) {
  return [=](std::uint64_t seed) {
    Rng rng(seed * 7919);
    std::vector<ad::Matrix> inputs;
    for (auto [r, c] : shapes) inputs.push_back(random_matrix(r, c, rng, scale));
    return gradcheck::check(
        inputs, nullptr, [&](ad::Graph& g, const std::vector<ad::Var>& x) { return project(g, f(g, x), seed); },
        training, seed);
  };
}

// A case over inputs and the parameters created by `setup`.
Case with_params(std::vector<std::pair<int, int>> shapes, std::function<void(ad::ParameterStore&)> setup,
                 std::function<ad::Var(ad::Graph&, ad::ParameterStore&, const std::vector<ad::Var>&)> f,
                 bool training = false) {
  return [=](std::uint64_t seed) {
    Rng rng(seed * 104729);
    ad::ParameterStore store;
    setup(store);
    gradcheck::randomize(store, rng);
    std::vector<ad::Matrix> inputs;
    for (auto [r, c] : shapes) inputs.push_back(random_matrix(r, c, rng));
    return gradcheck::check(
        inputs, &store,
        [&](ad::Graph& g, const std::vector<ad::Var>& x) { return project(g, f(g, store, x), seed); }, training,
        seed);
  };
}

const std::map<std::string, Case>& cases() {
  static const std::map<std::string, Case> all = [] {
    std::map<std::string, Case> m;
    using V = const std::vector<ad::Var>&;
    using G = ad::Graph&;
    // primitives
    m["matmul"] = unary({{3, 4}, {4, 2}}, [](G, V x) { return ad::matmul(x[0], x[1]); });
    m["add"] = unary({{3, 4}, {3, 4}}, [](G, V x) { return ad::add(x[0], x[1]); });
    m["add_column"] = unary({{3, 4}, {3, 1}}, [](G, V x) { return ad::add(x[0], x[1]); });
    m["add_scalar"] = unary({{3, 4}, {1, 1}}, [](G, V x) { return ad::add(x[0], x[1]); });
    m["sub"] = unary({{3, 4}, {3, 4}}, [](G, V x) { return ad::sub(x[0], x[1]); });
    m["sub_column"] = unary({{3, 4}, {3, 1}}, [](G, V x) { return ad::sub(x[0], x[1]); });
    m["mul"] = unary({{3, 4}, {3, 4}}, [](G, V x) { return ad::mul(x[0], x[1]); });
    m["scale"] = unary({{3, 4}}, [](G, V x) { return ad::scale(x[0], Real(-1.7)); });
    m["scale_by"] = unary({{1, 1}, {3, 4}}, [](G, V x) { return ad::scale_by(x[0], x[1]); });
    m["tanh"] = unary({{3, 4}}, [](G, V x) { return ad::tanh(x[0]); }, false, 2.0);
    m["sigmoid"] = unary({{3, 4}}, [](G, V x) { return ad::sigmoid(x[0]); }, false, 3.0);
    m["relu"] = unary({{3, 4}}, [](G, V x) { return ad::relu(x[0]); });
    m["softmax"] = unary({{4, 3}}, [](G, V x) { return ad::softmax(x[0]); }, false, 2.0);
    m["log_softmax"] = unary({{4, 3}}, [](G, V x) { return ad::log_softmax(x[0]); }, false, 2.0);
    m["dropout"] = unary({{5, 4}}, [](G, V x) { return ad::dropout(x[0], Real(0.4)); }, true);
    m["select_cols"] = unary({{3, 4}}, [](G, V x) { return ad::select_cols(x[0], {2, 0, 2, 3}); });
    m["embedding_lookup"] = unary({{3, 5}}, [](G, V x) { return ad::embedding_lookup(x[0], {4, 1, 1}); });
    m["concat_rows"] = unary({{2, 3}, {4, 3}}, [](G, V x) { return ad::concat_rows(std::span<const ad::Var>(x)); });
    m["concat_cols"] = unary({{3, 2}, {3, 1}}, [](G, V x) { return ad::concat_cols(std::span<const ad::Var>(x)); });
    m["rows"] = unary({{5, 3}}, [](G, V x) { return ad::rows(x[0], 1, 3); });
    m["cols"] = unary({{3, 5}}, [](G, V x) { return ad::cols(x[0], 2, 2); });
    m["transpose"] = unary({{3, 4}}, [](G, V x) { return ad::transpose(x[0]); });
    m["sum"] = unary({{3, 4}}, [](G, V x) { return ad::sum(x[0]); });
    m["mean_cols"] = unary({{3, 4}}, [](G, V x) { return ad::mean_cols(x[0]); });
    m["cross_entropy"] = unary({{5, 4}}, [](G, V x) { return ad::cross_entropy(x[0], {0, 4, 2, 2}); }, false, 2.0);
    m["bilinear_label"] =
        unary({{3, 4}, {3, 4}, {6, 3}}, [](G, V x) { return ad::bilinear_label(x[0], x[1], x[2]); });

    // composite layers
    LstmSpec cell{1, 3, false, 2};
    auto lstm_setup = [cell](ad::ParameterStore& s) { create_lstm(s, "l", cell, 1); };
    m["lstm_cell_forward"] = with_params({{2, 4}}, lstm_setup, [](G g, ad::ParameterStore& s, V x) {
      return lstm_layer(g, s.get("l.l0.fw.W"), s.get("l.l0.fw.U"), s.get("l.l0.fw.b"), x[0], false);
    });
    m["lstm_cell_reverse"] = with_params({{2, 4}}, lstm_setup, [](G g, ad::ParameterStore& s, V x) {
      return lstm_layer(g, s.get("l.l0.fw.W"), s.get("l.l0.fw.U"), s.get("l.l0.fw.b"), x[0], true);
    });
    LstmSpec bilstm{2, 2, true, 3};
    m["bilstm_stack"] = with_params(
        {{3, 3}}, [bilstm](ad::ParameterStore& s) { create_lstm(s, "enc", bilstm, 2); },
        [bilstm](G g, ad::ParameterStore& s, V x) { return lstm_forward(g, s, "enc", bilstm, x[0], Real(0.25)); },
        true);

    BiaffineSpec bia{3, 4, 2, 3};
    auto bia_setup = [bia](ad::ParameterStore& s) { create_biaffine(s, bia, 3); };
    m["biaffine_arc_scores"] = with_params({{3, 4}}, bia_setup, [](G g, ad::ParameterStore& s, V x) {
      return score_arcs(g, s, x[0]).arcs;
    });
    m["biaffine_label_scores"] = with_params({{3, 4}}, bia_setup, [](G g, ad::ParameterStore& s, V x) {
      auto sc = score_arcs(g, s, x[0]);
      return score_labels(g, s, sc, {2, 0, 4, 2});
    });
    m["biaffine_parse_loss"] = with_params({{3, 4}}, bia_setup, [](G g, ad::ParameterStore& s, V x) {
      const std::vector<int> heads = {2, 0, 4, 2};
      auto sc = score_arcs(g, s, x[0], Real(0.2));
      return parse_loss(sc.arcs, score_labels(g, s, sc, heads), heads, {1, 0, 2, 1});
    }, true);

    m["scalar_mix"] = unary({{3, 4}, {3, 4}, {3, 4}, {3, 1}, {1, 1}}, [](G, V x) {
      std::array<ad::Var, 3> layers = {x[0], x[1], x[2]};
      return scalar_mix(layers, x[3], x[4]);
    });

    for (Pooling kind : {Pooling::Mean, Pooling::Weighted, Pooling::Lstm}) {
      PoolingSpec spec{kind, 3};
      m[std::string("pooling_") + pooling_name(kind)] = with_params(
          {{4, 5}}, [spec](ad::ParameterStore& s) { create_pooling(s, "pool", 4, spec, 4); },
          [spec](G g, ad::ParameterStore& s, V x) { return pool(g, s, "pool", x[0], spec); });
    }

    m["tag_head_interaction"] = with_params(
        {{4, 3}}, [](ad::ParameterStore& s) { create_tag_head(s, 4, true, 5); },
        [](G g, ad::ParameterStore& s, V x) { return tag_scores(g, s, x[0], true); });
    return m;
  }();
  return all;
}

}  // namespace

std::vector<std::string> case_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : cases()) out.push_back(name);
  return out;
}

CaseResult run_case(const std::string& name, int points) {
  auto it = cases().find(name);
  if (it == cases().end()) fail(ErrorCode::InvalidArgument, "no gradient case named " + name);
  CaseResult r;
  r.name = name;
  for (int p = 1; p <= points; ++p) {
    auto res = it->second(std::uint64_t(p));
    r.checked += res.checked;
    if (res.max_rel >= r.max_rel) {
      r.max_rel = res.max_rel;
      r.worst = "point " + std::to_string(p) + ": " + res.worst;
    }
  }
  return r;
}

}  // namespace gradsuite
