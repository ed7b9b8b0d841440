#include "encoder.hpp"

#include <cmath>

namespace morpho {

using ad::Index;
using ad::Var;

namespace {

std::string cell_prefix(const std::string& prefix, int layer, bool backward) {
  return prefix + ".l" + std::to_string(layer) + (backward ? ".bw" : ".fw");
}

}  // namespace

void create_lstm(ad::ParameterStore& store, const std::string& prefix, const LstmSpec& spec,
                 std::uint64_t seed) {
  if (spec.layers < 1 || spec.hidden < 1 || spec.input_dim < 1)
    fail(ErrorCode::InvalidArgument, prefix + ": LSTM needs layers, hidden and input sizes >= 1");
  const double bound = 1.0 / std::sqrt(double(spec.hidden));
  const Index h = spec.hidden;
  for (int l = 0; l < spec.layers; ++l) {
    const Index in = l == 0 ? spec.input_dim : spec.output_dim();
    for (int dir = 0; dir < (spec.bidirectional ? 2 : 1); ++dir) {
      const std::string p = cell_prefix(prefix, l, dir == 1);
      store.add_uniform(p + ".W", 4 * h, in, bound, seed);
      store.add_uniform(p + ".U", 4 * h, h, bound, seed);
      auto& b = store.add_uniform(p + ".b", 4 * h, 1, bound, seed);
      b.value.middleRows(h, h).setOnes();
    }
  }
}

Var lstm_layer(ad::Graph& g, ad::Parameter& W, ad::Parameter& U, ad::Parameter& b, Var x, bool reverse) {
  const Index h = U.value.cols();
  const Index n = x.cols();
  if (n == 0) fail(ErrorCode::InvalidArgument, "LSTM over an empty sequence");
  if (W.value.cols() != x.rows())
    fail(ErrorCode::Shape, W.name + ": expects input size " + std::to_string(W.value.cols()) + ", got " +
                               std::to_string(x.rows()));
  Var wx = ad::add(ad::matmul(g.param(W), x), g.param(b));
  Var u = g.param(U);
  std::vector<Var> states(static_cast<std::size_t>(n));
  Var hprev, cprev;
  for (Index step = 0; step < n; ++step) {
    const Index t = reverse ? n - 1 - step : step;
    Var z = ad::cols(wx, t, 1);
    if (step > 0) z = ad::add(z, ad::matmul(u, hprev));
    Var i = ad::sigmoid(ad::rows(z, 0, h));
    Var f = ad::sigmoid(ad::rows(z, h, h));
    Var c_in = ad::tanh(ad::rows(z, 2 * h, h));
    Var o = ad::sigmoid(ad::rows(z, 3 * h, h));
    Var c = ad::mul(i, c_in);
    if (step > 0) c = ad::add(ad::mul(f, cprev), c);
    Var hs = ad::mul(o, ad::tanh(c));
    states[static_cast<std::size_t>(t)] = hs;
    hprev = hs;
    cprev = c;
  }
  return ad::concat_cols(states);
}

Var lstm_forward(ad::Graph& g, ad::ParameterStore& store, const std::string& prefix, const LstmSpec& spec,
                 Var x, Real dropout) {
  Var cur = x;
  for (int l = 0; l < spec.layers; ++l) {
    if (l > 0) cur = ad::dropout(cur, dropout);
    std::vector<Var> dirs;
    for (int dir = 0; dir < (spec.bidirectional ? 2 : 1); ++dir) {
      const std::string p = cell_prefix(prefix, l, dir == 1);
      dirs.push_back(lstm_layer(g, store.get(p + ".W"), store.get(p + ".U"), store.get(p + ".b"), cur, dir == 1));
    }
    cur = dirs.size() == 1 ? dirs[0] : ad::concat_rows(dirs);
  }
  return cur;
}

InputEncoder::InputEncoder(Embedder embedder, int extra_lstm_hidden)
    : embedder_(std::move(embedder)), extra_hidden_(extra_lstm_hidden) {
  if (extra_hidden_ < 0) fail(ErrorCode::InvalidArgument, "extra LSTM size must be >= 0");
  if (extra_hidden_ > 0 && !embedder_.spec().parts.word)
    fail(ErrorCode::InvalidArgument, "the extra input LSTM reads word embeddings; enable the word part");
}

void InputEncoder::create_parameters(ad::ParameterStore& store, std::uint64_t seed,
                                     const WordVectors* vectors) const {
  embedder_.create_parameters(store, seed, vectors);
  if (extra_hidden_ > 0) {
    LstmSpec spec{1, extra_hidden_, false, embedder_.spec().word_dim};
    create_lstm(store, "input_lstm", spec, seed);
  }
}

int InputEncoder::output_dim() const { return embedder_.output_dim() + extra_hidden_; }

Var InputEncoder::encode(ad::Graph& g, ad::ParameterStore& store, const Sentence& s, const ContextDump* ctx,
                         std::size_t ctx_index) const {
  Var x = embedder_.embed(g, store, s, ctx, ctx_index);
  if (extra_hidden_ == 0) return x;
  LstmSpec spec{1, extra_hidden_, false, embedder_.spec().word_dim};
  Var h = lstm_forward(g, store, "input_lstm", spec, embedder_.embed_words(g, store, s));
  const Var parts[] = {x, h};
  return ad::concat_rows(parts);
}

}  // namespace morpho
