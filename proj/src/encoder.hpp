#pragma once

#include <string>

#include "autodiff.hpp"
#include "embed.hpp"

namespace morpho {

struct LstmSpec {
  int layers = 1;
  int hidden = 100;
  bool bidirectional = false;
  int input_dim = 0;

  int output_dim() const { return bidirectional ? 2 * hidden : hidden; }
};

// Parameters per layer and direction: "<prefix>.l<k>.<fw|bw>.{W,U,b}" with
// W: 4h x in, U: 4h x h, b: 4h x 1, gate blocks ordered input, forget,
// candidate, output. Forget bias starts at 1, everything else uniform in
// +-1/sqrt(h).
void create_lstm(ad::ParameterStore& store, const std::string& prefix, const LstmSpec& spec,
                 std::uint64_t seed);

// One direction of one layer over the columns of x. Zero initial state.
ad::Var lstm_layer(ad::Graph& g, ad::Parameter& W, ad::Parameter& U, ad::Parameter& b, ad::Var x,
                   bool reverse);

// Stacked (bi)LSTM; a bidirectional layer outputs forward ⊙ backward states.
// Dropout with probability `dropout` is applied between layers.
ad::Var lstm_forward(ad::Graph& g, ad::ParameterStore& store, const std::string& prefix,
                     const LstmSpec& spec, ad::Var x, Real dropout = 0);

// Embedder output, optionally followed by the state of an extra
// unidirectional LSTM run over the word embeddings.
class InputEncoder {
 public:
  InputEncoder(Embedder embedder, int extra_lstm_hidden);

  void create_parameters(ad::ParameterStore& store, std::uint64_t seed,
                         const WordVectors* vectors = nullptr) const;
  int output_dim() const;
  ad::Var encode(ad::Graph& g, ad::ParameterStore& store, const Sentence& s,
                 const ContextDump* ctx = nullptr, std::size_t ctx_index = 0) const;

  const Embedder& embedder() const { return embedder_; }
  int extra_hidden() const { return extra_hidden_; }

 private:
  Embedder embedder_;
  int extra_hidden_;
};

}  // namespace morpho
