#pragma once

#include <span>
#include <vector>

#include "dropnet/ops.hpp"
#include "dropnet/rng.hpp"
#include "dropnet/tensor.hpp"

namespace dropnet {

enum class Mode { train, eval };

// Uniform init in +/- sqrt(6 / (fan_in + fan_out)); rows are the output
// dimension, columns the input dimension.
Tensor glorot_uniform(int rows, int cols, Rng& rng);

// Token embedding matrix [V,d]. The pad row stays exactly zero: it starts
// zeroed and its gradient is discarded before every optimiser step.
struct EmbeddingTable {
  Tensor table;
  int pad_index = 0;
  bool trainable = true;

  int vocab_size() const { return table.extent(0); }
  int dim() const { return table.extent(1); }

  static EmbeddingTable random(int vocab_size, int dim, Rng& rng,
                               bool trainable = true);
  // Uniform row init used both at construction and for tokens a pretrained
  // file does not cover.
  static void random_row(Tensor& table, int row, Rng& rng);

  EmbeddingTable clone() const;
};

// [d,L]; column t is the embedding of token t. Pad positions hit the zero row.
Tensor embed(std::span<const int> tokens, const EmbeddingTable& table);

// One gate weight per line; every gate sees the concatenated [input; hidden]
// vector of length d+h.
struct LSTMParams {
  Tensor w_input, w_forget, w_output, w_candidate;  // [h, d+h]
  Tensor b_input, b_forget, b_output, b_candidate;  // [h]

  int hidden() const { return w_input.extent(0); }
  int input_dim() const { return w_input.extent(1) - w_input.extent(0); }

  // Forget bias starts at 1 so memory is initially carried.
  static LSTMParams init(int input_dim, int hidden, Rng& rng);
};

struct LSTMState {
  Tensor h;
  Tensor c;
};

LSTMState zero_state(int hidden);
LSTMState lstm_step(const Tensor& x, const LSTMState& prev, const LSTMParams& params);

// [2h,L]: column t concatenates the forward state after positions 0..t and
// the backward state after positions L-1..t. Where mask = 0 the state update
// is suppressed and the previous state is carried through.
Tensor bilstm(const Tensor& x, const Mask* mask, const LSTMParams& fwd,
              const LSTMParams& bwd);

// w*x + b
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

struct DropoutSpec {
  double drop_rate = 0.0;  // probability a unit is zeroed
  Mode mode = Mode::eval;
  Rng* rng = nullptr;  // mask stream, required in train mode when drop_rate > 0
  // Inverted variant: scale by 1/(1-drop_rate) at train time, identity at
  // eval. Off by default; the standard form rescales at eval instead.
  bool inverted = false;
};

// Train mode draws a fresh zero-one mask from spec.rng per call; eval mode
// deterministically scales by the retain probability 1 - drop_rate. The mask
// participates in the gradient, so dropped units receive zero gradient.
Tensor apply_dropout(const Tensor& x, const DropoutSpec& spec);

}  // namespace dropnet
