#include "dropnet/layers.hpp"

#include <cmath>
#include <string>

#include "dropnet/error.hpp"

namespace dropnet {

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Tensor t = Tensor::zeros({rows, cols}, true);
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

EmbeddingTable EmbeddingTable::random(int vocab_size, int dim, Rng& rng,
                                      bool trainable) {
  EmbeddingTable table;
  table.table = Tensor::zeros({vocab_size, dim}, trainable);
  table.trainable = trainable;
  for (int row = 0; row < vocab_size; ++row) {
    if (row == table.pad_index) continue;
    random_row(table.table, row, rng);
  }
  return table;
}

void EmbeddingTable::random_row(Tensor& table, int row, Rng& rng) {
  const int dim = table.extent(1);
  auto values = table.values();
  for (int c = 0; c < dim; ++c) {
    values[static_cast<std::size_t>(row) * static_cast<std::size_t>(dim) +
           static_cast<std::size_t>(c)] = rng.uniform(-0.1, 0.1);
  }
}

EmbeddingTable EmbeddingTable::clone() const {
  EmbeddingTable copy;
  copy.table = table.clone();
  copy.pad_index = pad_index;
  copy.trainable = trainable;
  return copy;
}

Tensor embed(std::span<const int> tokens, const EmbeddingTable& table) {
  return lookup(table.table, tokens);
}

LSTMParams LSTMParams::init(int input_dim, int hidden, Rng& rng) {
  LSTMParams p;
  p.w_input = glorot_uniform(hidden, input_dim + hidden, rng);
  p.w_forget = glorot_uniform(hidden, input_dim + hidden, rng);
  p.w_output = glorot_uniform(hidden, input_dim + hidden, rng);
  p.w_candidate = glorot_uniform(hidden, input_dim + hidden, rng);
  p.b_input = Tensor::zeros({hidden}, true);
  p.b_forget = Tensor::full({hidden}, 1.0, true);
  p.b_output = Tensor::zeros({hidden}, true);
  p.b_candidate = Tensor::zeros({hidden}, true);
  return p;
}

LSTMState zero_state(int hidden) {
  return {Tensor::zeros({hidden}), Tensor::zeros({hidden})};
}

LSTMState lstm_step(const Tensor& x, const LSTMState& prev,
                    const LSTMParams& params) {
  if (x.rank() != 1 || x.extent(0) != params.input_dim() ||
      prev.h.extent(0) != params.hidden()) {
    throw DimensionError("lstm_step: input " + shape_string(x.shape()) +
                         " with state " + shape_string(prev.h.shape()) +
                         " does not match gate shape " +
                         shape_string(params.w_input.shape()));
  }
  Tensor joined = concat({x, prev.h}, 0);
  Tensor in_gate = sigmoid(dense(joined, params.w_input, params.b_input));
  Tensor forget_gate = sigmoid(dense(joined, params.w_forget, params.b_forget));
  Tensor out_gate = sigmoid(dense(joined, params.w_output, params.b_output));
  Tensor candidate = tanh(dense(joined, params.w_candidate, params.b_candidate));
  Tensor cell = add(mul(forget_gate, prev.c), mul(in_gate, candidate));
  Tensor hidden = mul(out_gate, tanh(cell));
  return {hidden, cell};
}

Tensor bilstm(const Tensor& x, const Mask* mask, const LSTMParams& fwd,
              const LSTMParams& bwd) {
  if (x.rank() != 2) {
    throw DimensionError("bilstm expects [d,L] input, got " +
                         shape_string(x.shape()));
  }
  const int length = x.extent(1);
  if (mask != nullptr && static_cast<int>(mask->size()) != length) {
    throw DimensionError("bilstm: mask length " + std::to_string(mask->size()) +
                         " does not match sequence length " +
                         std::to_string(length));
  }
  auto valid = [mask](int t) {
    return mask == nullptr || (*mask)[static_cast<std::size_t>(t)] != 0;
  };

  std::vector<Tensor> fwd_cols(static_cast<std::size_t>(length));
  LSTMState state = zero_state(fwd.hidden());
  for (int t = 0; t < length; ++t) {
    if (valid(t)) state = lstm_step(column(x, t), state, fwd);
    fwd_cols[static_cast<std::size_t>(t)] = reshape(state.h, {fwd.hidden(), 1});
  }

  std::vector<Tensor> bwd_cols(static_cast<std::size_t>(length));
  state = zero_state(bwd.hidden());
  for (int t = length - 1; t >= 0; --t) {
    if (valid(t)) state = lstm_step(column(x, t), state, bwd);
    bwd_cols[static_cast<std::size_t>(t)] = reshape(state.h, {bwd.hidden(), 1});
  }

  return concat({concat(fwd_cols, 1), concat(bwd_cols, 1)}, 0);
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add(matmul(w, x), b);
}

Tensor apply_dropout(const Tensor& x, const DropoutSpec& spec) {
  if (!(spec.drop_rate >= 0.0) || spec.drop_rate >= 1.0) {
    throw ConfigError("drop_rate must lie in [0, 1), got " +
                      std::to_string(spec.drop_rate));
  }
  if (spec.drop_rate == 0.0) return x;
  const double retain = 1.0 - spec.drop_rate;
  if (spec.mode == Mode::eval) {
    return spec.inverted ? x : scale(x, retain);
  }
  if (spec.rng == nullptr) {
    throw ConfigError("train-mode dropout needs an rng stream");
  }
  Tensor mask = Tensor::zeros(x.shape());
  for (double& m : mask.values()) {
    m = spec.rng->bernoulli(retain) ? 1.0 : 0.0;
  }
  Tensor dropped = mul(x, mask);
  return spec.inverted ? scale(dropped, 1.0 / retain) : dropped;
}

}  // namespace dropnet
