#include "dropnet/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

constexpr std::uint64_t kInitStream = 0x1;
constexpr std::uint64_t kDropoutStream = 0x2;

void check_columns(const char* op, const Tensor& t, const Mask* mask) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + " expects [rows,L] input, got " +
                         shape_string(t.shape()));
  }
  if (mask != nullptr && static_cast<int>(mask->size()) != t.extent(1)) {
    throw DimensionError(std::string(op) + ": mask length " +
                         std::to_string(mask->size()) + " does not match " +
                         shape_string(t.shape()));
  }
}

}  // namespace

IntraAttentionResult intra_attention(const Tensor& encoded, const Mask* mask,
                                     const IntraAttentionParams& params) {
  check_columns("intra_attention", encoded, mask);
  const int rows = encoded.extent(0);
  const int length = encoded.extent(1);
  Tensor average = reduce_mean(encoded, 1, mask);
  Tensor projected = add(matmul(params.w_seq, encoded),
                         reshape(matmul(params.w_avg, average), {rows, 1}));
  Tensor scores = matmul(params.w_score, dropnet::tanh(projected));
  Tensor weights = softmax(scores, 0, mask);
  Tensor weighted = mul(encoded, reshape(weights, {1, length}));
  return {weights, weighted};
}

InterAttentionResult inter_attention(const Tensor& premise, const Tensor& hypothesis,
                                     const Mask* premise_mask,
                                     const Mask* hypothesis_mask) {
  check_columns("inter_attention", premise, premise_mask);
  check_columns("inter_attention", hypothesis, hypothesis_mask);
  if (premise.extent(0) != hypothesis.extent(0)) {
    throw DimensionError("inter_attention: row mismatch between " +
                         shape_string(premise.shape()) + " and " +
                         shape_string(hypothesis.shape()));
  }
  // interaction[i,j] pairs premise position i with hypothesis position j
  Tensor interaction = matmul(transpose(premise), hypothesis);
  Tensor over_hypothesis = softmax(interaction, 1, hypothesis_mask);
  Tensor over_premise = softmax(interaction, 0, premise_mask);
  Tensor aligned_premise = matmul(hypothesis, transpose(over_hypothesis));
  Tensor aligned_hypothesis = matmul(premise, over_premise);
  return {aligned_premise, aligned_hypothesis};
}

Tensor fuse(const Tensor& aligned, const Tensor& weighted) {
  if (aligned.shape() != weighted.shape()) {
    throw DimensionError("fuse: shape mismatch between " +
                         shape_string(aligned.shape()) + " and " +
                         shape_string(weighted.shape()));
  }
  return mul(aligned, weighted);
}

Tensor relation_vector(const Tensor& fused_premise, const Tensor& fused_hypothesis,
                       const Mask* premise_mask, const Mask* hypothesis_mask) {
  check_columns("relation_vector", fused_premise, premise_mask);
  check_columns("relation_vector", fused_hypothesis, hypothesis_mask);
  return concat({reduce_mean(fused_premise, 1, premise_mask),
                 reduce_max(fused_premise, 1, premise_mask),
                 reduce_mean(fused_hypothesis, 1, hypothesis_mask),
                 reduce_max(fused_hypothesis, 1, hypothesis_mask)},
                0);
}

NliModel::NliModel(ModelConfig config, int vocab_size)
    : NliModel(config, [&] {
        Rng init(mix_seed(config.seed, kInitStream));
        return EmbeddingTable::random(vocab_size, config.embedding_dim, init,
                                      config.trainable_embeddings);
      }()) {}

NliModel::NliModel(ModelConfig config, EmbeddingTable embeddings)
    : config_(config),
      embeddings_(std::move(embeddings)),
      dropout_rng_(mix_seed(config.seed, kDropoutStream)) {
  if (config_.embedding_dim != embeddings_.dim()) {
    throw ConfigError("embedding_dim " + std::to_string(config_.embedding_dim) +
                      " does not match table dim " +
                      std::to_string(embeddings_.dim()));
  }
  if (config_.hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
  if (config_.num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (!(config_.drop_rate >= 0.0) || config_.drop_rate >= 1.0) {
    throw ConfigError("drop_rate must lie in [0, 1), got " +
                      std::to_string(config_.drop_rate));
  }
  embeddings_.trainable = config_.trainable_embeddings;
  embeddings_.table.set_requires_grad(config_.trainable_embeddings);

  Rng init(mix_seed(config_.seed, kInitStream));
  // burn the table draws so both constructors land on the same stream state
  for (int row = 0; row < embeddings_.vocab_size(); ++row) {
    if (row == embeddings_.pad_index) continue;
    for (int c = 0; c < embeddings_.dim(); ++c) init.uniform();
  }
  const int h = config_.hidden_units;
  const int d = config_.embedding_dim;
  lstm_fwd_ = LSTMParams::init(d, h, init);
  lstm_bwd_ = LSTMParams::init(d, h, init);
  intra_.w_seq = glorot_uniform(2 * h, 2 * h, init);
  intra_.w_avg = glorot_uniform(2 * h, 2 * h, init);
  intra_.w_score = Tensor::zeros({2 * h}, true);
  {
    const double limit = std::sqrt(6.0 / (1 + 2 * h));
    for (double& v : intra_.w_score.values()) v = init.uniform(-limit, limit);
  }
  mlp_hidden_w_ = glorot_uniform(2 * h, 8 * h, init);
  mlp_hidden_b_ = Tensor::zeros({2 * h}, true);
  mlp_output_w_ = glorot_uniform(config_.num_classes, 2 * h, init);
  mlp_output_b_ = Tensor::zeros({config_.num_classes}, true);
  register_params();
}

void NliModel::register_params() {
  params_.clear();
  params_.push_back({"embedding.table", embeddings_.table, false});
  auto add_lstm = [&](const char* prefix, LSTMParams& p) {
    const std::string base(prefix);
    params_.push_back({base + ".w_input", p.w_input, true});
    params_.push_back({base + ".w_forget", p.w_forget, true});
    params_.push_back({base + ".w_output", p.w_output, true});
    params_.push_back({base + ".w_candidate", p.w_candidate, true});
    params_.push_back({base + ".b_input", p.b_input, false});
    params_.push_back({base + ".b_forget", p.b_forget, false});
    params_.push_back({base + ".b_output", p.b_output, false});
    params_.push_back({base + ".b_candidate", p.b_candidate, false});
  };
  add_lstm("lstm_fwd", lstm_fwd_);
  add_lstm("lstm_bwd", lstm_bwd_);
  params_.push_back({"intra.w_seq", intra_.w_seq, true});
  params_.push_back({"intra.w_avg", intra_.w_avg, true});
  params_.push_back({"intra.w_score", intra_.w_score, true});
  params_.push_back({"mlp.hidden.weight", mlp_hidden_w_, true});
  params_.push_back({"mlp.hidden.bias", mlp_hidden_b_, false});
  params_.push_back({"mlp.output.weight", mlp_output_w_, true});
  params_.push_back({"mlp.output.bias", mlp_output_b_, false});
}

Tensor NliModel::site_dropout(const Tensor& x, DropSite site, Mode mode) {
  if (!config_.placement.contains(site) || config_.drop_rate == 0.0) return x;
  DropoutSpec spec;
  spec.drop_rate = config_.drop_rate;
  spec.mode = mode;
  spec.rng = &dropout_rng_;
  spec.inverted = config_.inverted_dropout;
  return apply_dropout(x, spec);
}

Tensor NliModel::encode(std::span<const int> tokens, const Mask* mask, Mode mode) {
  Tensor embedded = embed(tokens, embeddings_);
  embedded = site_dropout(embedded, DropSite::embedding, mode);
  Tensor encoded = bilstm(embedded, mask, lstm_fwd_, lstm_bwd_);
  encoded = site_dropout(encoded, DropSite::recurrent, mode);
  IntraAttentionResult intra = intra_attention(encoded, mask, intra_);
  return site_dropout(intra.weighted, DropSite::intra_attention, mode);
}

Tensor NliModel::forward(std::span<const int> premise,
                         std::span<const int> hypothesis, Mode mode) {
  return forward(premise, nullptr, hypothesis, nullptr, mode);
}

Tensor NliModel::forward(std::span<const int> premise, const Mask* premise_mask,
                         std::span<const int> hypothesis,
                         const Mask* hypothesis_mask, Mode mode) {
  if (premise.empty() || hypothesis.empty()) {
    throw DataError("forward needs non-empty premise and hypothesis");
  }
  Tensor weighted_premise = encode(premise, premise_mask, mode);
  Tensor weighted_hypothesis = encode(hypothesis, hypothesis_mask, mode);
  InterAttentionResult aligned = inter_attention(
      weighted_premise, weighted_hypothesis, premise_mask, hypothesis_mask);
  Tensor fused_premise = fuse(aligned.premise, weighted_premise);
  Tensor fused_hypothesis = fuse(aligned.hypothesis, weighted_hypothesis);
  fused_premise = site_dropout(fused_premise, DropSite::inter_attention, mode);
  fused_hypothesis = site_dropout(fused_hypothesis, DropSite::inter_attention, mode);
  Tensor relation = relation_vector(fused_premise, fused_hypothesis,
                                    premise_mask, hypothesis_mask);
  relation = site_dropout(relation, DropSite::mlp, mode);
  Tensor hidden = dropnet::tanh(dense(relation, mlp_hidden_w_, mlp_hidden_b_));
  hidden = site_dropout(hidden, DropSite::mlp, mode);
  Tensor logits = dense(hidden, mlp_output_w_, mlp_output_b_);
  return softmax(logits, 0);
}

void NliModel::zero_grads() {
  for (NamedParam& p : params_) p.value.zero_grad();
}

void NliModel::discard_pad_gradient() {
  auto grad = embeddings_.table.grad();
  const int dim = embeddings_.dim();
  const std::size_t row =
      static_cast<std::size_t>(embeddings_.pad_index) * static_cast<std::size_t>(dim);
  for (int c = 0; c < dim; ++c) grad[row + static_cast<std::size_t>(c)] = 0.0;
}

void NliModel::reseed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

}  // namespace dropnet
