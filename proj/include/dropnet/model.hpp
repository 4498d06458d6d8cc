#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dropnet/layers.hpp"
#include "dropnet/tensor.hpp"

namespace dropnet {

// Layer outputs that can receive dropout.
enum class DropSite {
  embedding,
  recurrent,
  intra_attention,
  inter_attention,
  mlp,
};

inline constexpr int kDropSiteCount = 5;
const char* site_name(DropSite site);

class PlacementSet {
 public:
  PlacementSet() = default;

  PlacementSet& add(DropSite site);
  bool contains(DropSite site) const;
  bool empty() const { return bits_ == 0; }

  // "embedding,recurrent"; "none" when empty
  std::string to_string() const;
  // Accepts a comma list of site names, "none"/"" for the empty set, or
  // "model_<k>" for one of the thirteen preset rows.
  static PlacementSet parse(const std::string& text);

  bool operator==(const PlacementSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

// The thirteen preset placements, id 1 (no dropout) through 13.
PlacementSet placement_for_model(int model_id);

struct ModelConfig {
  int embedding_dim = 300;
  int hidden_units = 100;
  int num_classes = 3;
  PlacementSet placement;
  double drop_rate = 0.0;
  bool inverted_dropout = false;
  bool trainable_embeddings = true;
  std::uint64_t seed = 1;
};

struct IntraAttentionParams {
  Tensor w_seq;    // [2h,2h], projects the encoded sequence
  Tensor w_avg;    // [2h,2h], projects the averaged encoding
  Tensor w_score;  // [2h], scores each position
};

struct IntraAttentionResult {
  Tensor weights;   // [L], probability over valid positions
  Tensor weighted;  // [2h,L], column t = weights[t] * input column t
};

// Position importance from the sequence's own content: each column is scored
// against a projection of the sequence and its masked average, normalised
// over valid positions, then used to rescale the columns. Masked columns of
// the weighted output are exactly zero.
IntraAttentionResult intra_attention(const Tensor& encoded, const Mask* mask,
                                     const IntraAttentionParams& params);

struct InterAttentionResult {
  Tensor premise;     // [2h,Lp], premise positions re-expressed from the hypothesis
  Tensor hypothesis;  // [2h,Lh], and vice versa
};

// Soft alignment between the two sentences. Column i of `premise` is the
// convex combination of valid hypothesis columns weighted by the i-th row of
// the interaction matrix (softmax over hypothesis positions); `hypothesis`
// mirrors this over premise positions.
InterAttentionResult inter_attention(const Tensor& premise, const Tensor& hypothesis,
                                     const Mask* premise_mask, const Mask* hypothesis_mask);

// Elementwise product of the aligned and the attention-weighted encodings.
Tensor fuse(const Tensor& aligned, const Tensor& weighted);

// [avg(Fp); max(Fp); avg(Fh); max(Fh)] pooled over valid positions -> [8h].
Tensor relation_vector(const Tensor& fused_premise, const Tensor& fused_hypothesis,
                       const Mask* premise_mask, const Mask* hypothesis_mask);

struct NamedParam {
  std::string name;
  Tensor value;
  bool decay;  // participates in the L2 penalty
};

// Sentence-pair classifier: shared BiLSTM encoder with intra-attention for
// both sentences, soft alignment between them, pooled relation vector, then
// a one-hidden-layer MLP with a class softmax. Dropout is routed to the
// sites named by config.placement.
class NliModel {
 public:
  NliModel(ModelConfig config, int vocab_size);
  NliModel(ModelConfig config, EmbeddingTable embeddings);

  // Class probabilities, summing to 1. Masks are optional; empty spans of
  // tokens are rejected.
  Tensor forward(std::span<const int> premise, std::span<const int> hypothesis,
                 Mode mode);
  Tensor forward(std::span<const int> premise, const Mask* premise_mask,
                 std::span<const int> hypothesis, const Mask* hypothesis_mask,
                 Mode mode);

  std::vector<NamedParam>& parameters() { return params_; }
  const std::vector<NamedParam>& parameters() const { return params_; }

  const ModelConfig& config() const { return config_; }
  int vocab_size() const { return embeddings_.vocab_size(); }
  EmbeddingTable& embeddings() { return embeddings_; }

  void zero_grads();
  // The pad embedding never learns; call after backward, before stepping.
  void discard_pad_gradient();

  // Restarts the dropout mask stream; used to freeze masks for gradient
  // checks and to make training runs reproducible.
  void reseed_dropout(std::uint64_t seed);

 private:
  Tensor encode(std::span<const int> tokens, const Mask* mask, Mode mode);
  Tensor site_dropout(const Tensor& x, DropSite site, Mode mode);
  void register_params();

  ModelConfig config_;
  EmbeddingTable embeddings_;
  LSTMParams lstm_fwd_;
  LSTMParams lstm_bwd_;
  IntraAttentionParams intra_;
  Tensor mlp_hidden_w_, mlp_hidden_b_;
  Tensor mlp_output_w_, mlp_output_b_;
  Rng dropout_rng_;
  std::vector<NamedParam> params_;
};

}  // namespace dropnet
