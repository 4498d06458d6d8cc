#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dropnet/data.hpp"
#include "dropnet/model.hpp"

namespace dropnet {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected update for a single buffer; t counts from 1.
void adam_update(std::span<double> values, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long t,
                 const AdamConfig& config);

// Optimiser over a parameter list. Moment buffers are zero-initialised and
// keyed by position, so the list must be stable across steps.
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  void step(std::vector<NamedParam>& params);
  long steps_taken() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  AdamConfig config_;
  std::vector<Moments> moments_;
  long t_ = 0;
};

// lambda * sum of squared entries over decaying parameters (weight matrices;
// biases and the embedding table are excluded). Recorded on the active tape.
Tensor l2_penalty(const std::vector<NamedParam>& params, double lambda);

// Stops when the tracked value fails to improve for `patience` consecutive
// observations. Improvement means strictly greater than the best so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when training should stop after this observation.
  bool observe(double value);
  bool improved_last() const { return failures_ == 0; }
  double best() const { return best_; }
  int best_index() const { return best_index_; }

 private:
  int patience_;
  double best_ = -1.0;
  int best_index_ = -1;
  int failures_ = 0;
  int count_ = 0;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.001;
  double l2_lambda = 0.0;
  int patience = 5;
  std::uint64_t seed = 1;
  bool wall_clock = true;  // when off, metrics report 0.000 seconds
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  int best_epoch = -1;       // 1-based epoch of the retained parameters
  double best_val_acc = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

// Deterministic eval-mode pass; argmax ties resolve to the lower class index.
EvalResult evaluate(NliModel& model, const std::vector<Example>& data,
                    const Vocabulary& vocab);

// Shuffles and iterates batches in train mode with one optimiser step per
// batch, evaluates on the validation split each epoch, retains the
// parameters of the best validation epoch (restored into the model before
// returning) and stops early on stalled validation accuracy. A non-finite
// loss aborts with the offending batch named.
TrainReport train(NliModel& model, const std::vector<Example>& train_data,
                  const std::vector<Example>& val_data, const Vocabulary& vocab,
                  const TrainConfig& config);

std::string metrics_csv_header();
std::string metrics_csv_row(const EpochMetrics& row);
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochMetrics>& rows);

}  // namespace dropnet
