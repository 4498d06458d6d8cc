#include "dropnet/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dropnet/error.hpp"
#include "dropnet/ops.hpp"

namespace dropnet {

namespace {

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  return best;
}

}  // namespace

void adam_update(std::span<double> values, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long t,
                 const AdamConfig& config) {
  const double m_correction = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double v_correction = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grads[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double m_hat = m[i] / m_correction;
    const double v_hat = v[i] / v_correction;
    values[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void Adam::step(std::vector<NamedParam>& params) {
  if (moments_.empty()) {
    moments_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::size_t n = static_cast<std::size_t>(params[i].value.size());
      moments_[i].m.assign(n, 0.0);
      moments_[i].v.assign(n, 0.0);
    }
  }
  if (moments_.size() != params.size()) {
    throw ContractError("parameter list changed between optimiser steps");
  }
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].value.requires_grad()) continue;
    adam_update(params[i].value.values(), params[i].value.grad(), moments_[i].m,
                moments_[i].v, t_, config_);
  }
}

Tensor l2_penalty(const std::vector<NamedParam>& params, double lambda) {
  if (lambda < 0.0) throw ConfigError("l2_lambda must be >= 0");
  Tensor total;
  for (const NamedParam& param : params) {
    if (!param.decay || !param.value.requires_grad()) continue;
    Tensor squared = sum(mul(param.value, param.value));
    total = total.defined() ? add(total, squared) : squared;
  }
  if (!total.defined()) return Tensor::scalar(0.0);
  return scale(total, lambda);
}

bool EarlyStopping::observe(double value) {
  ++count_;
  if (value > best_) {
    best_ = value;
    best_index_ = count_;
    failures_ = 0;
    return false;
  }
  ++failures_;
  return failures_ >= patience_;
}

EvalResult evaluate(NliModel& model, const std::vector<Example>& data,
                    const Vocabulary& vocab) {
  if (data.empty()) throw ContractError("evaluate needs a non-empty dataset");
  EvalResult result;
  double loss_total = 0.0;
  int correct = 0;
  for (const Example& example : data) {
    std::vector<int> premise(example.premise.size());
    std::vector<int> hypothesis(example.hypothesis.size());
    for (std::size_t i = 0; i < premise.size(); ++i) {
      premise[i] = vocab.lookup(example.premise[i]);
    }
    for (std::size_t i = 0; i < hypothesis.size(); ++i) {
      hypothesis[i] = vocab.lookup(example.hypothesis[i]);
    }
    Tensor probs = model.forward(premise, hypothesis, Mode::eval);
    loss_total += cross_entropy(probs, example.label).scalar_value();
    if (argmax_lowest(probs.values()) == example.label) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  result.mean_loss = loss_total / static_cast<double>(data.size());
  return result;
}

TrainReport train(NliModel& model, const std::vector<Example>& train_data,
                  const std::vector<Example>& val_data, const Vocabulary& vocab,
                  const TrainConfig& config) {
  if (train_data.empty() || val_data.empty()) {
    throw ContractError("train needs non-empty train and validation splits");
  }
  Adam optimizer(AdamConfig{.learning_rate = config.learning_rate});
  EarlyStopping stopper(config.patience);
  TrainReport report;

  std::vector<Tensor> best_snapshot;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_started = std::chrono::steady_clock::now();
    const std::vector<Batch> batches =
        batchify(train_data, vocab, config.batch_size,
                 mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));

    double loss_sum = 0.0;
    int correct = 0;
    int seen = 0;
    for (std::size_t batch_index = 0; batch_index < batches.size(); ++batch_index) {
      const Batch& batch = batches[batch_index];
      Tape tape;
      Tensor batch_loss;
      for (int i = 0; i < batch.size(); ++i) {
        Tensor probs = model.forward(
            batch.premise[static_cast<std::size_t>(i)],
            &batch.premise_mask[static_cast<std::size_t>(i)],
            batch.hypothesis[static_cast<std::size_t>(i)],
            &batch.hypothesis_mask[static_cast<std::size_t>(i)], Mode::train);
        Tensor loss = cross_entropy(probs, batch.labels[static_cast<std::size_t>(i)]);
        batch_loss = batch_loss.defined() ? add(batch_loss, loss) : loss;
        if (argmax_lowest(probs.values()) == batch.labels[static_cast<std::size_t>(i)]) {
          ++correct;
        }
      }
      batch_loss = scale(batch_loss, 1.0 / batch.size());
      const double data_loss = batch_loss.scalar_value();
      if (config.l2_lambda > 0.0) {
        batch_loss = add(batch_loss, l2_penalty(model.parameters(), config.l2_lambda));
      }
      const double total_loss = batch_loss.scalar_value();
      if (!std::isfinite(total_loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index));
      }
      model.zero_grads();
      tape.backward(batch_loss);
      model.discard_pad_gradient();
      optimizer.step(model.parameters());

      loss_sum += data_loss * batch.size();
      seen += batch.size();
    }

    const EvalResult val = evaluate(model, val_data, vocab);
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = loss_sum / seen;
    metrics.train_acc = static_cast<double>(correct) / seen;
    metrics.val_loss = val.mean_loss;
    metrics.val_acc = val.accuracy;
    metrics.seconds =
        config.wall_clock
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            epoch_started)
                  .count()
            : 0.0;
    report.epochs.push_back(metrics);

    const bool stop = stopper.observe(val.accuracy);
    if (stopper.improved_last()) {
      best_snapshot.clear();
      for (const NamedParam& param : model.parameters()) {
        best_snapshot.push_back(param.value.clone());
      }
      report.best_epoch = epoch;
      report.best_val_acc = val.accuracy;
    }
    if (stop) break;
  }

  if (!best_snapshot.empty()) {
    auto& params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto dst = params[i].value.values();
      auto src = best_snapshot[i].values();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[j];
    }
  }
  return report;
}

std::string metrics_csv_header() {
  return "epoch,train_loss,train_acc,val_loss,val_acc,seconds";
}

std::string metrics_csv_row(const EpochMetrics& row) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "%d,%.6f,%.6f,%.6f,%.6f,%.3f", row.epoch,
                row.train_loss, row.train_acc, row.val_loss, row.val_acc,
                row.seconds);
  return buffer;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochMetrics>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics file " + path.string());
  out << metrics_csv_header() << '\n';
  for (const EpochMetrics& row : rows) out << metrics_csv_row(row) << '\n';
}

}  // namespace dropnet
