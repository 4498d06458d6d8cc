#include "dropnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dropnet/ops.hpp"
#include "dropnet/train.hpp"

namespace dropnet {

namespace {

constexpr double kStep = 1e-5;
constexpr double kDenomFloor = 1e-4;
constexpr double kLambda = 1e-3;
constexpr std::uint64_t kFrozenMaskSeed = 77;

struct FixtureExample {
  std::vector<int> premise;
  Mask premise_mask;
  std::vector<int> hypothesis;
  Mask hypothesis_mask;
  int label;
};

// Two short examples with tail padding, as a batch would produce them.
std::vector<FixtureExample> fixture_batch() {
  return {
      {{2, 3, 4}, {1, 1, 1}, {5, 6, 0}, {1, 1, 0}, 0},
      {{7, 8, 0}, {1, 1, 0}, {9, 2, 3}, {1, 1, 1}, 2},
  };
}

// Forward-only loss evaluation for the finite-difference side. Reseeding the
// dropout stream before every call freezes the train-mode masks.
double model_loss(NliModel& model, const std::vector<FixtureExample>& batch,
                  Mode mode) {
  model.reseed_dropout(kFrozenMaskSeed);
  Tensor total;
  for (const FixtureExample& example : batch) {
    Tensor probs = model.forward(example.premise, &example.premise_mask,
                                 example.hypothesis, &example.hypothesis_mask,
                                 mode);
    Tensor loss = cross_entropy(probs, example.label);
    total = total.defined() ? add(total, loss) : loss;
  }
  double penalty = 0.0;
  for (const NamedParam& param : model.parameters()) {
    if (!param.decay || !param.value.requires_grad()) continue;
    for (double v : param.value.values()) penalty += v * v;
  }
  return total.scalar_value() / static_cast<double>(batch.size()) +
         kLambda * penalty;
}

void check_mode(NliModel& model, Mode mode, GradcheckReport& report) {
  const std::vector<FixtureExample> batch = fixture_batch();

  model.zero_grads();
  {
    Tape tape;
    Tensor total;
    model.reseed_dropout(kFrozenMaskSeed);
    for (const FixtureExample& example : batch) {
      Tensor probs = model.forward(example.premise, &example.premise_mask,
                                   example.hypothesis, &example.hypothesis_mask,
                                   mode);
      Tensor loss = cross_entropy(probs, example.label);
      total = total.defined() ? add(total, loss) : loss;
    }
    total = scale(total, 1.0 / static_cast<double>(batch.size()));
    total = add(total, l2_penalty(model.parameters(), kLambda));
    tape.backward(total);
  }
  model.discard_pad_gradient();

  for (NamedParam& param : model.parameters()) {
    double group_worst = 0.0;
    auto values = param.value.values();
    auto grads = param.value.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + kStep;
      const double above = model_loss(model, batch, mode);
      values[i] = saved - kStep;
      const double below = model_loss(model, batch, mode);
      values[i] = saved;
      const double numeric = (above - below) / (2.0 * kStep);
      const double analytic = grads[i];
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric),
                                     kDenomFloor});
      group_worst = std::max(group_worst, std::fabs(analytic - numeric) / denom);
    }
    const std::string label =
        param.name + (mode == Mode::train ? " (train)" : " (eval)");
    report.groups.push_back({label, group_worst});
    report.worst = std::max(report.worst, group_worst);
  }
}

}  // namespace

GradcheckReport gradcheck_small_model() {
  ModelConfig config;
  config.embedding_dim = 8;
  config.hidden_units = 4;
  config.num_classes = 3;
  config.placement = placement_for_model(12);  // every site active
  config.drop_rate = 0.4;
  config.seed = 11;

  GradcheckReport report;
  NliModel model(config, /*vocab_size=*/10);
  check_mode(model, Mode::eval, report);
  check_mode(model, Mode::train, report);
  return report;
}

}  // namespace dropnet
