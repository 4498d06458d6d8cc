#pragma once

#include <filesystem>
#include <string>

#include "dropnet/gradcheck.hpp"
#include "dropnet/grid.hpp"
#include "dropnet/run_config.hpp"

namespace dropnet {

struct TrainOutcome {
  int best_epoch = -1;
  double best_val_acc = 0.0;
  double test_acc = 0.0;
  double test_loss = 0.0;
  bool test_is_validation = false;  // no test_path given
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
  std::filesystem::path summary_path;
};

// Loads the corpora, builds vocabulary and embeddings, trains, then writes
// metrics.csv, summary.json and checkpoint.dnet under config.out_dir.
TrainOutcome run_train(const RunConfig& config);

struct EvalOutcome {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

EvalOutcome run_eval(const std::filesystem::path& checkpoint_path,
                     const std::filesystem::path& data_path, CorpusFormat format);

// Grid over preset placements and rates; writes grid.csv plus per-cell
// metrics under config.out_dir.
GridResult run_grid(const RunConfig& config, const GridSpec& spec);

}  // namespace dropnet
