#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dropnet/train.hpp"

namespace dropnet {

struct GridSpec {
  std::vector<int> model_ids;  // rows, preset placement ids
  std::vector<double> rates;   // columns
  int parallel = 1;            // worker threads over cells
};

struct GridCell {
  int model_id = 0;
  double rate = 0.0;
  bool ok = false;
  double best_val_acc = 0.0;
  std::string error;
};

struct GridResult {
  std::vector<int> model_ids;
  std::vector<double> rates;
  // cells[row][col]; the baseline (model 1) runs once and its single result
  // is repeated across the rate columns.
  std::vector<std::vector<GridCell>> cells;
};

// One independent train-and-evaluate run per (placement, rate) cell. Every
// cell derives its seed from its identity, so results do not depend on the
// execution order or on the parallel worker count. Cells that abort are
// recorded as failed; the rest proceed. Per-cell metrics land in
// out_dir/cell_model<id>_dr<rate>/metrics.csv.
GridResult grid_search(const ModelConfig& base_model, const TrainConfig& base_train,
                       const std::vector<Example>& train_data,
                       const std::vector<Example>& val_data, const Vocabulary& vocab,
                       const EmbeddingTable* pretrained, const GridSpec& spec,
                       const std::filesystem::path& out_dir);

std::string format_rate(double rate);
void write_grid_csv(const std::filesystem::path& path, const GridResult& result);

}  // namespace dropnet
