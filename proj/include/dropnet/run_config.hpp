#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dropnet/data.hpp"
#include "dropnet/model.hpp"
#include "dropnet/train.hpp"

namespace dropnet {

// Everything a run needs, parsed from a flat `key = value` file ('#' starts
// a comment) with optional `key=value` overrides applied afterwards and the
// DROPNET_SEED environment variable applied last.
struct RunConfig {
  std::string train_path;
  std::string val_path;
  std::string test_path;        // optional; validation reused when empty
  std::string embeddings_path;  // optional pretrained vectors
  CorpusFormat format = CorpusFormat::jsonl;
  int min_count = 1;

  int embedding_dim = 300;
  int hidden_units = 100;
  int num_classes = 0;  // 0 = derive from the data
  PlacementSet placement;
  double drop_rate = 0.0;
  bool inverted_dropout = false;
  bool trainable_embeddings = true;

  double l2_lambda = 0.0;
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.001;
  int patience = 5;
  std::uint64_t seed = 1;

  std::string out_dir = "out";
  bool wall_clock = true;  // metrics_timing = wall | none

  ModelConfig model_config() const;
  TrainConfig train_config() const;
};

// Parses the file and applies overrides, validating every key against the
// schema; unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {});

// Same validation over an in-memory map (used by the bindings).
RunConfig run_config_from_map(const std::map<std::string, std::string>& values);

// One line per schema key with type, default and description. Generated from
// the same table the parser uses, so help and schema cannot drift.
std::string config_help();

std::vector<std::string> config_keys();

}  // namespace dropnet
