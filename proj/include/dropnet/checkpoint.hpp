#pragma once

#include <filesystem>

#include "dropnet/data.hpp"
#include "dropnet/model.hpp"

namespace dropnet {

// Single-file checkpoint: a plain-text header (version tag, model config,
// vocabulary, per-tensor name/shape manifest) followed by the raw parameter
// buffers as 64-bit little-endian values in manifest order. Round trips are
// bit-exact. The exact layout is documented in the README.
void save_checkpoint(const std::filesystem::path& path, const NliModel& model,
                     const Vocabulary& vocab);

struct LoadedCheckpoint {
  NliModel model;
  Vocabulary vocab;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dropnet
