#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dropnet {

// Deterministic random stream. Every draw goes through next_u64() so the
// produced sequences do not depend on standard-library distribution
// internals and stay reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53 bits of precision
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p_true) { return uniform() < p_true; }

  // uniform integer in [0, n)
  int below(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(below(i + 1))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64-style combiner for deriving independent sub-stream seeds
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Seed for one grid cell, derived from the cell's identity rather than its
// position in the execution order.
std::uint64_t cell_seed(std::uint64_t base, int model_id, double rate);

}  // namespace dropnet
