#include "dropnet/rng.hpp"

#include <bit>

namespace dropnet {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull + b;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t cell_seed(std::uint64_t base, int model_id, double rate) {
  std::uint64_t with_model = mix_seed(base, static_cast<std::uint64_t>(model_id));
  return mix_seed(with_model, std::bit_cast<std::uint64_t>(rate));
}

}  // namespace dropnet
