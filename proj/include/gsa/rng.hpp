#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gsa {

// Seed for any stochastic component. Same seed, same build -> same stream.
struct Seed {
  std::uint64_t value = 0;
};

// splitmix64 step; used to derive independent substream seeds from one root.
std::uint64_t splitmix64(std::uint64_t& state);

// Convenience: hash (root, tag) into a substream seed.
Seed derive_seed(Seed root, std::uint64_t tag);

// Uniform/normal/gamma draws built from explicit transforms over mt19937_64.
// std::uniform_real_distribution and friends are implementation-defined, so
// every transform is spelled out here to keep streams reproducible.
class RandomSource {
 public:
  explicit RandomSource(Seed seed) : engine_(seed.value), root_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer on [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();

  // Gamma(shape, rate) via Marsaglia-Tsang squeeze.
  double gamma(double shape, double rate);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent substream keyed by (constructor seed, tag).
  RandomSource split(std::uint64_t tag) const {
    return RandomSource(derive_seed(root_, tag));
  }

 private:
  std::mt19937_64 engine_;
  Seed root_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gsa
