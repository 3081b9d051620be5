#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace prefbasis {

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view data, uint64_t basis = 0xcbf29ce484222325ULL);

// Mixes a base seed with a named stream into an independent seed.
uint64_t DeriveSeed(uint64_t seed, std::string_view stream);
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

// Seeded generator whose draws are identical across standard libraries.
// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so every sampling path in the toolkit goes through this class instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, n). Requires n > 0.
  size_t UniformIndex(size_t n);

  // Uniform double in [0, 1).
  double UniformReal();

  bool Bernoulli(double p) { return UniformReal() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformIndex(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prefbasis
