#pragma once

#include <cstdint>
#include <random>

namespace fractal {

// Seeded stream of doubles that is bit-identical across standard libraries.
// std::uniform_real_distribution is implementation-defined, so the mapping
// from engine output to [0, 1) is done here.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random mantissa bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform integer in [0, n). Modulo bias is irrelevant at the sizes used.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fractal

namespace fractal {

// splitmix64 finaliser; derives independent sub-seeds from one user seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fractal
