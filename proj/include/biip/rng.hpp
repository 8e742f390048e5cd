#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace biip {

// Deterministic random draws. std::mt19937_64 is fully specified by the
// standard, but the <random> distributions are not, so the few draws we need
// are hand-rolled to keep generated datasets bit-reproducible across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n), n >= 1, by rejection sampling.
  std::uint64_t uniform_int(std::uint64_t n);

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; pairs are cached.
  double normal();

  // First k entries of a Fisher-Yates shuffle of {0, ..., n-1}, ascending
  // order not guaranteed.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace biip
