#pragma once

#include <cstdint>

namespace qmcslice {

// Counter-based SplitMix64. The i-th output of stream (seed, stream) is
// mix64(key + i * 0x9E3779B97F4A7C15) with key = mix64(seed ^ mix64(stream + C)),
// so sequences are identical on every platform and streams are independent
// of call order elsewhere in the program.
std::uint64_t mix64(std::uint64_t z) noexcept;

// Combines a seed with tags into a new seed (used for per-rep / per-cell streams).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  std::uint32_t next_u32() noexcept { return static_cast<std::uint32_t>(next_u64() >> 32); }
  // 53-bit uniform in [0, 1).
  double uniform() noexcept;
  // Uniform in (0, 1).
  double uniform_open() noexcept;
  // Uniform integer in [0, n), n > 0 (Lemire rejection).
  std::uint64_t below(std::uint64_t n) noexcept;
  // Standard normal via Box-Muller (pairs are cached).
  double normal() noexcept;
  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }
  // Beta(a, a).
  double beta_symmetric(double a);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qmcslice
