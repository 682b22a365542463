#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace qmcslice {

// Gray-code Sobol generator (Joe-Kuo direction numbers, 32 bits) in [0,1)^d.
// Index 0 is the all-zero point. An optional digital XOR shift is derived from `shift_seed`.
class SobolEngine {
 public:
  static int max_dim() noexcept;

  explicit SobolEngine(int dim, std::optional<std::uint64_t> shift_seed = std::nullopt);

  int dim() const noexcept { return dim_; }
  std::uint64_t index() const noexcept { return index_; }
  // Writes the point with the current index into `out` (length dim) and advances.
  void next(double* out);
  // Raw 32-bit integer coordinates of the current point.
  const std::vector<std::uint32_t>& state() const noexcept { return state_; }

 private:
  int dim_;
  std::vector<std::uint32_t> v_;  // dim x 32, row-major
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  std::uint64_t index_ = 0;
};

}  // namespace qmcslice
