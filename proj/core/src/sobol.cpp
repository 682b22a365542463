#include "qmcslice/sobol.hpp"

#include <bit>

#include "qmcslice/error.hpp"
#include "qmcslice/rng.hpp"

namespace qmcslice {

namespace {
#include "sobol_direction_numbers.inc"

constexpr int kBits = 32;
constexpr int kTableDim = static_cast<int>(sizeof(kSobolPoly) / sizeof(kSobolPoly[0]));
}  // namespace

int SobolEngine::max_dim() noexcept { return kTableDim; }

SobolEngine::SobolEngine(int dim, std::optional<std::uint64_t> shift_seed)
    : dim_(dim), v_(static_cast<std::size_t>(dim) * kBits), state_(dim, 0u), shift_(dim, 0u) {
  require(dim >= 1, ErrorKind::Parameter, "Sobol dimension must be >= 1");
  require(dim <= kTableDim, ErrorKind::Capability,
          "Sobol dimension " + std::to_string(dim) + " exceeds the direction-number table (" +
              std::to_string(kTableDim) + ")");
  for (int d = 0; d < dim; ++d) {
    std::uint32_t* v = &v_[static_cast<std::size_t>(d) * kBits];
    if (d == 0) {
      for (int j = 0; j < kBits; ++j) v[j] = 1u;
    } else {
      const std::uint32_t p = kSobolPoly[d];
      const int m = std::bit_width(p) - 1;
      for (int j = 0; j < m; ++j) v[j] = kSobolInit[d][j];
      for (int j = m; j < kBits; ++j) {
        std::uint32_t nv = v[j - m];
        std::uint32_t pow2 = 1u;
        for (int k = 0; k < m; ++k) {
          pow2 <<= 1;
          if ((p >> (m - 1 - k)) & 1u) nv ^= pow2 * v[j - k - 1];
        }
        v[j] = nv;
      }
    }
    for (int j = 0; j < kBits; ++j) v[j] <<= (kBits - 1 - j);
  }
  if (shift_seed) {
    Rng rng(*shift_seed, 0x736f626f6cULL);
    for (auto& s : shift_) s = rng.next_u32();
  }
  state_ = shift_;
}

void SobolEngine::next(double* out) {
  constexpr double scale = 0x1.0p-32;
  for (int d = 0; d < dim_; ++d) out[d] = static_cast<double>(state_[d]) * scale;
  const int c = std::countr_one(index_);  // lowest zero bit of the index
  require(c < kBits, ErrorKind::Capability, "Sobol sequence exhausted");
  for (int d = 0; d < dim_; ++d) state_[d] ^= v_[static_cast<std::size_t>(d) * kBits + c];
  ++index_;
}

}  // namespace qmcslice
