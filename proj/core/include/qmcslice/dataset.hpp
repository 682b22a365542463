#pragma once

#include <cstdint>
#include <string>

#include "qmcslice/types.hpp"

namespace qmcslice {

// CSV: one point per row, comma separated. A first row that does not parse as
// numbers is treated as a header and skipped.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const Matrix& m, const std::string& path);
// One value per line (a single-column CSV).
Vector read_vector(const std::string& path);
void write_vector(const Vector& v, const std::string& path);

// Mixture of `clusters` isotropic Gaussians with centers ~ N(0, I) and
// component standard deviation `spread`.
Matrix gaussian_blobs(int n, int d, std::uint64_t seed, int clusters = 8, double spread = 0.3);
Matrix uniform_cube(int n, int d, std::uint64_t seed);

}  // namespace qmcslice
