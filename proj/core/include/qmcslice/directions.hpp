#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmcslice/error.hpp"
#include "qmcslice/types.hpp"

namespace qmcslice {

enum class Generator { IID, SobolSphere, Orthogonal, Distance, SphericalDesign, File };

const char* to_string(Generator g) noexcept;
Generator parse_generator(const std::string& name);

struct DirectionSet {
  Matrix vectors;  // P x d, unit rows
  Generator generator = Generator::IID;
  std::optional<std::uint64_t> seed;

  int P() const noexcept { return static_cast<int>(vectors.rows()); }
  int d() const noexcept { return static_cast<int>(vectors.cols()); }
  // Throws unless P >= 1, d >= 2 and every row has unit norm within tol.
  void validate(double tol = 1e-12) const;
};

DirectionSet iid_uniform(int P, int d, std::uint64_t seed);
// Sobol points (index 0 skipped, points with a zero coordinate or zero Gaussian
// image skipped) mapped through the inverse normal CDF and normalized.
// With a seed the Sobol points get a digital shift.
DirectionSet sobol_sphere(int P, int d, std::optional<std::uint64_t> seed = std::nullopt);
DirectionSet orthogonal(int P, int d, std::uint64_t seed);

// -2 sum_{p,q} (||xi_p - xi_q|| + ||xi_p + xi_q||), diagonal included.
double energy_sym(const DirectionSet& dirs);
// -sum_{p != q} ||xi_p - xi_q||^s, s in (0, 2).
double energy_riesz(const DirectionSet& dirs, double exponent);

struct EnergyOptConfig {
  int steps = 0;  // 0: 10 * d * P
  double step_size = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double pair_clamp = 1e-12;
  // Optional geometric decay of the step size to final_step_fraction * step_size.
  double final_step_fraction = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  int resolved_steps(int P, int d) const;
};

struct OptimizationTrace {
  std::vector<double> best_energy;  // best-so-far E_sym after each step
};

// Thrown by distance_design; carries the best finite iterate.
class OptimizationDiverged : public Error {
 public:
  OptimizationDiverged(const std::string& what, DirectionSet last)
      : Error(ErrorKind::Diverged, what), last_(std::move(last)) {}
  const DirectionSet& last_finite() const noexcept { return last_; }

 private:
  DirectionSet last_;
};

// Adam on E_sym with per-step renormalization; returns the best iterate.
DirectionSet distance_design(int P, int d, const EnergyOptConfig& cfg, OptimizationTrace* trace = nullptr);

// Text format: "d P" header, then P rows of d numbers. Headerless files infer d
// from the first row.
DirectionSet load_directions(const std::string& path);
void save_directions(const DirectionSet& dirs, const std::string& path);

// Haar-distributed orthogonal matrix (sign-corrected QR of a Gaussian matrix).
Matrix random_orthogonal(int d, std::uint64_t seed);
// Applies xi -> A xi with A = random_orthogonal(d, seed).
DirectionSet randomize(const DirectionSet& dirs, std::uint64_t seed);

}  // namespace qmcslice
