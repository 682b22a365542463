#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qmcslice/rng.hpp"
#include "qmcslice/types.hpp"

namespace qmcslice {

enum class KernelFamily { Gauss, Laplace, Matern, Riesz, ThinPlate };

const char* to_string(KernelFamily family) noexcept;
KernelFamily parse_family(const std::string& name);

struct KernelParams {
  std::optional<double> sigma;  // Gauss
  std::optional<double> alpha;  // Laplace
  std::optional<double> beta;   // Matern scale
  std::optional<double> nu;     // Matern smoothness
  std::optional<double> r;      // Riesz exponent
};

// Immutable kernel description; the constructor validates that exactly the
// parameters of the family are set.
class KernelSpec {
 public:
  KernelSpec(KernelFamily family, KernelParams params, int dim);

  static KernelSpec gauss(double sigma, int dim);
  static KernelSpec laplace(double alpha, int dim);
  static KernelSpec matern(double nu, double beta, int dim);
  static KernelSpec riesz(double r, int dim);
  static KernelSpec thin_plate(int dim);
  // Family with its length scale m set to `scale` (sigma = m, beta = m, alpha = 1/m).
  static KernelSpec from_scale(KernelFamily family, double scale, int dim, double nu = 1.5, double r = 1.0);

  KernelFamily family() const noexcept { return family_; }
  const KernelParams& params() const noexcept { return params_; }
  int dim() const noexcept { return dim_; }

  double sigma() const;
  double alpha() const;
  double beta() const;
  double nu() const;
  double r() const;

  bool positive_definite() const noexcept;
  // sigma, beta or 1/alpha for the positive definite families.
  double length_scale() const;
  // Kernel with all length scales multiplied by tau (alpha divided by tau).
  KernelSpec rescaled(double tau) const;
  KernelSpec with_dim(int dim) const;

  std::string describe() const;

 private:
  KernelFamily family_;
  KernelParams params_;
  int dim_;
};

// Radial profile F with K(x, y) = F(||x - y||).
double eval_F(const KernelSpec& kernel, double t);
// Sliced profile f with E_xi f(|<xi, x>|) = F(||x||).
double eval_f(const KernelSpec& kernel, double t);
// Density of the 1D inverse Fourier transform of f(|.|), convention e^{-2 pi i w x}.
double spectral_density_1d(const KernelSpec& kernel, double omega);

// Evaluation paths of eval_f, exposed for testing.
enum class SlicedPath { Auto, Series, Quadrature };
double eval_f_with(const KernelSpec& kernel, double t, SlicedPath path);

// Constant C_d of the sliced thin-plate spline.
double thin_plate_constant(int dim);
// sqrt(pi) Gamma((d+r)/2) / (Gamma(d/2) Gamma((r+1)/2)); f = -riesz_constant * t^r.
double riesz_constant(int dim, double r);

struct ScaleRule {
  double gamma = 1.0;
  std::size_t sample_size = 1000;
};

// gamma times the median of ||x - y|| over random pairs. Inputs are put in a
// canonical (lexicographic) order before sampling, so the result does not
// depend on row order. If sample_size covers all pairs they are used exhaustively.
double median_rule(const Matrix& a, const Matrix& b, const ScaleRule& rule, std::uint64_t seed);
// gamma times the median of the row norms.
double median_norm(const Matrix& a, double gamma = 1.0);

// Draws t = <xi, e>/||e|| for xi uniform on S^{d-1}: density proportional to (1 - t^2)^{(d-3)/2}.
double sample_projection(Rng& rng, int dim);

}  // namespace qmcslice
