#include "qmcslice/periodize.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qmcslice/error.hpp"
#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {
constexpr int kOrder = 4;  // matched derivatives 0..kOrder at each end
}

std::vector<double> sliced_derivatives(const KernelSpec& k, double t) {
  require(t > 0.0, ErrorKind::Domain, "derivatives need t > 0");
  std::vector<double> out(kOrder + 1);
  const int d = k.dim();
  if (k.family() == KernelFamily::ThinPlate) {
    const double c = thin_plate_constant(d);
    const double lt = std::log(t);
    out[0] = d * t * t * lt + c * t * t;
    out[1] = 2.0 * d * t * lt + d * t + 2.0 * c * t;
    out[2] = 2.0 * d * lt + 3.0 * d + 2.0 * c;
    out[3] = 2.0 * d / t;
    out[4] = -2.0 * d / (t * t);
    return out;
  }
  if (k.family() == KernelFamily::Riesz) {
    const double r = k.r();
    double coef = -riesz_constant(d, r);
    for (int j = 0; j <= kOrder; ++j) {
      out[j] = coef * std::pow(t, r - j);
      coef *= (r - j);
    }
    return out;
  }
  fail(ErrorKind::Capability, "numeric periodization is only provided for thin-plate and Riesz kernels");
}

std::vector<Complex> periodized_coefficients(const KernelSpec& k, double tau, double threshold, int n_ft,
                                             int oversample) {
  require(k.family() == KernelFamily::ThinPlate || k.family() == KernelFamily::Riesz, ErrorKind::Capability,
          "numeric periodization is only provided for thin-plate and Riesz kernels");
  require(tau > 0.0 && threshold > 0.0 && threshold < 0.5, ErrorKind::Parameter,
          "periodization needs tau > 0 and T in (0, 1/2)");
  require(n_ft >= 2 && n_ft % 2 == 0 && oversample >= 2, ErrorKind::Parameter, "invalid periodization grid");
  if (k.family() == KernelFamily::Riesz)
    require(k.r() > 0.0, ErrorKind::Capability, "numeric periodization needs a Riesz exponent r > 0");

  // h(s) = f(s / tau); derivatives in s at s = T.
  const double T = threshold;
  const auto df = sliced_derivatives(k, T / tau);
  std::vector<double> dh(kOrder + 1);
  for (int j = 0; j <= kOrder; ++j) dh[j] = df[j] / std::pow(tau, j);

  // Bridge polynomial in u = (s - T) / (1 - 2T) on [0, 1]; the right end mirrors
  // the left end (even periodic extension), so odd derivatives flip sign.
  const double len = 1.0 - 2.0 * T;
  constexpr int deg = 2 * kOrder + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(deg + 1, deg + 1);
  Eigen::VectorXd rhs(deg + 1);
  for (int j = 0; j <= kOrder; ++j) {
    const double scale = std::pow(len, j);
    // j-th derivative of u^i at u = 0 and u = 1
    for (int i = j; i <= deg; ++i) {
      double fall = 1.0;
      for (int q = 0; q < j; ++q) fall *= (i - q);
      if (i == j) A(j, i) = fall;
      A(kOrder + 1 + j, i) = fall;
    }
    rhs(j) = dh[j] * scale;
    rhs(kOrder + 1 + j) = (j % 2 == 0 ? 1.0 : -1.0) * dh[j] * scale;
  }
  const Eigen::VectorXd poly = A.fullPivLu().solve(rhs);

  const int L = oversample * n_ft;
  std::vector<double> samples(L);
  for (int j = 0; j < L; ++j) {
    double s = static_cast<double>(j) / L;  // [0, 1)
    double v;
    if (s <= T || s >= 1.0 - T) {
      const double a = s <= T ? s : 1.0 - s;
      v = a == 0.0 ? eval_f(k, 0.0) : eval_f(k, a / tau);
    } else {
      const double u = (s - T) / len;
      v = 0.0;
      for (int i = deg; i >= 0; --i) v = v * u + poly(i);
    }
    samples[j] = v;
  }
  std::vector<Complex> coeffs(n_ft);
  for (int i = 0; i < n_ft; ++i) {
    const int kk = i - n_ft / 2;
    CompensatedSum acc;
    for (int j = 0; j < L; ++j) {
      const long long ph = (static_cast<long long>(kk) * j) % L;
      acc.add(samples[j] * std::cos(2.0 * kPi * static_cast<double>(ph) / L));
    }
    coeffs[i] = Complex(acc.value() / L, 0.0);
  }
  return coeffs;
}

}  // namespace qmcslice
