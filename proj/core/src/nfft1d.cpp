#include "qmcslice/nfft1d.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "qmcslice/error.hpp"
#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_nodes(std::span<const double> nodes) {
  for (double x : nodes)
    require(x >= -0.5 && x < 0.5, ErrorKind::Domain, "NFFT node outside [-1/2, 1/2)");
}

int floor_div_grid(double v) { return static_cast<int>(std::floor(v)); }

}  // namespace

struct NfftPlan::FftPlans {
  fftw_plan forward = nullptr;   // sign -1
  fftw_plan backward = nullptr;  // sign +1
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

NfftPlan::NfftPlan(int n_ft, double oversampling, int cutoff, Window window)
    : n_ft_(n_ft), cutoff_(cutoff), oversampling_(oversampling), window_(window) {
  require(n_ft >= 2 && n_ft % 2 == 0, ErrorKind::Parameter, "n_ft must be a positive even integer");
  require(oversampling >= 1.25 && std::isfinite(oversampling), ErrorKind::Parameter, "oversampling must be >= 1.25");
  require(cutoff >= 2, ErrorKind::Parameter, "window cutoff must be >= 2");
  grid_ = 1;
  while (grid_ < oversampling * n_ft) grid_ *= 2;
  require(grid_ > 2 * cutoff, ErrorKind::Parameter, "oversampled grid too small for the window cutoff");
  const double sigma = static_cast<double>(grid_) / n_ft;
  const double n = grid_;
  const double m = cutoff;
  deconv_.resize(n_ft);
  if (window == Window::KaiserBessel) {
    shape_ = kPi * (2.0 - 1.0 / sigma);
    for (int i = 0; i < n_ft; ++i) {
      const double k = i - n_ft / 2;
      const double a = 2.0 * kPi * k / n;
      // n * phi_hat(k) = I0(m sqrt(b^2 - (2 pi k / n)^2))
      deconv_[i] = 1.0 / std::cyl_bessel_i(0.0, m * std::sqrt(shape_ * shape_ - a * a));
    }
  } else {
    shape_ = 2.0 * sigma / (2.0 * sigma - 1.0) * m / kPi;
    for (int i = 0; i < n_ft; ++i) {
      const double k = i - n_ft / 2;
      deconv_[i] = 1.0 / std::exp(-shape_ * (kPi * k / n) * (kPi * k / n));
    }
  }
  auto plans = std::make_shared<FftPlans>();
  std::vector<Complex> a(grid_), b(grid_);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    plans->forward = fftw_plan_dft_1d(grid_, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans->backward = fftw_plan_dft_1d(grid_, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  require(plans->forward && plans->backward, ErrorKind::Numerical, "FFTW planning failed");
  fft_ = std::move(plans);
}

double NfftPlan::phi(double x) const {
  const double n = grid_;
  const double m = cutoff_;
  if (window_ == Window::KaiserBessel) {
    const double arg = m * m - n * n * x * x;
    if (arg < 0.0) return 0.0;
    const double r = std::sqrt(arg);
    if (r < 1e-8) return shape_ / kPi;
    const double e = std::exp(shape_ * r);
    return 0.5 * (e - 1.0 / e) / (kPi * r);
  }
  const double y = n * x;
  return std::exp(-y * y / shape_) / std::sqrt(kPi * shape_);
}

template <class Coeff>
std::vector<Complex> NfftPlan::adjoint_impl(std::span<const double> nodes, std::span<const Coeff> coeffs) const {
  require(nodes.size() == coeffs.size(), ErrorKind::Parameter, "NFFT nodes and coefficients differ in length");
  check_nodes(nodes);
  const int n = grid_;
  const int mask = n - 1;  // grid_ is a power of two
  std::vector<Complex> g(n, Complex(0.0, 0.0)), G(n);
  std::vector<double> wts(2 * cutoff_ + 2);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double x = nodes[j];
    const int lo = floor_div_grid(x * n) - cutoff_ + 1;
    const int hi = lo + 2 * cutoff_;  // inclusive range lo..hi-1 covers |l/n - x| < m/n
    for (int l = lo; l < hi; ++l) wts[l - lo] = phi(static_cast<double>(l) / n - x);
    const Coeff c = coeffs[j];
    for (int l = lo; l < hi; ++l) g[l & mask] += c * wts[l - lo];
  }
  fftw_execute_dft(fft_->forward, reinterpret_cast<fftw_complex*>(g.data()), reinterpret_cast<fftw_complex*>(G.data()));
  std::vector<Complex> out(n_ft_);
  for (int i = 0; i < n_ft_; ++i) {
    const int k = i - n_ft_ / 2;
    out[i] = G[((k % n) + n) % n] * deconv_[i];
  }
  return out;
}

std::vector<Complex> NfftPlan::adjoint(std::span<const double> nodes, std::span<const Complex> coeffs) const {
  return adjoint_impl(nodes, coeffs);
}

std::vector<Complex> NfftPlan::adjoint(std::span<const double> nodes, std::span<const double> coeffs) const {
  return adjoint_impl(nodes, coeffs);
}

std::vector<Complex> NfftPlan::forward(std::span<const double> nodes, std::span<const Complex> spectral) const {
  require(static_cast<int>(spectral.size()) == n_ft_, ErrorKind::Parameter, "spectral vector length must equal n_ft");
  check_nodes(nodes);
  const int n = grid_;
  const int mask = n - 1;
  std::vector<Complex> ghat(n, Complex(0.0, 0.0)), g(n);
  for (int i = 0; i < n_ft_; ++i) {
    const int k = i - n_ft_ / 2;
    ghat[((k % n) + n) % n] = spectral[i] * deconv_[i];
  }
  fftw_execute_dft(fft_->backward, reinterpret_cast<fftw_complex*>(ghat.data()),
                   reinterpret_cast<fftw_complex*>(g.data()));
  std::vector<Complex> out(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double x = nodes[j];
    const int lo = floor_div_grid(x * n) - cutoff_ + 1;
    const int hi = lo + 2 * cutoff_;
    Complex acc(0.0, 0.0);
    for (int l = lo; l < hi; ++l) acc += g[l & mask] * phi(x - static_cast<double>(l) / n);
    out[j] = acc;
  }
  return out;
}

std::vector<Complex> direct_adjoint(std::span<const double> nodes, std::span<const Complex> coeffs, int n_ft) {
  require(nodes.size() == coeffs.size(), ErrorKind::Parameter, "nodes and coefficients differ in length");
  require(n_ft >= 0 && n_ft % 2 == 0, ErrorKind::Parameter, "n_ft must be even");
  std::vector<Complex> out(n_ft, Complex(0.0, 0.0));
  for (int i = 0; i < n_ft; ++i) {
    const double k = i - n_ft / 2;
    Complex acc(0.0, 0.0);
    for (std::size_t j = 0; j < nodes.size(); ++j) acc += coeffs[j] * std::polar(1.0, -2.0 * kPi * k * nodes[j]);
    out[i] = acc;
  }
  return out;
}

std::vector<Complex> direct_forward(std::span<const double> nodes, std::span<const Complex> spectral) {
  const int n_ft = static_cast<int>(spectral.size());
  require(n_ft % 2 == 0, ErrorKind::Parameter, "spectral length must be even");
  std::vector<Complex> out(nodes.size(), Complex(0.0, 0.0));
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    Complex acc(0.0, 0.0);
    for (int i = 0; i < n_ft; ++i) {
      const double k = i - n_ft / 2;
      acc += spectral[i] * std::polar(1.0, 2.0 * kPi * k * nodes[j]);
    }
    out[j] = acc;
  }
  return out;
}

}  // namespace qmcslice
