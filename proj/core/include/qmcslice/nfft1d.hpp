#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace qmcslice {

using Complex = std::complex<double>;

enum class Window { KaiserBessel, Gaussian };

// 1D NFFT by gridding: spread with a compact window on an oversampled grid,
// FFT, and deconvolve by the window's Fourier coefficients.
// Modes are k = -n_ft/2 .. n_ft/2 - 1, stored at index k + n_ft/2.
class NfftPlan {
 public:
  NfftPlan(int n_ft, double oversampling = 2.0, int cutoff = 8, Window window = Window::KaiserBessel);

  int n_ft() const noexcept { return n_ft_; }
  int grid_size() const noexcept { return grid_; }
  int cutoff() const noexcept { return cutoff_; }
  double oversampling() const noexcept { return oversampling_; }
  Window window() const noexcept { return window_; }

  // w_hat_k = sum_j w_j exp(-2 pi i k x_j), nodes in [-1/2, 1/2).
  std::vector<Complex> adjoint(std::span<const double> nodes, std::span<const Complex> coeffs) const;
  std::vector<Complex> adjoint(std::span<const double> nodes, std::span<const double> coeffs) const;
  // f_j = sum_k c_k exp(2 pi i k x_j).
  std::vector<Complex> forward(std::span<const double> nodes, std::span<const Complex> spectral) const;

 private:
  double phi(double x) const;  // window on the real line, x in units of the period
  template <class Coeff>
  std::vector<Complex> adjoint_impl(std::span<const double> nodes, std::span<const Coeff> coeffs) const;

  int n_ft_;
  int grid_;
  int cutoff_;
  double oversampling_;
  Window window_;
  double shape_;                 // Kaiser-Bessel b or Gaussian b
  std::vector<double> deconv_;   // 1 / (grid * phi_hat(k))
  struct FftPlans;
  std::shared_ptr<const FftPlans> fft_;
};

std::vector<Complex> direct_adjoint(std::span<const double> nodes, std::span<const Complex> coeffs, int n_ft);
std::vector<Complex> direct_forward(std::span<const double> nodes, std::span<const Complex> spectral);

}  // namespace qmcslice
