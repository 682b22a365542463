#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qmcslice/directions.hpp"
#include "qmcslice/kernels.hpp"
#include "qmcslice/nfft1d.hpp"
#include "qmcslice/rng.hpp"
#include "qmcslice/types.hpp"

namespace qmcslice {

// s_m = sum_n w_n F(||x_n - y_m||).
struct SummationProblem {
  Matrix x;  // N x d sources
  Matrix y;  // M x d targets
  Vector w;  // N weights

  SummationProblem() = default;
  SummationProblem(Matrix x_, Matrix y_, Vector w_);
  // Unit weights.
  SummationProblem(Matrix x_, Matrix y_);

  int dim() const noexcept { return static_cast<int>(x.cols()); }
  Eigen::Index N() const noexcept { return x.rows(); }
  Eigen::Index M() const noexcept { return y.rows(); }
  void validate() const;
  double source_radius() const;  // max_n ||x_n||
  double target_radius() const;  // max_m ||y_m||
};

Vector naive_sum(const SummationProblem& problem, const KernelSpec& kernel, int threads = 1);
Vector sliced_direct_sum(const SummationProblem& problem, const KernelSpec& kernel, const DirectionSet& dirs,
                         int threads = 1);

struct FourierOptions {
  std::optional<int> n_ft;          // default per family: 128 / 512 / 1024
  std::optional<double> threshold;  // T; default 0.3 / 0.2 / 0.1 (0.25 for numeric periodization)
  double g_max_factor = 5.0;        // g_max = factor * length scale
  bool allow_numeric_periodization = false;
  double oversampling = 2.0;
  int cutoff = 8;
};

struct FourierPlan {
  KernelSpec kernel;           // original kernel
  std::optional<KernelSpec> rescaled;  // closed-form path only
  double tau = 0.0;
  int n_ft = 0;
  double threshold = 0.0;
  double g_max = 0.0;          // 0 for numeric periodization
  double data_radius = 0.0;    // c = max ||x|| + max ||y|| at plan time
  bool numeric_periodization = false;
  std::vector<Complex> coeffs;  // c_k, index k + n_ft/2
  NfftPlan nfft;
};

int default_n_ft(KernelFamily family);
double default_threshold(KernelFamily family);

FourierPlan build_fourier_plan(const SummationProblem& problem, const KernelSpec& kernel,
                               const FourierOptions& options = {});
Vector fourier_slice_sum(const SummationProblem& problem, const FourierPlan& plan, const DirectionSet& dirs,
                         int threads = 1);
Vector fourier_slice_sum(const SummationProblem& problem, const KernelSpec& kernel, const DirectionSet& dirs,
                         const FourierPlan& plan, int threads = 1);

// Riesz r = 1 only: exact O((N + M) log(N + M)) per slice.
Vector sorting_slice_sum(const SummationProblem& problem, const KernelSpec& kernel, const DirectionSet& dirs,
                         int threads = 1);
// sum_n w_n |b - a_n| for all b, via sorting and prefix sums.
std::vector<double> abs_distance_sums(std::span<const double> a, std::span<const double> w,
                                      std::span<const double> b);

// Samples of the spectral measure of a positive definite kernel in angular
// frequency: E cos(<w, z>) = F(||z||).
class SpectralSampler {
 public:
  explicit SpectralSampler(const KernelSpec& kernel);
  void sample(Rng& rng, double* out) const;  // writes d entries
  // ||w|| / (2 pi): the radial law in cycles.
  double sample_radius(Rng& rng) const;
  const KernelSpec& kernel() const noexcept { return kernel_; }

 private:
  KernelSpec kernel_;
};

// D x d matrix of angular frequencies.
Matrix rff_frequencies(const KernelSpec& kernel, int D, std::uint64_t seed);
Matrix orf_frequencies(const KernelSpec& kernel, int D, std::uint64_t seed);
// (1/D) sum_p sum_n w_n cos(<y_m - x_n, W_p>).
Vector feature_sum(const SummationProblem& problem, const Matrix& frequencies, int threads = 1);

Vector rff_sum(const SummationProblem& problem, const KernelSpec& kernel, int D, std::uint64_t seed, int threads = 1);
Vector orf_sum(const SummationProblem& problem, const KernelSpec& kernel, int D, std::uint64_t seed, int threads = 1);
Vector rff_k_slice_sum(const SummationProblem& problem, const KernelSpec& kernel, const DirectionSet& dirs, int k,
                       std::uint64_t seed, int threads = 1);

// sum |a - b| / sum |b|.
double relative_l1(const Vector& approx, const Vector& exact);

}  // namespace qmcslice
