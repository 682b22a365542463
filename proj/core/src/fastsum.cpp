#include "qmcslice/fastsum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmcslice/error.hpp"
#include "qmcslice/parallel.hpp"
#include "qmcslice/periodize.hpp"
#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {

constexpr std::uint64_t kTagRff = 0x726666;
constexpr std::uint64_t kTagOrfDirs = 0x6f726664;
constexpr std::uint64_t kTagOrfRadii = 0x6f726672;
constexpr std::uint64_t kTagRffk = 0x7266666b;

void check_dirs(const SummationProblem& p, const DirectionSet& dirs) {
  require(dirs.P() >= 1, ErrorKind::Parameter, "direction set is empty");
  require(dirs.d() == p.dim(), ErrorKind::Parameter,
          "direction dimension " + std::to_string(dirs.d()) + " does not match data dimension " +
              std::to_string(p.dim()));
}

void check_pd(const KernelSpec& k, const char* what) {
  require(k.positive_definite(), ErrorKind::Capability,
          std::string(what) + " requires a positive definite kernel (gauss, laplace, matern)");
}

// Runs body(p, acc) for each slice p with per-chunk accumulators that are
// reduced in chunk order, so the serial result sums slices in ascending order.
template <class Body>
Vector reduce_slices(int P, Eigen::Index M, int threads, Body&& body) {
  // Slices are grouped into fixed blocks and the block partials are summed in
  // order, so the result does not depend on the thread count.
  constexpr int kBlock = 8;
  const int blocks = (P + kBlock - 1) / kBlock;
  std::vector<Vector> partial(blocks, Vector::Zero(M));
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t blk = b; blk < e; ++blk) {
      const int end = std::min(P, static_cast<int>(blk + 1) * kBlock);
      for (int p = static_cast<int>(blk) * kBlock; p < end; ++p) body(p, partial[blk]);
    }
  });
  Vector out = Vector::Zero(M);
  for (const auto& v : partial) out += v;
  return out;
}

}  // namespace

SummationProblem::SummationProblem(Matrix x_, Matrix y_, Vector w_)
    : x(std::move(x_)), y(std::move(y_)), w(std::move(w_)) {
  validate();
}

SummationProblem::SummationProblem(Matrix x_, Matrix y_) : x(std::move(x_)), y(std::move(y_)) {
  w = Vector::Ones(x.rows());
  validate();
}

void SummationProblem::validate() const {
  require(x.rows() >= 1 && y.rows() >= 1, ErrorKind::Parameter, "summation needs N >= 1 sources and M >= 1 targets");
  require(x.cols() == y.cols() && x.cols() >= 1, ErrorKind::Parameter, "sources and targets differ in dimension");
  require(w.size() == x.rows(), ErrorKind::Parameter, "weight count does not match the number of sources");
  require(x.allFinite() && y.allFinite() && w.allFinite(), ErrorKind::Parameter, "summation inputs must be finite");
}

double SummationProblem::source_radius() const { return x.rowwise().norm().maxCoeff(); }
double SummationProblem::target_radius() const { return y.rowwise().norm().maxCoeff(); }

Vector naive_sum(const SummationProblem& p, const KernelSpec& k, int threads) {
  p.validate();
  Vector s(p.M());
  parallel_for(static_cast<std::size_t>(p.M()), threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t m = b; m < e; ++m) {
      double acc = 0.0;
      for (Eigen::Index n = 0; n < p.N(); ++n)
        acc += p.w[n] * eval_F(k, (p.x.row(n) - p.y.row(static_cast<Eigen::Index>(m))).norm());
      s[static_cast<Eigen::Index>(m)] = acc;
    }
  });
  return s;
}

Vector sliced_direct_sum(const SummationProblem& p, const KernelSpec& k, const DirectionSet& dirs, int threads) {
  p.validate();
  check_dirs(p, dirs);
  const Matrix a = p.x * dirs.vectors.transpose();  // N x P
  const Matrix b = p.y * dirs.vectors.transpose();  // M x P
  const int P = dirs.P();
  Vector s(p.M());
  parallel_for(static_cast<std::size_t>(p.M()), threads, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t mi = lo; mi < hi; ++mi) {
      const auto m = static_cast<Eigen::Index>(mi);
      double total = 0.0;
      for (int q = 0; q < P; ++q) {
        double slice = 0.0;
        for (Eigen::Index n = 0; n < p.N(); ++n) slice += p.w[n] * eval_f(k, std::fabs(b(m, q) - a(n, q)));
        total += slice;
      }
      s[m] = total / P;
    }
  });
  return s;
}

int default_n_ft(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gauss: return 128;
    case KernelFamily::Matern: return 512;
    case KernelFamily::Laplace: return 1024;
    default: return 1024;
  }
}

double default_threshold(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gauss: return 0.3;
    case KernelFamily::Matern: return 0.2;
    case KernelFamily::Laplace: return 0.1;
    default: return 0.25;
  }
}

FourierPlan build_fourier_plan(const SummationProblem& p, const KernelSpec& k, const FourierOptions& opt) {
  p.validate();
  require(k.dim() == p.dim(), ErrorKind::Parameter, "kernel dimension does not match data dimension");
  const bool closed = k.positive_definite();
  if (!closed) {
    require(k.family() == KernelFamily::ThinPlate || k.family() == KernelFamily::Riesz, ErrorKind::Capability,
            "kernel has no Fourier path");
    require(opt.allow_numeric_periodization, ErrorKind::Capability,
            std::string("kernel ") + to_string(k.family()) +
                " has no closed-form spectral density; enable numeric periodization explicitly");
  }
  const int n_ft = opt.n_ft.value_or(default_n_ft(k.family()));
  require(n_ft >= 2 && n_ft % 2 == 0, ErrorKind::Parameter, "n_ft must be a positive even integer");
  const double T = opt.threshold.value_or(default_threshold(k.family()));
  require(T > 0.0 && T < 0.5, ErrorKind::Parameter, "threshold T must lie in (0, 1/2)");
  const double c = p.source_radius() + p.target_radius();

  FourierPlan plan{k, std::nullopt, 0.0, n_ft, T, 0.0, c, !closed, {}, NfftPlan(n_ft, opt.oversampling, opt.cutoff)};
  if (closed) {
    require(opt.g_max_factor > 0.0, ErrorKind::Parameter, "g_max factor must be positive");
    plan.g_max = opt.g_max_factor * k.length_scale();
    const double by_support = 1.0 / (2.0 * plan.g_max);
    plan.tau = c > 0.0 ? std::min(T / c, by_support) : by_support;
    plan.rescaled = k.rescaled(plan.tau);
    plan.coeffs.resize(n_ft);
    for (int i = 0; i < n_ft; ++i)
      plan.coeffs[i] = Complex(spectral_density_1d(*plan.rescaled, static_cast<double>(i - n_ft / 2)), 0.0);
  } else {
    require(c > 0.0, ErrorKind::Degenerate, "all points are at the origin; periodization scale undefined");
    plan.tau = T / c;
    plan.coeffs = periodized_coefficients(k, plan.tau, T, n_ft);
  }
  return plan;
}

Vector fourier_slice_sum(const SummationProblem& p, const KernelSpec& k, const DirectionSet& dirs,
                         const FourierPlan& plan, int threads) {
  require(k.family() == plan.kernel.family() && k.params().sigma == plan.kernel.params().sigma &&
              k.params().alpha == plan.kernel.params().alpha && k.params().beta == plan.kernel.params().beta &&
              k.params().nu == plan.kernel.params().nu && k.params().r == plan.kernel.params().r &&
              k.dim() == plan.kernel.dim(),
          ErrorKind::PlanMismatch, "Fourier plan was built for a different kernel");
  return fourier_slice_sum(p, plan, dirs, threads);
}

Vector fourier_slice_sum(const SummationProblem& p, const FourierPlan& plan, const DirectionSet& dirs, int threads) {
  p.validate();
  check_dirs(p, dirs);
  require(plan.kernel.dim() == p.dim(), ErrorKind::PlanMismatch, "Fourier plan dimension does not match the data");
  const double c = p.source_radius() + p.target_radius();
  require(c <= plan.data_radius * (1.0 + 1e-12), ErrorKind::PlanMismatch,
          "data radius exceeds the radius the Fourier plan was built for");
  const Matrix a = plan.tau * (p.x * dirs.vectors.transpose());
  const Matrix b = plan.tau * (p.y * dirs.vectors.transpose());
  const double lim = plan.threshold;
  require((a.array().abs() <= lim * (1.0 + 1e-12)).all() && (b.array().abs() <= lim * (1.0 + 1e-12)).all(),
          ErrorKind::PlanMismatch, "projected node outside the planned range");
  const int P = dirs.P();
  const std::vector<double> w(p.w.data(), p.w.data() + p.w.size());
  Vector s = reduce_slices(P, p.M(), threads, [&](int q, Vector& acc) {
    std::vector<double> an(p.N()), bm(p.M());
    for (Eigen::Index n = 0; n < p.N(); ++n) an[n] = a(n, q);
    for (Eigen::Index m = 0; m < p.M(); ++m) bm[m] = b(m, q);
    std::vector<Complex> what = plan.nfft.adjoint(an, w);
    for (int i = 0; i < plan.n_ft; ++i) what[i] *= plan.coeffs[i];
    const std::vector<Complex> t = plan.nfft.forward(bm, what);
    for (Eigen::Index m = 0; m < p.M(); ++m) acc[m] += t[m].real();
  });
  return s / static_cast<double>(P);
}

std::vector<double> abs_distance_sums(std::span<const double> a, std::span<const double> w,
                                      std::span<const double> b) {
  require(a.size() == w.size(), ErrorKind::Parameter, "points and weights differ in length");
  const std::size_t N = a.size();
  std::vector<double> out(b.size(), 0.0);
  if (N == 0) return out;
  // Shift by the mean to reduce cancellation in b * W - S.
  const double shift = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(N);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
  std::vector<double> sorted(N), W(N + 1, 0.0), S(N + 1, 0.0);
  CompensatedSum cw, cs;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t j = order[i];
    sorted[i] = a[j] - shift;
    cw.add(w[j]);
    cs.add(w[j] * sorted[i]);
    W[i + 1] = cw.value();
    S[i + 1] = cs.value();
  }
  for (std::size_t m = 0; m < b.size(); ++m) {
    const double bb = b[m] - shift;
    const std::size_t j = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), bb) - sorted.begin());
    out[m] = bb * (2.0 * W[j] - W[N]) - (2.0 * S[j] - S[N]);
  }
  return out;
}

Vector sorting_slice_sum(const SummationProblem& p, const KernelSpec& k, const DirectionSet& dirs, int threads) {
  p.validate();
  check_dirs(p, dirs);
  require(k.family() == KernelFamily::Riesz && k.r() == 1.0, ErrorKind::Capability,
          "sorting backend requires the Riesz kernel with r = 1");
  const double c = riesz_constant(k.dim(), 1.0);
  const Matrix a = p.x * dirs.vectors.transpose();
  const Matrix b = p.y * dirs.vectors.transpose();
  const std::vector<double> w(p.w.data(), p.w.data() + p.w.size());
  const int P = dirs.P();
  Vector s = reduce_slices(P, p.M(), threads, [&](int q, Vector& acc) {
    std::vector<double> an(p.N()), bm(p.M());
    for (Eigen::Index n = 0; n < p.N(); ++n) an[n] = a(n, q);
    for (Eigen::Index m = 0; m < p.M(); ++m) bm[m] = b(m, q);
    const auto sums = abs_distance_sums(an, w, bm);
    for (Eigen::Index m = 0; m < p.M(); ++m) acc[m] += -c * sums[m];
  });
  return s / static_cast<double>(P);
}

SpectralSampler::SpectralSampler(const KernelSpec& kernel) : kernel_(kernel) { check_pd(kernel, "spectral sampling"); }

void SpectralSampler::sample(Rng& rng, double* out) const {
  const int d = kernel_.dim();
  switch (kernel_.family()) {
    case KernelFamily::Gauss: {
      const double s = 1.0 / kernel_.sigma();
      for (int i = 0; i < d; ++i) out[i] = rng.normal() * s;
      return;
    }
    case KernelFamily::Laplace: {
      for (int i = 0; i < d; ++i) out[i] = rng.normal();
      double g;
      do g = rng.normal();
      while (g == 0.0);
      const double s = kernel_.alpha() / std::fabs(g);
      for (int i = 0; i < d; ++i) out[i] *= s;
      return;
    }
    case KernelFamily::Matern: {
      for (int i = 0; i < d; ++i) out[i] = rng.normal();
      const double nu = kernel_.nu();
      double u;
      do u = rng.chi_square(2.0 * nu);
      while (u == 0.0);
      const double s = std::sqrt(2.0 * nu / u) / kernel_.beta();
      for (int i = 0; i < d; ++i) out[i] *= s;
      return;
    }
    default: break;
  }
  fail(ErrorKind::Capability, "spectral sampling requires a positive definite kernel");
}

double SpectralSampler::sample_radius(Rng& rng) const {
  std::vector<double> v(kernel_.dim());
  sample(rng, v.data());
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  return std::sqrt(n2) / (2.0 * kPi);
}

Matrix rff_frequencies(const KernelSpec& k, int D, std::uint64_t seed) {
  check_pd(k, "random Fourier features");
  require(D >= 1, ErrorKind::Parameter, "number of features D must be >= 1");
  SpectralSampler sampler(k);
  Rng rng(seed, kTagRff);
  Matrix W(D, k.dim());
  for (int p = 0; p < D; ++p) sampler.sample(rng, W.row(p).data());
  return W;
}

Matrix orf_frequencies(const KernelSpec& k, int D, std::uint64_t seed) {
  check_pd(k, "orthogonal random features");
  require(D >= 1, ErrorKind::Parameter, "number of features D must be >= 1");
  const DirectionSet dirs = orthogonal(D, k.dim(), derive_seed(seed, kTagOrfDirs));
  SpectralSampler sampler(k);
  Rng rng(seed, kTagOrfRadii);
  Matrix W = dirs.vectors;
  for (int p = 0; p < D; ++p) W.row(p) *= 2.0 * kPi * sampler.sample_radius(rng);
  return W;
}

Vector feature_sum(const SummationProblem& p, const Matrix& W, int threads) {
  p.validate();
  require(W.cols() == p.dim() && W.rows() >= 1, ErrorKind::Parameter, "frequency matrix does not match the data");
  const Eigen::Index D = W.rows();
  const Matrix ax = p.x * W.transpose();  // N x D
  std::vector<double> C(D), S(D);
  parallel_for(static_cast<std::size_t>(D), threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t q = b; q < e; ++q) {
      double c = 0.0, s = 0.0;
      for (Eigen::Index n = 0; n < p.N(); ++n) {
        const double v = ax(n, static_cast<Eigen::Index>(q));
        c += p.w[n] * std::cos(v);
        s += p.w[n] * std::sin(v);
      }
      C[q] = c;
      S[q] = s;
    }
  });
  const Matrix by = p.y * W.transpose();  // M x D
  Vector out(p.M());
  parallel_for(static_cast<std::size_t>(p.M()), threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t mi = b; mi < e; ++mi) {
      const auto m = static_cast<Eigen::Index>(mi);
      double acc = 0.0;
      for (Eigen::Index q = 0; q < D; ++q) acc += std::cos(by(m, q)) * C[q] + std::sin(by(m, q)) * S[q];
      out[m] = acc / static_cast<double>(D);
    }
  });
  return out;
}

Vector rff_sum(const SummationProblem& p, const KernelSpec& k, int D, std::uint64_t seed, int threads) {
  require(k.dim() == p.dim(), ErrorKind::Parameter, "kernel dimension does not match data dimension");
  return feature_sum(p, rff_frequencies(k, D, seed), threads);
}

Vector orf_sum(const SummationProblem& p, const KernelSpec& k, int D, std::uint64_t seed, int threads) {
  require(k.dim() == p.dim(), ErrorKind::Parameter, "kernel dimension does not match data dimension");
  return feature_sum(p, orf_frequencies(k, D, seed), threads);
}

Vector rff_k_slice_sum(const SummationProblem& p, const KernelSpec& k, const DirectionSet& dirs, int kf,
                       std::uint64_t seed, int threads) {
  p.validate();
  check_dirs(p, dirs);
  check_pd(k, "RFF-k slicing");
  require(kf >= 1, ErrorKind::Parameter, "features per slice k must be >= 1");
  require(k.dim() == p.dim(), ErrorKind::Parameter, "kernel dimension does not match data dimension");
  const SpectralSampler sampler(k);
  const Matrix a = p.x * dirs.vectors.transpose();
  const Matrix b = p.y * dirs.vectors.transpose();
  const int P = dirs.P();
  Vector s = reduce_slices(P, p.M(), threads, [&](int q, Vector& acc) {
    Rng rng(derive_seed(seed, kTagRffk, static_cast<std::uint64_t>(q)));
    for (int j = 0; j < kf; ++j) {
      const double om = 2.0 * kPi * sampler.sample_radius(rng);
      double c = 0.0, sn = 0.0;
      for (Eigen::Index n = 0; n < p.N(); ++n) {
        c += p.w[n] * std::cos(om * a(n, q));
        sn += p.w[n] * std::sin(om * a(n, q));
      }
      for (Eigen::Index m = 0; m < p.M(); ++m) acc[m] += std::cos(om * b(m, q)) * c + std::sin(om * b(m, q)) * sn;
    }
  });
  return s / (static_cast<double>(P) * kf);
}

double relative_l1(const Vector& approx, const Vector& exact) {
  require(approx.size() == exact.size(), ErrorKind::Parameter, "vectors differ in length");
  const double den = exact.cwiseAbs().sum();
  require(den > 0.0, ErrorKind::Degenerate, "reference sum is zero; relative error undefined");
  return (approx - exact).cwiseAbs().sum() / den;
}

}  // namespace qmcslice
