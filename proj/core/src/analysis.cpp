#include "qmcslice/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "qmcslice/error.hpp"
#include "qmcslice/parallel.hpp"
#include "qmcslice/rng.hpp"
#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {

constexpr std::uint64_t kTagVariance = 0x766172;
constexpr std::uint64_t kTagX = 0x78707473;
constexpr std::uint64_t kTagDirs = 0x64697273;
constexpr std::uint64_t kTagRot = 0x726f74;
constexpr std::uint64_t kTagDesign = 0x64657369;

double lgamma_(double x) { return std::lgamma(x); }

}  // namespace

const char* to_string(VarianceTag tag) noexcept {
  switch (tag) {
    case VarianceTag::Exact: return "exact";
    case VarianceTag::Bound: return "bound";
    case VarianceTag::Asymptotic: return "asymptotic";
  }
  return "unknown";
}

std::pair<double, double> thin_plate_asymptotic_constants() {
  const double g = kEulerGamma, l2 = std::log(2.0);
  const double c1 = -3.0 * g - std::log(8.0) + 8.0;
  const double p = digamma(2.5) + l2;
  const double c2 = 0.75 * (trigamma(2.5) + p * p) + 2.0 * (g + l2 - 2.0) * (g + l2 - 2.0);
  return {c1, c2};
}

double thin_plate_variance_exact(int d, double s) {
  require(d >= 2, ErrorKind::Parameter, "dimension must be >= 2");
  require(std::isfinite(s) && s >= 0.0, ErrorKind::Domain, "x norm must be finite and nonnegative");
  if (s == 0.0) return 0.0;
  const double h = 0.5 * d;
  const double K = 2.0 * std::log(s) + harmonic(h) - 2.0 + std::log(4.0);
  const double dp = digamma(2.5) - digamma(h + 2.0);
  const double J2 = 0.25 * (trigamma(2.5) - trigamma(h + 2.0) + dp * dp);
  const double J1 = -(-8.0 + 3.0 * harmonic(1.0 + h) + std::log(64.0)) / 6.0;
  const double s4 = s * s * s * s;
  const double second = s4 * 3.0 * d / (4.0 * (d + 2.0)) * (4.0 * J2 + 4.0 * K * J1 + K * K);
  const double F = s * s * std::log(s);
  return second - F * F;
}

ClosedFormVariance variance_closed_form(const KernelSpec& k, double x) {
  require(std::isfinite(x) && x >= 0.0, ErrorKind::Domain, "x norm must be finite and nonnegative");
  const int d = k.dim();
  const double F = eval_F(k, x);
  switch (k.family()) {
    case KernelFamily::Riesz: {
      const double r = k.r();
      require(r > 0.0, ErrorKind::Capability, "closed-form Riesz variance requires r > 0");
      const double lg = 0.5 * std::log(kPi) + lgamma_(r + 0.5) + 2.0 * lgamma_(0.5 * (d + r)) -
                        2.0 * lgamma_(0.5 * (r + 1.0)) - lgamma_(0.5 * d) - lgamma_(r + 0.5 * d);
      return {std::expm1(lg) * F * F, VarianceTag::Exact};
    }
    case KernelFamily::ThinPlate: {
      if (x == 0.0) return {0.0, VarianceTag::Exact};
      const double L = std::log(x);
      require(L != 0.0, ErrorKind::Domain, "thin-plate asymptotic is undefined at ||x|| = 1");
      const auto [c1, c2] = thin_plate_asymptotic_constants();
      return {(2.0 + c1 / L + c2 / (L * L)) * (1.0 + 2.0 / d) * F * F, VarianceTag::Asymptotic};
    }
    case KernelFamily::Laplace:
      if (d == 3) {
        if (x == 0.0) return {0.0, VarianceTag::Exact};
        const double ax = k.alpha() * x;
        return {(1.0 - (2.0 * ax * ax + 2.0 * ax + 1.0) * F * F) / (4.0 * ax), VarianceTag::Exact};
      }
      break;
    case KernelFamily::Gauss:
      if (d == 3) {
        if (x == 0.0) return {0.0, VarianceTag::Exact};
        // E f^2 = int_0^1 e^{-q u^2} (1 - q u^2)^2 du.
        const double q = x * x / (k.sigma() * k.sigma());
        double second = 0.0;
        if (q < 2.0) {
          double term = 1.0;  // (-q)^n / n!
          for (int n = 0; n < 60; ++n) {
            second += term * (1.0 / (2 * n + 1) - 2.0 * q / (2 * n + 3) + q * q / (2 * n + 5));
            term *= -q / (n + 1);
          }
        } else {
          const double eq = std::exp(-q);
          const double i0 = std::sqrt(kPi) * std::erf(std::sqrt(q)) / (2.0 * std::sqrt(q));
          const double i2 = (i0 - eq) / (2.0 * q);
          const double i4 = (3.0 * i2 - eq) / (2.0 * q);
          second = i0 - 2.0 * q * i2 + q * q * i4;
        }
        return {second - F * F, VarianceTag::Exact};
      }
      break;
    default: break;
  }
  // Positive definite bound with F(0) = 1.
  return {1.0 - F * F, VarianceTag::Bound};
}

VarianceReport variance_mc(const std::function<double(double)>& f, int d, double x, std::size_t n,
                           std::uint64_t seed) {
  require(n >= 2, ErrorKind::Parameter, "variance estimate needs at least 2 samples");
  require(std::isfinite(x) && x >= 0.0, ErrorKind::Domain, "x norm must be finite and nonnegative");
  Rng rng(seed, kTagVariance);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(x * std::fabs(sample_projection(rng, d)));
  CompensatedSum s;
  for (double a : v) s.add(a);
  const double mean = s.value() / n;
  CompensatedSum m2, m4;
  for (double a : v) {
    const double c = (a - mean) * (a - mean);
    m2.add(c);
    m4.add(c * c);
  }
  const double var = m2.value() / (n - 1);
  const double mu4 = m4.value() / n;
  const double nn = static_cast<double>(n);
  // Standard error of the unbiased sample variance.
  const double se2 = (mu4 - (nn - 3.0) / (nn - 1.0) * var * var) / nn;
  VarianceReport r;
  r.mc_estimate = var;
  r.mc_stderr = std::sqrt(std::max(se2, 0.0));
  r.n_samples = n;
  r.x_norm = x;
  return r;
}

VarianceReport variance_mc(const KernelSpec& k, double x, std::size_t n, std::uint64_t seed) {
  VarianceReport r = variance_mc([&](double t) { return eval_f(k, t); }, k.dim(), x, n, seed);
  try {
    r.closed_form = variance_closed_form(k, x);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Capability && e.kind() != ErrorKind::Domain) throw;
  }
  return r;
}

std::pair<double, double> fit_rate(const std::vector<double>& P, const std::vector<double>& err) {
  require(P.size() == err.size(), ErrorKind::Parameter, "P list and error list differ in length");
  require(P.size() >= 2, ErrorKind::Parameter, "rate fit needs at least two points");
  const std::size_t n = P.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(P[i] > 0.0 && std::isfinite(P[i]), ErrorKind::Domain, "rate fit needs positive P");
    require(err[i] > 0.0 && std::isfinite(err[i]), ErrorKind::Domain, "rate fit needs positive errors");
    lx[i] = std::log(P[i]);
    ly[i] = std::log(err[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, ErrorKind::Domain, "rate fit needs at least two distinct P values");
  const double slope = sxy / sxx;
  return {-slope, my - slope * mx};
}

ExperimentReport slicing_error_experiment(const KernelSpec& k, const ExperimentConfig& cfg) {
  require(!cfg.P_list.empty(), ErrorKind::Parameter, "P list must be non-empty");
  for (std::size_t i = 0; i < cfg.P_list.size(); ++i) {
    require(cfg.P_list[i] >= 1, ErrorKind::Parameter, "P values must be >= 1");
    if (i) require(cfg.P_list[i] > cfg.P_list[i - 1], ErrorKind::Parameter, "P list must be strictly ascending");
  }
  require(cfg.reps >= 1 && cfg.n_x >= 1, ErrorKind::Parameter, "reps and n_x must be >= 1");
  require(cfg.x_variance > 0.0, ErrorKind::Parameter, "x variance must be positive");
  const int d = k.dim();
  ExperimentReport rep;
  rep.generator = cfg.generator;
  rep.kernel = k.describe();
  rep.d = d;
  rep.n_x = cfg.n_x;
  rep.seed = cfg.seed;

  const bool deterministic = cfg.generator == Generator::File || cfg.generator == Generator::SphericalDesign ||
                             cfg.generator == Generator::Distance ||
                             (cfg.generator == Generator::SobolSphere && !cfg.sobol_shift);
  int reps = cfg.reps;
  if (deterministic && !cfg.randomize_deterministic && reps > 1) {
    rep.warnings.push_back(std::string("generator ") + to_string(cfg.generator) +
                           " is deterministic; repetitions collapse to 1");
    reps = 1;
  }
  rep.reps = reps;

  // Base sets for deterministic generators.
  const std::size_t nP = cfg.P_list.size();
  std::vector<DirectionSet> base(nP);
  if (deterministic) {
    parallel_for(nP, cfg.threads, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t i = b; i < e; ++i) {
        const int P = cfg.P_list[i];
        switch (cfg.generator) {
          case Generator::SobolSphere: base[i] = sobol_sphere(P, d); break;
          case Generator::Distance: {
            EnergyOptConfig opt = cfg.optimizer;
            opt.seed = derive_seed(cfg.seed, kTagDesign, static_cast<std::uint64_t>(P));
            opt.threads = 1;
            base[i] = distance_design(P, d, opt);
            break;
          }
          default: {
            const auto it = cfg.design_files.find(P);
            require(it != cfg.design_files.end(), ErrorKind::Parameter,
                    "no design file given for P = " + std::to_string(P));
            base[i] = load_directions(it->second);
            require(base[i].P() == P && base[i].d() == d, ErrorKind::Parameter,
                    "design file " + it->second + " does not hold " + std::to_string(P) + " directions in R^" +
                        std::to_string(d));
          }
        }
      }
    });
  }

  // Sample points per repetition (shared by all P).
  std::vector<Matrix> xs(reps);
  std::vector<std::vector<double>> Fx(reps);
  const double sd = std::sqrt(cfg.x_variance);
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(cfg.seed, kTagX, static_cast<std::uint64_t>(r)));
    xs[r].resize(cfg.n_x, d);
    Fx[r].resize(cfg.n_x);
    for (int i = 0; i < cfg.n_x; ++i) {
      for (int j = 0; j < d; ++j) xs[r](i, j) = sd * rng.normal();
      Fx[r][i] = eval_F(k, xs[r].row(i).norm());
    }
  }

  std::vector<double> cell(nP * reps);
  parallel_for(nP * reps, cfg.threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t c = b; c < e; ++c) {
      const std::size_t pi = c / reps;
      const int r = static_cast<int>(c % reps);
      const int P = cfg.P_list[pi];
      const std::uint64_t cs = derive_seed(cfg.seed, kTagDirs, (static_cast<std::uint64_t>(P) << 20) + r);
      DirectionSet dirs;
      if (deterministic) {
        dirs = cfg.randomize_deterministic ? randomize(base[pi], derive_seed(cs, kTagRot)) : base[pi];
      } else {
        switch (cfg.generator) {
          case Generator::IID: dirs = iid_uniform(P, d, cs); break;
          case Generator::Orthogonal: dirs = orthogonal(P, d, cs); break;
          case Generator::SobolSphere: dirs = sobol_sphere(P, d, cs); break;
          default: fail(ErrorKind::Parameter, "unsupported generator");
        }
      }
      const Matrix proj = xs[r] * dirs.vectors.transpose();  // n_x x P
      CompensatedSum err;
      for (int i = 0; i < cfg.n_x; ++i) {
        double acc = 0.0;
        for (int p = 0; p < P; ++p) acc += eval_f(k, std::fabs(proj(i, p)));
        err.add(std::fabs(Fx[r][i] - acc / P));
      }
      cell[c] = err.value() / cfg.n_x;
    }
  });

  for (std::size_t pi = 0; pi < nP; ++pi) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += cell[pi * reps + r];
    mean /= reps;
    double var = 0.0;
    for (int r = 0; r < reps; ++r) var += (cell[pi * reps + r] - mean) * (cell[pi * reps + r] - mean);
    const double sdv = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
    rep.P.push_back(cfg.P_list[pi]);
    rep.mean_error.push_back(mean);
    rep.std_dev.push_back(sdv);
    rep.std_error.push_back(sdv / std::sqrt(static_cast<double>(reps)));
  }
  if (nP >= 2) {
    std::vector<double> Pd(rep.P.begin(), rep.P.end());
    std::tie(rep.rate, rep.intercept) = fit_rate(Pd, rep.mean_error);
  } else {
    rep.rate = std::numeric_limits<double>::quiet_NaN();
    rep.intercept = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

void write_experiment_csv(const ExperimentReport& r, std::ostream& out, bool header) {
  const auto old = out.precision(17);
  if (header) out << "generator,kernel,d,P,mean_error,std_error\n";
  const std::string kernel = "\"" + r.kernel + "\"";
  for (std::size_t i = 0; i < r.P.size(); ++i)
    out << to_string(r.generator) << ',' << kernel << ',' << r.d << ',' << r.P[i] << ',' << r.mean_error[i] << ','
        << r.std_error[i] << '\n';
  out << to_string(r.generator) << ',' << kernel << ',' << r.d << ",rate," << r.rate << ',' << r.intercept << '\n';
  out.precision(old);
}

}  // namespace qmcslice
