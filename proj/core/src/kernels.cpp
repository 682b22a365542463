#include "qmcslice/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "qmcslice/error.hpp"
#include "qmcslice/quadrature.hpp"
#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {

constexpr double kQuadTol = 1e-11;
// Largest allowed (sum of |terms|) * scale for a series evaluation; with
// double rounding this keeps the absolute error near 1e-11.
constexpr double kSeriesCondition = 1e4;

bool positive_finite(const std::optional<double>& v) { return v && std::isfinite(*v) && *v > 0.0; }

void check_t(double t) {
  require(std::isfinite(t) && t >= 0.0, ErrorKind::Domain, "kernel argument must be finite and nonnegative");
}

// Half-integer nu = p + 1/2 with small p, else -1.
int half_integer_order(double nu) {
  const double p = nu - 0.5;
  if (p >= 0.0 && p <= 30.0 && p == std::floor(p)) return static_cast<int>(p);
  return -1;
}

// Coefficients q_j of the polynomial in F = e^{-s} q(s) for nu = p + 1/2.
std::vector<double> matern_poly(int p) {
  std::vector<double> q(p + 1);
  // q_j = p!/(2p)! * (2p-j)! / ((p-j)! j!) * 2^j
  for (int j = 0; j <= p; ++j) {
    const double lg = std::lgamma(p + 1.0) - std::lgamma(2.0 * p + 1.0) + std::lgamma(2.0 * p - j + 1.0) -
                      std::lgamma(p - j + 1.0) - std::lgamma(j + 1.0);
    q[j] = std::exp(lg) * std::ldexp(1.0, j);
  }
  return q;
}

double matern_F(double nu, double s) {
  if (s == 0.0) return 1.0;
  const int p = half_integer_order(nu);
  if (p >= 0) {
    const auto q = matern_poly(p);
    double acc = 0.0;
    for (int j = p; j >= 0; --j) acc = acc * s + q[j];
    return std::exp(-s) * acc;
  }
  if (s > 700.0) return 0.0;
  const double k = std::cyl_bessel_k(nu, s);
  return std::exp((1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(s)) * k;
}

// (2^{1-nu}/Gamma(nu)) s^{nu+1} K_{nu-1}(s), i.e. -t F'(t) in terms of s.
double matern_tdF(double nu, double s) {
  if (s == 0.0) return 0.0;
  if (s > 700.0) return 0.0;
  const double k = std::cyl_bessel_k(std::fabs(nu - 1.0), s);
  return std::exp((1.0 - nu) * std::log(2.0) - std::lgamma(nu) + (nu + 1.0) * std::log(s)) * k;
}

// b_n = sqrt(pi) Gamma((n+d)/2) / (Gamma(d/2) Gamma((n+1)/2)): E_xi |<xi,e>|^n = 1/b_n.
std::vector<double> slice_moments(int dim, int count) {
  std::vector<double> b(count);
  if (count > 0) b[0] = 1.0;
  if (count > 1) b[1] = std::sqrt(kPi) * std::exp(std::lgamma(0.5 * (dim + 1)) - std::lgamma(0.5 * dim));
  for (int n = 0; n + 2 < count; ++n) b[n + 2] = b[n] * (n + dim) / (n + 1.0);
  return b;
}

struct SeriesOut {
  double value;
  double condition;
};

// e^{-z} 1F1((1-d)/2; 1/2; z), the Kummer transform of 1F1(d/2; 1/2; -z).
std::optional<SeriesOut> gauss_kummer(int dim, double z) {
  const double a = 0.5 - 0.5 * dim;
  const double scale = std::exp(-z);
  CompensatedSum sum;
  double term = 1.0;
  double abs_sum = 1.0;
  sum.add(1.0);
  for (int n = 0; n < 6000; ++n) {
    term *= (a + n) / ((0.5 + n) * (n + 1.0)) * z;
    if (term == 0.0) break;  // terminating (odd d)
    sum.add(term);
    abs_sum += std::fabs(term);
    if (!std::isfinite(abs_sum) || abs_sum * scale > kSeriesCondition) return std::nullopt;
    if (n > z + std::fabs(a) && std::fabs(term) < 1e-17 * abs_sum) break;
    if (n == 5999) return std::nullopt;
  }
  return SeriesOut{scale * sum.value(), scale * abs_sum};
}

// Large-z expansion of 1F1(d/2; 1/2; -z) for even d.
std::optional<double> gauss_asymptotic(int dim, double z) {
  if (dim % 2 == 1) return std::nullopt;
  // Exponentially small companion term must be negligible.
  const double companion = std::exp(-z + 0.5 * (dim - 1) * std::log(z) - std::lgamma(0.5 * dim));
  if (companion > 1e-14) return std::nullopt;
  const double a = 0.5 * dim;
  const double c = 0.5 * (dim + 1);
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  for (int s = 0; s < 200; ++s) {
    term *= (a + s) * (c + s) / ((s + 1.0) * z);
    if (std::fabs(term) > std::fabs(prev)) return std::nullopt;  // diverging before converging
    sum += term;
    prev = term;
    if (std::fabs(term) < 1e-16 * std::fabs(sum)) {
      // sqrt(pi)/Gamma((1-d)/2) z^{-d/2}; Gamma((1-d)/2) is finite for even d.
      const double g = std::tgamma(0.5 * (1 - dim));
      return std::sqrt(kPi) / g * std::pow(z, -a) * sum;
    }
  }
  return std::nullopt;
}

// sum_n b_n a_n x^n where a_n x^n = (-x)^n / n!.
std::optional<SeriesOut> laplace_series(int dim, double x) {
  const int nmax = static_cast<int>(std::min(4000.0, 60.0 + 4.0 * x + 2.0 * dim));
  const auto b = slice_moments(dim, nmax + 2);
  CompensatedSum sum;
  double abs_sum = 0.0;
  double e = 1.0;  // (-x)^n / n!
  for (int n = 0; n <= nmax; ++n) {
    if (n > 0) e *= -x / n;
    const double term = b[n] * e;
    sum.add(term);
    abs_sum += std::fabs(term);
    if (!std::isfinite(abs_sum) || abs_sum > kSeriesCondition) return std::nullopt;
    if (n > x && std::fabs(term) < 1e-17 * abs_sum) return SeriesOut{sum.value(), abs_sum};
  }
  return std::nullopt;
}

// Half-integer Matern, F = e^{-s} q(s), expanded in powers of s.
std::optional<SeriesOut> matern_half_series(int dim, int p, double s) {
  const auto q = matern_poly(p);
  const int nmax = static_cast<int>(std::min(4000.0, 80.0 + 4.0 * s + 2.0 * dim + p));
  const auto b = slice_moments(dim, nmax + 2);
  std::vector<double> qs(p + 1);
  for (int j = 0; j <= p; ++j) qs[j] = q[j] * std::pow(s, j);
  std::vector<double> e(nmax + 1);  // (-s)^k / k!
  e[0] = 1.0;
  for (int k = 1; k <= nmax; ++k) e[k] = e[k - 1] * (-s) / k;
  CompensatedSum sum;
  double abs_sum = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    double an = 0.0;
    for (int j = 0; j <= std::min(n, p); ++j) an += qs[j] * e[n - j];
    const double term = b[n] * an;
    sum.add(term);
    abs_sum += std::fabs(term);
    if (!std::isfinite(abs_sum) || abs_sum > kSeriesCondition) return std::nullopt;
    // Odd coefficients below order 2p + 1 vanish exactly.
    if (n > s + 2 * p + 2 && std::fabs(term) < 1e-17 * abs_sum) return SeriesOut{sum.value(), abs_sum};
  }
  return std::nullopt;
}

// Upper end of the bulk of the spectral density (beyond it the density is monotone).
double spectral_bulk(const KernelSpec& k) {
  const int d = k.dim();
  switch (k.family()) {
    case KernelFamily::Gauss: {
      const double u = 0.5 * (d - 1) + 40.0 + 8.0 * std::sqrt(double(d));
      return std::sqrt(u / 2.0) / (kPi * k.sigma());
    }
    case KernelFamily::Laplace: {
      const double peak = k.alpha() * std::sqrt(0.5 * (d - 1)) / (2.0 * kPi);
      return 4.0 * peak + 4.0 * k.alpha() / (2.0 * kPi);
    }
    case KernelFamily::Matern: {
      const double a = 2.0 * kPi * kPi * k.beta() * k.beta() / k.nu();
      const double peak = std::sqrt((d - 1) / (a * (2.0 * k.nu() + 1.0)));
      return 4.0 * peak + 4.0 / std::sqrt(a);
    }
    default: break;
  }
  fail(ErrorKind::Capability, "no spectral density for this family");
}

double sliced_by_quadrature(const KernelSpec& k, double t) {
  const QuadResult q =
      cosine_transform([&](double w) { return spectral_density_1d(k, w); }, t, spectral_bulk(k), 0.5 * kQuadTol);
  if (!q.converged || !std::isfinite(q.value))
    throw Error(ErrorKind::Numerical, "cosine-transform quadrature for f did not converge", 2.0 * q.abs_error);
  return 2.0 * q.value;
}

std::optional<double> sliced_by_series(const KernelSpec& k, double t) {
  const int d = k.dim();
  switch (k.family()) {
    case KernelFamily::Gauss: {
      const double z = t * t / (2.0 * k.sigma() * k.sigma());
      if (auto s = gauss_kummer(d, z)) return s->value;
      if (auto a = gauss_asymptotic(d, z)) return *a;
      return std::nullopt;
    }
    case KernelFamily::Laplace:
      if (auto s = laplace_series(d, k.alpha() * t)) return s->value;
      return std::nullopt;
    case KernelFamily::Matern: {
      const int p = half_integer_order(k.nu());
      if (p < 0) return std::nullopt;
      const double s = std::sqrt(2.0 * k.nu()) * t / k.beta();
      if (auto v = matern_half_series(d, p, s)) return v->value;
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

}  // namespace

const char* to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::Gauss: return "gauss";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::Matern: return "matern";
    case KernelFamily::Riesz: return "riesz";
    case KernelFamily::ThinPlate: return "thinplate";
  }
  return "unknown";
}

KernelFamily parse_family(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "gauss" || s == "gaussian") return KernelFamily::Gauss;
  if (s == "laplace") return KernelFamily::Laplace;
  if (s == "matern") return KernelFamily::Matern;
  if (s == "riesz" || s == "energy") return KernelFamily::Riesz;
  if (s == "thinplate" || s == "thin-plate" || s == "tps") return KernelFamily::ThinPlate;
  fail(ErrorKind::Parameter, "unknown kernel family '" + name + "'");
}

KernelSpec::KernelSpec(KernelFamily family, KernelParams params, int dim)
    : family_(family), params_(params), dim_(dim) {
  require(dim >= 2, ErrorKind::Parameter, "kernel dimension must be >= 2");
  const bool has_sigma = params.sigma.has_value(), has_alpha = params.alpha.has_value();
  const bool has_beta = params.beta.has_value(), has_nu = params.nu.has_value(), has_r = params.r.has_value();
  auto only = [&](bool s, bool a, bool b, bool n, bool r) {
    require(has_sigma == s && has_alpha == a && has_beta == b && has_nu == n && has_r == r, ErrorKind::Parameter,
            std::string("parameters do not match kernel family ") + to_string(family));
  };
  switch (family) {
    case KernelFamily::Gauss:
      only(true, false, false, false, false);
      require(positive_finite(params.sigma), ErrorKind::Parameter, "sigma must be positive");
      break;
    case KernelFamily::Laplace:
      only(false, true, false, false, false);
      require(positive_finite(params.alpha), ErrorKind::Parameter, "alpha must be positive");
      break;
    case KernelFamily::Matern:
      only(false, false, true, true, false);
      require(positive_finite(params.beta), ErrorKind::Parameter, "beta must be positive");
      require(positive_finite(params.nu), ErrorKind::Parameter, "nu must be positive");
      break;
    case KernelFamily::Riesz:
      only(false, false, false, false, true);
      require(std::isfinite(*params.r) && *params.r > -1.0, ErrorKind::Parameter, "Riesz exponent must be > -1");
      break;
    case KernelFamily::ThinPlate:
      only(false, false, false, false, false);
      break;
  }
}

KernelSpec KernelSpec::gauss(double sigma, int dim) {
  KernelParams p;
  p.sigma = sigma;
  return {KernelFamily::Gauss, p, dim};
}
KernelSpec KernelSpec::laplace(double alpha, int dim) {
  KernelParams p;
  p.alpha = alpha;
  return {KernelFamily::Laplace, p, dim};
}
KernelSpec KernelSpec::matern(double nu, double beta, int dim) {
  KernelParams p;
  p.beta = beta;
  p.nu = nu;
  return {KernelFamily::Matern, p, dim};
}
KernelSpec KernelSpec::riesz(double r, int dim) {
  KernelParams p;
  p.r = r;
  return {KernelFamily::Riesz, p, dim};
}
KernelSpec KernelSpec::thin_plate(int dim) { return {KernelFamily::ThinPlate, KernelParams{}, dim}; }

KernelSpec KernelSpec::from_scale(KernelFamily family, double scale, int dim, double nu, double r) {
  require(std::isfinite(scale) && scale > 0.0, ErrorKind::Parameter, "kernel scale must be positive");
  switch (family) {
    case KernelFamily::Gauss: return gauss(scale, dim);
    case KernelFamily::Laplace: return laplace(1.0 / scale, dim);
    case KernelFamily::Matern: return matern(nu, scale, dim);
    case KernelFamily::Riesz: return riesz(r, dim);
    case KernelFamily::ThinPlate: return thin_plate(dim);
  }
  fail(ErrorKind::Parameter, "unknown family");
}

double KernelSpec::sigma() const {
  require(params_.sigma.has_value(), ErrorKind::Parameter, "kernel has no sigma");
  return *params_.sigma;
}
double KernelSpec::alpha() const {
  require(params_.alpha.has_value(), ErrorKind::Parameter, "kernel has no alpha");
  return *params_.alpha;
}
double KernelSpec::beta() const {
  require(params_.beta.has_value(), ErrorKind::Parameter, "kernel has no beta");
  return *params_.beta;
}
double KernelSpec::nu() const {
  require(params_.nu.has_value(), ErrorKind::Parameter, "kernel has no nu");
  return *params_.nu;
}
double KernelSpec::r() const {
  require(params_.r.has_value(), ErrorKind::Parameter, "kernel has no Riesz exponent");
  return *params_.r;
}

bool KernelSpec::positive_definite() const noexcept {
  return family_ == KernelFamily::Gauss || family_ == KernelFamily::Laplace || family_ == KernelFamily::Matern;
}

double KernelSpec::length_scale() const {
  switch (family_) {
    case KernelFamily::Gauss: return sigma();
    case KernelFamily::Laplace: return 1.0 / alpha();
    case KernelFamily::Matern: return beta();
    default: break;
  }
  fail(ErrorKind::Capability, std::string("kernel ") + to_string(family_) + " has no length scale");
}

KernelSpec KernelSpec::rescaled(double tau) const {
  require(std::isfinite(tau) && tau > 0.0, ErrorKind::Parameter, "rescaling factor must be positive");
  KernelParams p = params_;
  if (p.sigma) *p.sigma *= tau;
  if (p.alpha) *p.alpha /= tau;
  if (p.beta) *p.beta *= tau;
  return {family_, p, dim_};
}

KernelSpec KernelSpec::with_dim(int dim) const { return {family_, params_, dim}; }

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(family_) << "(d=" << dim_;
  if (params_.sigma) os << ",sigma=" << *params_.sigma;
  if (params_.alpha) os << ",alpha=" << *params_.alpha;
  if (params_.beta) os << ",beta=" << *params_.beta;
  if (params_.nu) os << ",nu=" << *params_.nu;
  if (params_.r) os << ",r=" << *params_.r;
  os << ")";
  return os.str();
}

double thin_plate_constant(int dim) {
  return 0.5 * dim * (harmonic(0.5 * dim) - 2.0 + std::log(4.0));
}

double riesz_constant(int dim, double r) {
  return std::sqrt(kPi) *
         std::exp(std::lgamma(0.5 * (dim + r)) - std::lgamma(0.5 * dim) - std::lgamma(0.5 * (r + 1.0)));
}

double eval_F(const KernelSpec& k, double t) {
  check_t(t);
  switch (k.family()) {
    case KernelFamily::Gauss: return std::exp(-t * t / (2.0 * k.sigma() * k.sigma()));
    case KernelFamily::Laplace: return std::exp(-k.alpha() * t);
    case KernelFamily::Matern: return matern_F(k.nu(), std::sqrt(2.0 * k.nu()) * t / k.beta());
    case KernelFamily::Riesz: {
      const double r = k.r();
      if (t == 0.0) {
        if (r > 0.0) return 0.0;
        if (r == 0.0) return -1.0;
        fail(ErrorKind::Domain, "Riesz kernel with negative exponent is singular at 0");
      }
      return -std::pow(t, r);
    }
    case KernelFamily::ThinPlate: return t == 0.0 ? 0.0 : t * t * std::log(t);
  }
  return 0.0;
}

double eval_f_with(const KernelSpec& k, double t, SlicedPath path) {
  check_t(t);
  const int d = k.dim();
  switch (k.family()) {
    case KernelFamily::Riesz: return riesz_constant(d, k.r()) * eval_F(k, t);
    case KernelFamily::ThinPlate:
      return t == 0.0 ? 0.0 : d * t * t * std::log(t) + thin_plate_constant(d) * t * t;
    default: break;
  }
  if (t == 0.0) return 1.0;
  if (path == SlicedPath::Quadrature) return sliced_by_quadrature(k, t);
  if (path == SlicedPath::Auto && d == 3) {
    // f = (t F(t))'
    switch (k.family()) {
      case KernelFamily::Gauss: {
        const double z = t * t / (2.0 * k.sigma() * k.sigma());
        return std::exp(-z) * (1.0 - 2.0 * z);
      }
      case KernelFamily::Laplace: {
        const double x = k.alpha() * t;
        return std::exp(-x) * (1.0 - x);
      }
      case KernelFamily::Matern: {
        const double s = std::sqrt(2.0 * k.nu()) * t / k.beta();
        return matern_F(k.nu(), s) - matern_tdF(k.nu(), s);
      }
      default: break;
    }
  }
  if (auto v = sliced_by_series(k, t)) return *v;
  if (path == SlicedPath::Series)
    fail(ErrorKind::Numerical, "series evaluation of f is ill-conditioned at this argument");
  return sliced_by_quadrature(k, t);
}

double eval_f(const KernelSpec& k, double t) { return eval_f_with(k, t, SlicedPath::Auto); }

double spectral_density_1d(const KernelSpec& k, double omega) {
  require(std::isfinite(omega), ErrorKind::Domain, "frequency must be finite");
  const int d = k.dim();
  const double w = std::fabs(omega);
  if (w == 0.0) {
    if (d > 1) return 0.0;
  }
  const double logw = std::log(w);
  switch (k.family()) {
    case KernelFamily::Gauss: {
      const double s = k.sigma();
      const double u = 2.0 * kPi * kPi * s * s * w * w;
      const double lg = 0.5 * std::log(2.0) + std::log(kPi * s) - u + 0.5 * (d - 1) * std::log(u) - std::lgamma(0.5 * d);
      return std::exp(lg);
    }
    case KernelFamily::Laplace: {
      const double a = k.alpha();
      const double lg = std::lgamma(0.5 * (d + 1)) + d * std::log(2.0) + (d - 0.5) * std::log(kPi) + (d - 1) * logw -
                        std::lgamma(0.5 * d) - d * std::log(a) -
                        0.5 * (d + 1) * std::log1p(4.0 * kPi * kPi * w * w / (a * a));
      return std::exp(lg);
    }
    case KernelFamily::Matern: {
      const double nu = k.nu(), b = k.beta();
      const double lg = std::lgamma(nu + 0.5 * d) + 0.5 * d * std::log(2.0) + d * std::log(kPi) + d * std::log(b) +
                        (d - 1) * logw - std::lgamma(0.5 * d) - std::lgamma(nu) - 0.5 * d * std::log(nu) -
                        0.5 * (2.0 * nu + d) * std::log1p(2.0 * kPi * kPi * b * b * w * w / nu);
      return std::exp(lg);
    }
    default: break;
  }
  fail(ErrorKind::Capability, std::string("kernel ") + to_string(k.family()) +
                                  " has no 1D spectral density (its transform is not a function)");
}

double median_rule(const Matrix& a, const Matrix& b, const ScaleRule& rule, std::uint64_t seed) {
  require(a.rows() > 0 && b.rows() > 0, ErrorKind::Parameter, "median rule needs non-empty point sets");
  require(a.cols() == b.cols(), ErrorKind::Parameter, "median rule point sets differ in dimension");
  require(rule.gamma > 0.0 && std::isfinite(rule.gamma), ErrorKind::Parameter, "median rule gamma must be positive");
  require(rule.sample_size >= 1, ErrorKind::Parameter, "median rule sample size must be >= 1");
  auto canonical = [](const Matrix& m) {
    std::vector<Eigen::Index> idx(m.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(i, c) < m(j, c)) return true;
        if (m(i, c) > m(j, c)) return false;
      }
      return false;
    });
    return idx;
  };
  const auto ia = canonical(a);
  const auto ib = canonical(b);
  const auto na = static_cast<std::uint64_t>(a.rows());
  const auto nb = static_cast<std::uint64_t>(b.rows());
  std::vector<double> dist;
  const bool exhaustive = nb <= rule.sample_size / na;  // na * nb <= sample_size without overflow
  if (exhaustive) {
    dist.reserve(na * nb);
    for (std::uint64_t i = 0; i < na; ++i)
      for (std::uint64_t j = 0; j < nb; ++j) dist.push_back((a.row(ia[i]) - b.row(ib[j])).norm());
  } else {
    Rng rng(seed, 0x6d656469616eULL);
    dist.reserve(rule.sample_size);
    for (std::size_t s = 0; s < rule.sample_size; ++s) {
      const auto i = rng.below(na);
      const auto j = rng.below(nb);
      dist.push_back((a.row(ia[i]) - b.row(ib[j])).norm());
    }
  }
  const std::size_t n = dist.size();
  std::nth_element(dist.begin(), dist.begin() + n / 2, dist.end());
  double med = dist[n / 2];
  if (n % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + n / 2);
    med = 0.5 * (med + lower);
  }
  require(*std::max_element(dist.begin(), dist.end()) > 0.0, ErrorKind::Degenerate,
          "all sampled pair distances are zero");
  if (med == 0.0) fail(ErrorKind::Degenerate, "median pair distance is zero");
  return rule.gamma * med;
}

double median_norm(const Matrix& a, double gamma) {
  require(a.rows() > 0, ErrorKind::Parameter, "median norm needs a non-empty point set");
  std::vector<double> n(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) n[i] = a.row(i).norm();
  const std::size_t m = n.size();
  std::nth_element(n.begin(), n.begin() + m / 2, n.end());
  double med = n[m / 2];
  if (m % 2 == 0) med = 0.5 * (med + *std::max_element(n.begin(), n.begin() + m / 2));
  if (med == 0.0) fail(ErrorKind::Degenerate, "median norm is zero");
  return gamma * med;
}

double sample_projection(Rng& rng, int dim) {
  require(dim >= 2, ErrorKind::Parameter, "projection sampler needs d >= 2");
  return 2.0 * rng.beta_symmetric(0.5 * (dim - 1)) - 1.0;
}

}  // namespace qmcslice
