#include "qmcslice/directions.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qmcslice/error.hpp"
#include "qmcslice/parallel.hpp"
#include "qmcslice/rng.hpp"
#include "qmcslice/sobol.hpp"
#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {

constexpr std::uint64_t kTagIid = 0x696964;
constexpr std::uint64_t kTagOrth = 0x6f727468;
constexpr std::uint64_t kTagHaar = 0x68616172;

void check_shape(int P, int d) {
  require(P >= 1, ErrorKind::Parameter, "number of directions P must be >= 1");
  require(d >= 2, ErrorKind::Parameter, "dimension d must be >= 2");
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) /= m.row(i).norm();
}

// Energy and (tangential) gradient of E_sym; each row is accumulated in index
// order so the result does not depend on the thread count.
double energy_and_gradient(const Matrix& x, Matrix* grad, double clamp, int threads) {
  const Eigen::Index P = x.rows(), d = x.cols();
  std::vector<double> row_energy(P, 0.0);
  parallel_for(static_cast<std::size_t>(P), threads, [&](std::size_t b, std::size_t e, int) {
    std::vector<double> g(d);
    for (std::size_t pi = b; pi < e; ++pi) {
      const auto p = static_cast<Eigen::Index>(pi);
      const double* xp = x.row(p).data();
      std::fill(g.begin(), g.end(), 0.0);
      double acc = 0.0;
      for (Eigen::Index q = 0; q < P; ++q) {
        const double* xq = x.row(q).data();
        double nm = 0.0, np = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double a = xp[k] - xq[k], c = xp[k] + xq[k];
          nm += a * a;
          np += c * c;
        }
        nm = std::sqrt(nm);
        np = std::sqrt(np);
        acc += nm + np;
        if (grad && q != p) {
          const double im = nm > 0.0 ? 1.0 / std::max(nm, clamp) : 0.0;
          const double ip = np > 0.0 ? 1.0 / std::max(np, clamp) : 0.0;
          for (Eigen::Index k = 0; k < d; ++k) g[k] += (xp[k] - xq[k]) * im + (xp[k] + xq[k]) * ip;
        }
      }
      row_energy[pi] = -2.0 * acc;
      if (grad) {
        // d/dxi_p of -2 sum (both orderings) = -4 sum_q (...); project onto the tangent space.
        double radial = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          g[k] *= -4.0;
          radial += g[k] * xp[k];
        }
        for (Eigen::Index k = 0; k < d; ++k) (*grad)(p, k) = g[k] - radial * xp[k];
      }
    }
  });
  CompensatedSum total;
  for (double v : row_energy) total.add(v);
  return total.value();
}

}  // namespace

const char* to_string(Generator g) noexcept {
  switch (g) {
    case Generator::IID: return "iid";
    case Generator::SobolSphere: return "sobol";
    case Generator::Orthogonal: return "orthogonal";
    case Generator::Distance: return "distance";
    case Generator::SphericalDesign: return "spherical-design";
    case Generator::File: return "file";
  }
  return "unknown";
}

Generator parse_generator(const std::string& name) {
  if (name == "iid" || name == "mc") return Generator::IID;
  if (name == "sobol") return Generator::SobolSphere;
  if (name == "orthogonal" || name == "orth") return Generator::Orthogonal;
  if (name == "distance") return Generator::Distance;
  if (name == "spherical-design" || name == "design") return Generator::SphericalDesign;
  if (name == "file") return Generator::File;
  fail(ErrorKind::Parameter, "unknown direction generator '" + name + "'");
}

void DirectionSet::validate(double tol) const {
  check_shape(P(), d());
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    const double n = vectors.row(i).norm();
    require(std::isfinite(n) && std::fabs(n - 1.0) <= tol, ErrorKind::Parameter,
            "direction " + std::to_string(i) + " is not a unit vector");
  }
}

DirectionSet iid_uniform(int P, int d, std::uint64_t seed) {
  check_shape(P, d);
  Rng rng(seed, kTagIid);
  Matrix m(P, d);
  for (int i = 0; i < P; ++i) {
    double n2 = 0.0;
    do {
      for (int k = 0; k < d; ++k) m(i, k) = rng.normal();
      n2 = m.row(i).squaredNorm();
    } while (n2 == 0.0);
  }
  normalize_rows(m);
  return {std::move(m), Generator::IID, seed};
}

DirectionSet sobol_sphere(int P, int d, std::optional<std::uint64_t> seed) {
  check_shape(P, d);
  SobolEngine engine(d, seed);
  std::vector<double> u(d);
  engine.next(u.data());  // index 0
  Matrix m(P, d);
  int filled = 0;
  while (filled < P) {
    engine.next(u.data());
    bool zero_coord = false;
    for (double c : u) zero_coord |= (c == 0.0);
    if (zero_coord) continue;
    double n2 = 0.0;
    for (int k = 0; k < d; ++k) {
      m(filled, k) = inv_normal_cdf(u[k]);
      n2 += m(filled, k) * m(filled, k);
    }
    if (n2 == 0.0) continue;
    m.row(filled) /= std::sqrt(n2);
    ++filled;
  }
  return {std::move(m), Generator::SobolSphere, seed};
}

Matrix random_orthogonal(int d, std::uint64_t seed) {
  require(d >= 1, ErrorKind::Parameter, "orthogonal matrix dimension must be >= 1");
  Rng rng(seed, kTagHaar);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

DirectionSet orthogonal(int P, int d, std::uint64_t seed) {
  check_shape(P, d);
  Matrix m(P, d);
  const int blocks = (P + d - 1) / d;
  for (int b = 0; b < blocks; ++b) {
    const Matrix q = random_orthogonal(d, derive_seed(seed, kTagOrth, b));
    for (int j = 0; j < d && b * d + j < P; ++j) m.row(b * d + j) = q.col(j).transpose();
  }
  return {std::move(m), Generator::Orthogonal, seed};
}

DirectionSet randomize(const DirectionSet& dirs, std::uint64_t seed) {
  const Matrix a = random_orthogonal(dirs.d(), seed);
  DirectionSet out = dirs;
  out.vectors = dirs.vectors * a.transpose();
  return out;
}

double energy_sym(const DirectionSet& dirs) { return energy_and_gradient(dirs.vectors, nullptr, 0.0, 1); }

double energy_riesz(const DirectionSet& dirs, double exponent) {
  require(exponent > 0.0 && exponent < 2.0, ErrorKind::Domain, "distance energy exponent must lie in (0, 2)");
  const Matrix& x = dirs.vectors;
  CompensatedSum s;
  for (Eigen::Index p = 0; p < x.rows(); ++p)
    for (Eigen::Index q = 0; q < x.rows(); ++q)
      if (p != q) s.add(std::pow((x.row(p) - x.row(q)).norm(), exponent));
  return -s.value();
}

void EnergyOptConfig::validate() const {
  require(steps >= 0, ErrorKind::Parameter, "optimizer steps must be >= 1 (0 selects the default)");
  require(step_size > 0.0 && std::isfinite(step_size), ErrorKind::Parameter, "optimizer step size must be positive");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, ErrorKind::Parameter,
          "optimizer decay rates must lie in (0, 1)");
  require(pair_clamp > 0.0, ErrorKind::Parameter, "pair clamp must be positive");
  require(final_step_fraction > 0.0 && final_step_fraction <= 1.0, ErrorKind::Parameter,
          "final step fraction must lie in (0, 1]");
}

int EnergyOptConfig::resolved_steps(int P, int d) const { return steps > 0 ? steps : 10 * d * P; }

DirectionSet distance_design(int P, int d, const EnergyOptConfig& cfg, OptimizationTrace* trace) {
  check_shape(P, d);
  cfg.validate();
  DirectionSet start = iid_uniform(P, d, cfg.seed);
  Matrix x = start.vectors;
  const int T = cfg.resolved_steps(P, d);
  Matrix g(P, d), m = Matrix::Zero(P, d), v = Matrix::Zero(P, d);
  Matrix best = x;
  double best_e = std::numeric_limits<double>::infinity();
  if (trace) trace->best_energy.clear();
  const double decay = std::log(cfg.final_step_fraction) / std::max(1, T - 1);
  double b1t = 1.0, b2t = 1.0;
  for (int t = 0; t <= T; ++t) {
    const double e = energy_and_gradient(x, t < T ? &g : nullptr, cfg.pair_clamp, cfg.threads);
    if (!std::isfinite(e)) {
      DirectionSet last{best, Generator::Distance, cfg.seed};
      throw OptimizationDiverged("distance-design energy became non-finite at step " + std::to_string(t),
                                 std::move(last));
    }
    if (e < best_e) {
      best_e = e;
      best = x;
    }
    if (trace && t > 0) trace->best_energy.push_back(best_e);
    if (t == T) break;
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double lr = cfg.step_size * std::exp(decay * t);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double mh = m(i, k) / (1.0 - b1t);
        const double vh = v(i, k) / (1.0 - b2t);
        x(i, k) -= lr * mh / (std::sqrt(vh) + 1e-8);
      }
    normalize_rows(x);
  }
  return {std::move(best), Generator::Distance, cfg.seed};
}

void save_directions(const DirectionSet& dirs, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.precision(17);
  out << dirs.d() << ' ' << dirs.P() << '\n';
  for (Eigen::Index i = 0; i < dirs.vectors.rows(); ++i) {
    for (Eigen::Index k = 0; k < dirs.vectors.cols(); ++k) {
      if (k) out << ' ';
      out << dirs.vectors(i, k);
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing '" + path + "'");
}

DirectionSet load_directions(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_first;
  std::string line;
  int lineno = 0;
  std::vector<int> line_numbers;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == tok.size() && std::isfinite(v), ErrorKind::Parse,
              path + ":" + std::to_string(lineno) + ": malformed number '" + tok + "'");
      vals.push_back(v);
      if (rows.empty()) raw_first.push_back(tok);
    }
    if (vals.empty()) continue;
    rows.push_back(std::move(vals));
    line_numbers.push_back(lineno);
  }
  require(!rows.empty(), ErrorKind::Parse, path + ": no directions found");
  std::size_t first = 0;
  auto is_int = [](const std::string& s) { return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos; };
  if (rows[0].size() == 2 && is_int(raw_first[0]) && is_int(raw_first[1])) {
    const auto d = static_cast<std::size_t>(rows[0][0]);
    const auto P = static_cast<std::size_t>(rows[0][1]);
    if (d >= 2 && P == rows.size() - 1) first = 1;
  }
  const std::size_t d = rows[first].size();
  const std::size_t P = rows.size() - first;
  require(P >= 1, ErrorKind::Parse, path + ": header present but no rows");
  if (first == 1)
    require(d == static_cast<std::size_t>(rows[0][0]), ErrorKind::Parse, path + ": row length does not match header d");
  require(d >= 2, ErrorKind::Parse, path + ": directions need at least 2 coordinates");
  Matrix m(P, d);
  for (std::size_t i = 0; i < P; ++i) {
    const auto& r = rows[first + i];
    require(r.size() == d, ErrorKind::Parse,
            path + ":" + std::to_string(line_numbers[first + i]) + ": expected " + std::to_string(d) + " fields");
    for (std::size_t k = 0; k < d; ++k) m(i, k) = r[k];
    const double n = m.row(i).norm();
    require(std::fabs(n - 1.0) < 1e-6, ErrorKind::Parse,
            path + ":" + std::to_string(line_numbers[first + i]) + ": row is not a unit vector (norm " +
                std::to_string(n) + ")");
    if (std::fabs(n - 1.0) > 1e-14) m.row(i) /= n;
  }
  return {std::move(m), Generator::File, std::nullopt};
}

}  // namespace qmcslice
