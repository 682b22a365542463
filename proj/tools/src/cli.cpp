#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "qmcslice/analysis.hpp"
#include "qmcslice/dataset.hpp"
#include "qmcslice/directions.hpp"
#include "qmcslice/error.hpp"
#include "qmcslice/fastsum.hpp"
#include "qmcslice/kernels.hpp"
#include "qmcslice/rng.hpp"

namespace qmcslice::cli {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kTagStream = 0x73747265616d;
constexpr std::uint64_t kTagDirs = 0x64697273;
constexpr std::uint64_t kTagRot = 0x726f74;
constexpr std::uint64_t kTagMethod = 0x6d657468;
constexpr std::uint64_t kTagTargets = 0x79;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const auto& p : split(s, ',')) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(p, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    require(pos == p.size(), ErrorKind::Parameter, std::string("invalid integer in ") + what + ": '" + p + "'");
    out.push_back(v);
  }
  require(!out.empty(), ErrorKind::Parameter, std::string(what) + " is empty");
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(p, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    require(pos == p.size(), ErrorKind::Parameter, std::string("invalid number in ") + what + ": '" + p + "'");
    out.push_back(v);
  }
  require(!out.empty(), ErrorKind::Parameter, std::string(what) + " is empty");
  return out;
}

// Options shared by most subcommands.
struct Common {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> stream;
  int threads = 1;
  std::string out;

  std::uint64_t effective_seed() const {
    std::uint64_t s = 0;
    if (stream) {
      s = *stream;
    } else if (const char* env = std::getenv("QMCSLICE_STREAM")) {
      try {
        s = std::stoull(env);
      } catch (const std::exception&) {
        fail(ErrorKind::Parameter, "QMCSLICE_STREAM must be a nonnegative integer");
      }
    }
    return s == 0 ? seed : derive_seed(seed, kTagStream, s);
  }

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--stream", stream, "RNG stream offset (default: $QMCSLICE_STREAM or 0)");
    app->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    app->add_option("--out", out, "output path (relative paths go to $QMCSLICE_OUTPUT_DIR)");
  }
};

std::string resolve_output(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (const char* dir = std::getenv("QMCSLICE_OUTPUT_DIR"); dir && *dir && p.is_relative()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorKind::Io, std::string("cannot create output directory ") + dir);
    p = fs::path(dir) / p;
  }
  return p.string();
}

// Writes text to --out or to the given stream.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  const std::string path = resolve_output(out_path);
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open " + path + " for writing");
  f << text;
  require(static_cast<bool>(f), ErrorKind::Io, "write failed for " + path);
}

struct KernelOpts {
  std::string family = "gauss";
  std::optional<double> sigma, alpha, beta, nu, r;
  std::string scale = "auto";
  double gamma = 1.0;
  std::size_t median_sample = 1000;

  void add(CLI::App* app) {
    app->add_option("--kernel", family, "gauss, laplace, matern, riesz or thinplate");
    app->add_option("--sigma", sigma, "Gauss length scale");
    app->add_option("--alpha", alpha, "Laplace decay");
    app->add_option("--beta", beta, "Matern scale");
    app->add_option("--nu", nu, "Matern smoothness (default 1.5)");
    app->add_option("--r", r, "Riesz exponent (default 1)");
    app->add_option("--scale", scale, "length scale, or 'auto' for the median rule");
    app->add_option("--gamma", gamma, "median rule factor");
    app->add_option("--median-sample", median_sample, "pairs sampled by the median rule");
  }

  bool explicit_params() const { return sigma || alpha || beta || r; }

  // `auto_scale` is called only when a positive definite kernel needs the median rule.
  KernelSpec resolve(int d, const std::function<double()>& auto_scale) const {
    const KernelFamily fam = parse_family(family);
    KernelParams p;
    switch (fam) {
      case KernelFamily::Gauss: p.sigma = sigma; break;
      case KernelFamily::Laplace: p.alpha = alpha; break;
      case KernelFamily::Matern:
        p.beta = beta;
        p.nu = nu.value_or(1.5);
        break;
      case KernelFamily::Riesz: p.r = r.value_or(1.0); break;
      case KernelFamily::ThinPlate: break;
    }
    const bool pd = fam == KernelFamily::Gauss || fam == KernelFamily::Laplace || fam == KernelFamily::Matern;
    const bool have = fam == KernelFamily::Gauss ? sigma.has_value()
                      : fam == KernelFamily::Laplace ? alpha.has_value()
                      : fam == KernelFamily::Matern  ? beta.has_value()
                                                     : true;
    if (!pd || have) return KernelSpec(fam, p, d);
    double m = 0.0;
    if (scale == "auto") {
      require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::Parameter, "gamma must be positive");
      m = auto_scale();
    } else {
      m = parse_double_list(scale, "--scale").front();
    }
    return KernelSpec::from_scale(fam, m, d, nu.value_or(1.5), r.value_or(1.0));
  }
};

struct DataOpts {
  std::string x, y, w;
  std::string synthetic = "blobs";
  int n = 1000, m = -1, d = 3;
  std::uint64_t data_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--x", x, "source points CSV");
    app->add_option("--y", y, "target points CSV (default: the sources)");
    app->add_option("--w", w, "weights, one per line (default: all 1)");
    app->add_option("--synthetic", synthetic, "blobs or cube, used when --x is absent");
    app->add_option("--n", n, "synthetic source count");
    app->add_option("--m", m, "synthetic target count (default: n)");
    app->add_option("--d", d, "dimension of synthetic data");
    app->add_option("--data-seed", data_seed, "seed of the synthetic data");
  }

  SummationProblem load() const {
    Matrix xs, ys;
    if (!x.empty()) {
      xs = read_matrix_csv(x);
      ys = y.empty() ? xs : read_matrix_csv(y);
    } else {
      require(n >= 1 && d >= 2, ErrorKind::Parameter, "synthetic data needs n >= 1 and d >= 2");
      const int mm = m < 0 ? n : m;
      require(mm >= 1, ErrorKind::Parameter, "synthetic data needs m >= 1");
      if (synthetic == "blobs") {
        xs = gaussian_blobs(n, d, data_seed);
        ys = gaussian_blobs(mm, d, derive_seed(data_seed, kTagTargets, 0));
      } else if (synthetic == "cube") {
        xs = uniform_cube(n, d, data_seed);
        ys = uniform_cube(mm, d, derive_seed(data_seed, kTagTargets, 0));
      } else {
        fail(ErrorKind::Parameter, "unknown synthetic generator '" + synthetic + "'");
      }
    }
    require(xs.cols() == ys.cols(), ErrorKind::Parameter, "sources and targets differ in dimension");
    Vector ws = w.empty() ? Vector::Ones(xs.rows()) : read_vector(w);
    SummationProblem prob;
    prob.x = std::move(xs);
    prob.y = std::move(ys);
    prob.w = std::move(ws);
    prob.validate();
    return prob;
  }
};

enum class Backend { Naive, Direct, Fourier, Sorting, Rff, Orf, RffK };

struct Method {
  Backend backend;
  std::string dirs;  // empty for naive / rff / orf
  std::string label;

  bool uses_dirs() const { return !dirs.empty(); }
};

Method parse_method(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string b = spec.substr(0, colon);
  std::string dirs = colon == std::string::npos ? "" : spec.substr(colon + 1);
  Method m{Backend::Naive, "", spec};
  if (b == "naive") m.backend = Backend::Naive;
  else if (b == "direct") m.backend = Backend::Direct;
  else if (b == "fourier") m.backend = Backend::Fourier;
  else if (b == "sorting") m.backend = Backend::Sorting;
  else if (b == "rff") m.backend = Backend::Rff;
  else if (b == "orf") m.backend = Backend::Orf;
  else if (b == "rffk") m.backend = Backend::RffK;
  else fail(ErrorKind::Parameter, "unknown backend '" + b + "' in method '" + spec + "'");
  const bool sliced = m.backend == Backend::Direct || m.backend == Backend::Fourier || m.backend == Backend::Sorting ||
                      m.backend == Backend::RffK;
  if (sliced) {
    if (dirs.empty()) dirs = "iid";
    parse_generator(dirs);
    m.dirs = dirs;
    m.label = b + ":" + dirs;
  } else {
    require(dirs.empty(), ErrorKind::Parameter, "backend '" + b + "' takes no direction generator");
  }
  return m;
}

struct DirOpts {
  std::string dirs_file;
  int steps = 0;
  double step_size = 0.01;
  bool sobol_shift = false;
  int rffk_k = 10;

  void add(CLI::App* app, bool rffk) {
    app->add_option("--dirs-file", dirs_file, "direction file for file / design generators");
    app->add_option("--steps", steps, "distance design optimizer steps (0: 10 d P)");
    app->add_option("--step-size", step_size, "distance design optimizer step size");
    app->add_flag("--sobol-shift", sobol_shift, "apply a seeded digital shift to Sobol points");
    if (rffk) app->add_option("--rffk-k", rffk_k, "features per slice of the RFF-k backend");
  }
};

class DirectionFactory {
 public:
  DirectionFactory(DirOpts opts, int threads) : opts_(std::move(opts)), threads_(threads) {}

  // Deterministic sets are rotated by a Haar matrix when `randomize_rep` is set.
  DirectionSet make(const std::string& name, int P, int d, std::uint64_t seed, std::optional<int> randomize_rep) {
    const Generator g = parse_generator(name);
    const auto rep_seed = derive_seed(seed, kTagDirs, static_cast<std::uint64_t>(randomize_rep.value_or(0)));
    DirectionSet base;
    bool deterministic = false;
    switch (g) {
      case Generator::IID: return iid_uniform(P, d, rep_seed);
      case Generator::Orthogonal: return orthogonal(P, d, rep_seed);
      case Generator::SobolSphere:
        if (opts_.sobol_shift) return sobol_sphere(P, d, rep_seed);
        base = sobol_sphere(P, d);
        deterministic = true;
        break;
      case Generator::Distance: {
        auto key = std::make_pair(P, d);
        auto it = designs_.find(key);
        if (it == designs_.end()) {
          EnergyOptConfig cfg;
          cfg.steps = opts_.steps;
          cfg.step_size = opts_.step_size;
          cfg.seed = derive_seed(seed, kTagDirs, 0x64657369);
          cfg.threads = threads_;
          it = designs_.emplace(key, distance_design(P, d, cfg)).first;
        }
        base = it->second;
        deterministic = true;
        break;
      }
      case Generator::File:
      case Generator::SphericalDesign:
        require(!opts_.dirs_file.empty(), ErrorKind::Parameter, "generator '" + name + "' needs --dirs-file");
        base = load_directions(opts_.dirs_file);
        require(base.d() == d, ErrorKind::Parameter, "direction file dimension does not match the data");
        base.generator = g;
        deterministic = true;
        break;
    }
    if (deterministic && randomize_rep) return randomize(base, derive_seed(seed, kTagRot, *randomize_rep));
    return base;
  }

  int rffk_k() const { return opts_.rffk_k; }

 private:
  DirOpts opts_;
  int threads_;
  std::map<std::pair<int, int>, DirectionSet> designs_;
};

struct FourierCli {
  std::optional<int> n_ft;
  std::optional<double> threshold;
  bool allow_periodization = false;

  void add(CLI::App* app) {
    app->add_option("--nft", n_ft, "Fourier modes (default per kernel)");
    app->add_option("--threshold", threshold, "Fourier threshold T");
    app->add_flag("--allow-periodization", allow_periodization,
                  "numeric periodization for thin-plate and Riesz kernels");
  }

  FourierOptions options() const {
    FourierOptions o;
    o.n_ft = n_ft;
    o.threshold = threshold;
    o.allow_numeric_periodization = allow_periodization;
    return o;
  }
};

// Evaluates one method; direction construction happens before timing starts.
struct Evaluation {
  Vector s;
  double seconds = 0.0;
  int size = 0;  // P or D
};

Evaluation evaluate(const Method& m, const SummationProblem& prob, const KernelSpec& kernel, int P,
                    DirectionFactory& factory, const FourierOptions& fopt, std::optional<FourierPlan>& plan,
                    std::uint64_t seed, std::optional<int> rep, int threads) {
  Evaluation ev;
  ev.size = P;
  std::optional<DirectionSet> dirs;
  if (m.uses_dirs()) {
    dirs = factory.make(m.dirs, P, prob.dim(), seed, rep);
    ev.size = dirs->P();
  }
  const std::uint64_t feature_seed = derive_seed(seed, kTagMethod, static_cast<std::uint64_t>(rep.value_or(0)));
  const auto t0 = Clock::now();
  switch (m.backend) {
    case Backend::Naive: ev.s = naive_sum(prob, kernel, threads); break;
    case Backend::Direct: ev.s = sliced_direct_sum(prob, kernel, *dirs, threads); break;
    case Backend::Sorting: ev.s = sorting_slice_sum(prob, kernel, *dirs, threads); break;
    case Backend::Fourier:
      if (!plan) plan = build_fourier_plan(prob, kernel, fopt);
      ev.s = fourier_slice_sum(prob, *plan, *dirs, threads);
      break;
    case Backend::Rff: ev.s = rff_sum(prob, kernel, P, feature_seed, threads); break;
    case Backend::Orf: ev.s = orf_sum(prob, kernel, P, feature_seed, threads); break;
    case Backend::RffK: ev.s = rff_k_slice_sum(prob, kernel, *dirs, factory.rffk_k(), feature_seed, threads); break;
  }
  ev.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return ev;
}

std::string describe_plan(const FourierPlan& plan) {
  std::ostringstream os;
  os << "tau=" << num(plan.tau) << " n_ft=" << plan.n_ft << " threshold=" << num(plan.threshold);
  if (plan.numeric_periodization) os << " periodization=numeric";
  return os.str();
}

// ---- subcommands ---------------------------------------------------------

struct GenDirs {
  Common common;
  DirOpts dir;
  std::string method = "iid";
  int d = 3, P = 16;
  std::string in;

  void setup(CLI::App* app) {
    common.add(app);
    dir.add(app, false);
    app->add_option("--method", method, "iid, sobol, orthogonal, distance or file")->required();
    app->add_option("--d", d, "dimension");
    app->add_option("--p", P, "number of directions");
    app->add_option("--in", in, "input file for --method file");
  }

  int run(std::ostream& out) {
    const std::uint64_t seed = common.effective_seed();
    DirectionSet dirs;
    if (method == "file" || method == "design") {
      require(!in.empty() || !dir.dirs_file.empty(), ErrorKind::Parameter, "--method file needs --in");
      dirs = load_directions(in.empty() ? dir.dirs_file : in);
    } else {
      require(P >= 1, ErrorKind::Parameter, "--p must be >= 1");
      require(d >= 2, ErrorKind::Parameter, "--d must be >= 2");
      DirectionFactory factory(dir, common.threads);
      dirs = factory.make(method, P, d, seed, std::nullopt);
    }
    dirs.validate(1e-12);
    const std::string path = resolve_output(common.out.empty() ? "directions.txt" : common.out);
    save_directions(dirs, path);
    out << "generator=" << to_string(dirs.generator) << " P=" << dirs.P() << " d=" << dirs.d() << " file=" << path
        << "\n";
    out << "E_sym=" << num(energy_sym(dirs)) << "\n";
    return kOk;
  }
};

struct Sum {
  Common common;
  KernelOpts kernel;
  DataOpts data;
  DirOpts dir;
  FourierCli fourier;
  std::string method = "fourier:iid";
  int P = 64;
  bool compare_naive = false;
  bool randomize_dirs = false;

  void setup(CLI::App* app) {
    common.add(app);
    kernel.add(app);
    data.add(app);
    dir.add(app, true);
    fourier.add(app);
    app->add_option("--method", method, "backend:dirs, e.g. fourier:distance, sorting:sobol, naive, rff");
    app->add_option("--p", P, "slices (or features for rff/orf)");
    app->add_flag("--compare-naive", compare_naive, "also print the relative L1 error against the naive sum");
    app->add_flag("--randomize", randomize_dirs, "apply a random rotation to deterministic direction sets");
  }

  int run(std::ostream& out, std::ostream& err) {
    const std::uint64_t seed = common.effective_seed();
    const Method m = parse_method(method);
    require(P >= 1, ErrorKind::Parameter, "--p must be >= 1");
    const auto prob = data.load();
    const auto k = kernel.resolve(prob.dim(), [&] {
      return median_rule(prob.x, prob.y, ScaleRule{kernel.gamma, kernel.median_sample}, seed);
    });
    DirectionFactory factory(dir, common.threads);
    std::optional<FourierPlan> plan;
    const auto ev = evaluate(m, prob, k, P, factory, fourier.options(), plan, seed,
                             randomize_dirs ? std::optional<int>(0) : std::nullopt, common.threads);
    std::ostringstream values;
    for (Eigen::Index i = 0; i < ev.s.size(); ++i) values << num(ev.s(i)) << "\n";
    emit(values.str(), common.out, out);
    std::ostream& info = common.out.empty() ? err : out;
    info << "method=" << m.label << " kernel=" << k.describe() << " N=" << prob.N() << " M=" << prob.M();
    if (m.backend != Backend::Naive) info << " P=" << ev.size;
    info << "\n";
    if (plan) info << describe_plan(*plan) << "\n";
    info << "time_s=" << num(ev.seconds) << "\n";
    if (compare_naive) info << "rel_l1_vs_naive=" << num(relative_l1(ev.s, naive_sum(prob, k, common.threads))) << "\n";
    return kOk;
  }
};

struct Bench {
  Common common;
  KernelOpts kernel;
  DataOpts data;
  DirOpts dir;
  FourierCli fourier;
  std::string methods = "fourier:iid,fourier:sobol,fourier:distance";
  std::string p_list;
  std::string profile = "default";
  int reps = 5;

  void setup(CLI::App* app) {
    common.add(app);
    kernel.add(app);
    data.add(app);
    dir.add(app, true);
    fourier.add(app);
    app->add_option("--methods", methods, "comma separated backend:dirs list");
    app->add_option("--p-list", p_list, "comma separated P (or D) values");
    app->add_option("--profile", profile, "default, or equal-time: P = 5 * 2^k with D = 2P and RFF-k on P/2 slices")
        ->check(CLI::IsMember({"default", "equal-time"}));
    app->add_option("--reps", reps, "repetitions per cell")->check(CLI::Range(1, 100000));
  }

  int run(std::ostream& out, std::ostream& err) {
    const std::uint64_t seed = common.effective_seed();
    std::vector<Method> ms;
    for (const auto& s : split(methods, ',')) ms.push_back(parse_method(s));
    require(!ms.empty(), ErrorKind::Parameter, "--methods is empty");
    std::vector<int> Ps;
    if (!p_list.empty()) {
      Ps = parse_int_list(p_list, "--p-list");
    } else {
      const int kmax = profile == "equal-time" ? 7 : 5;
      for (int kk = 0; kk <= kmax; ++kk) Ps.push_back(5 << kk);
    }
    for (int p : Ps) require(p >= 1, ErrorKind::Parameter, "--p-list entries must be >= 1");
    const auto prob = data.load();
    const auto k = kernel.resolve(prob.dim(), [&] {
      return median_rule(prob.x, prob.y, ScaleRule{kernel.gamma, kernel.median_sample}, seed);
    });
    err << "kernel=" << k.describe() << " N=" << prob.N() << " M=" << prob.M() << "\n";
    const Vector exact = naive_sum(prob, k, common.threads);
    DirectionFactory factory(dir, common.threads);
    const FourierOptions fopt = fourier.options();
    std::optional<FourierPlan> plan;
    std::ostringstream csv;
    csv << "method,P_or_D,time_s,rel_l1_mean,rel_l1_std,seed\n";
    for (const auto& m : ms) {
      for (int p : Ps) {
        int size = p;
        if (profile == "equal-time") {
          if (m.backend == Backend::Rff || m.backend == Backend::Orf) size = 2 * p;
          if (m.backend == Backend::RffK) size = std::max(1, p / 2);
        }
        double t_sum = 0.0, e_sum = 0.0, e_sq = 0.0;
        int used = size;
        for (int r = 0; r < reps; ++r) {
          const auto ev = evaluate(m, prob, k, size, factory, fopt, plan, seed, r, common.threads);
          const double e = relative_l1(ev.s, exact);
          used = ev.size;
          t_sum += ev.seconds;
          e_sum += e;
          e_sq += e * e;
        }
        const double mean = e_sum / reps;
        const double sd = reps > 1 ? std::sqrt(std::max(0.0, (e_sq - reps * mean * mean) / (reps - 1))) : 0.0;
        csv << m.label << "," << used << "," << num(t_sum / reps) << "," << num(mean) << "," << num(sd) << ","
            << seed << "\n";
      }
    }
    if (plan) err << describe_plan(*plan) << "\n";
    emit(csv.str(), common.out, out);
    return kOk;
  }
};

struct VarianceCheck {
  Common common;
  KernelOpts kernel;
  int d = 3;
  std::string x_norms = "1";
  std::size_t samples = 1000000;

  void setup(CLI::App* app) {
    common.add(app);
    kernel.add(app);
    app->add_option("--d", d, "dimension");
    app->add_option("--x-norm", x_norms, "comma separated values of ||x||");
    app->add_option("--samples", samples, "Monte Carlo samples");
  }

  int run(std::ostream& out) {
    const std::uint64_t seed = common.effective_seed();
    require(samples >= 2, ErrorKind::Parameter, "--samples must be >= 2");
    const auto k = kernel.resolve(d, [] { return 1.0; });
    std::ostringstream csv;
    csv << "kernel,d,x_norm,closed_form,tag,mc,stderr,z\n";
    std::uint64_t i = 0;
    for (double x : parse_double_list(x_norms, "--x-norm")) {
      const auto rep = variance_mc(k, x, samples, derive_seed(seed, 0x766172, i++));
      csv << '"' << k.describe() << "\"," << d << "," << num(x) << ",";
      if (rep.closed_form) {
        const double z = rep.mc_stderr > 0 ? (rep.mc_estimate - rep.closed_form->value) / rep.mc_stderr : 0.0;
        csv << num(rep.closed_form->value) << "," << to_string(rep.closed_form->tag) << "," << num(rep.mc_estimate)
            << "," << num(rep.mc_stderr) << "," << num(z) << "\n";
      } else {
        csv << ",," << num(rep.mc_estimate) << "," << num(rep.mc_stderr) << ",\n";
      }
    }
    emit(csv.str(), common.out, out);
    return kOk;
  }
};

struct Rate {
  Common common;
  KernelOpts kernel;
  DirOpts dir;
  int d = 3;
  std::string generators = "iid,sobol,distance";
  std::string p_list = "8,16,32,64,128,256,512";
  int reps = 10;
  int n_x = 200;
  double x_variance = 0.1;
  std::vector<std::string> designs;
  std::string detail;

  void setup(CLI::App* app) {
    common.add(app);
    kernel.add(app);
    dir.add(app, false);
    app->add_option("--d", d, "dimension");
    app->add_option("--generators", generators, "comma separated generators");
    app->add_option("--p-list", p_list, "comma separated P values (at least two)");
    app->add_option("--reps", reps, "direction realizations per P");
    app->add_option("--n-x", n_x, "points x per realization");
    app->add_option("--x-variance", x_variance, "x ~ N(0, v I)");
    app->add_option("--design", designs, "P:path of a direction file for the file / design generators");
    app->add_option("--detail", detail, "also write the per-P table to this file");
  }

  int run(std::ostream& out) {
    const std::uint64_t seed = common.effective_seed();
    const auto Ps = parse_int_list(p_list, "--p-list");
    require(Ps.size() >= 2, ErrorKind::Parameter, "rate fitting needs at least two P values");
    require(n_x >= 1 && reps >= 1, ErrorKind::Parameter, "--reps and --n-x must be >= 1");
    require(x_variance > 0.0, ErrorKind::Parameter, "--x-variance must be positive");
    const auto k = kernel.resolve(d, [&] {
      Rng rng(seed, 0x70696c6f74);
      Matrix pilot(n_x, d);
      for (int i = 0; i < n_x; ++i)
        for (int j = 0; j < d; ++j) pilot(i, j) = std::sqrt(x_variance) * rng.normal();
      return median_norm(pilot, kernel.gamma);
    });
    ExperimentConfig cfg;
    cfg.P_list = Ps;
    cfg.reps = reps;
    cfg.n_x = n_x;
    cfg.seed = seed;
    cfg.x_variance = x_variance;
    cfg.sobol_shift = dir.sobol_shift;
    cfg.optimizer.steps = dir.steps;
    cfg.optimizer.step_size = dir.step_size;
    cfg.threads = common.threads;
    for (const auto& spec : designs) {
      const auto c = spec.find(':');
      require(c != std::string::npos, ErrorKind::Parameter, "--design expects P:path");
      cfg.design_files[parse_int_list(spec.substr(0, c), "--design").front()] = spec.substr(c + 1);
    }
    std::ostringstream table, per_p;
    table << "kernel,d,generator,rate,intercept\n";
    bool first = true;
    for (const auto& g : split(generators, ',')) {
      cfg.generator = parse_generator(g);
      const auto rep = slicing_error_experiment(k, cfg);
      table << '"' << rep.kernel << "\"," << rep.d << "," << to_string(rep.generator) << "," << num(rep.rate) << ","
            << num(rep.intercept) << "\n";
      write_experiment_csv(rep, per_p, first);
      first = false;
    }
    if (!detail.empty()) emit(per_p.str(), detail, out);
    emit(table.str(), common.out, out);
    return kOk;
  }
};

struct GenData {
  Common common;
  std::string kind = "blobs";
  int n = 1000, d = 3, clusters = 8;
  double spread = 0.3;
  std::string weights_out;

  void setup(CLI::App* app) {
    common.add(app);
    app->add_option("--kind", kind, "blobs or cube")->check(CLI::IsMember({"blobs", "cube"}));
    app->add_option("--n", n, "number of points");
    app->add_option("--d", d, "dimension");
    app->add_option("--clusters", clusters, "blob count");
    app->add_option("--spread", spread, "blob standard deviation");
    app->add_option("--weights-out", weights_out, "also write uniform(0,1) weights here");
  }

  int run(std::ostream& out) {
    const std::uint64_t seed = common.effective_seed();
    require(n >= 1 && d >= 1, ErrorKind::Parameter, "--n and --d must be >= 1");
    const Matrix pts = kind == "blobs" ? gaussian_blobs(n, d, seed, clusters, spread) : uniform_cube(n, d, seed);
    const std::string path = resolve_output(common.out.empty() ? "points.csv" : common.out);
    write_matrix_csv(pts, path);
    out << "wrote " << n << "x" << d << " points to " << path << "\n";
    if (!weights_out.empty()) {
      Rng rng(seed, 0x77);
      Vector w(n);
      for (int i = 0; i < n; ++i) w(i) = rng.uniform();
      const std::string wpath = resolve_output(weights_out);
      write_vector(w, wpath);
      out << "wrote weights to " << wpath << "\n";
    }
    return kOk;
  }
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return kUsage;
    case ErrorKind::Parse:
    case ErrorKind::Io: return kParse;
    case ErrorKind::Capability: return kCapability;
    default: return kNumerical;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sliced kernel summation with QMC directions"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GenDirs gen_dirs;
  Sum sum;
  Bench bench;
  VarianceCheck variance;
  Rate rate;
  GenData gen_data;
  auto* c_gen = app.add_subcommand("gen-dirs", "generate a direction set");
  auto* c_sum = app.add_subcommand("sum", "compute one kernel sum");
  auto* c_bench = app.add_subcommand("bench", "error/time sweep against the naive sum");
  auto* c_var = app.add_subcommand("variance-check", "closed-form slicing variance vs Monte Carlo");
  auto* c_rate = app.add_subcommand("rate", "fitted convergence rates of the slicing error");
  auto* c_data = app.add_subcommand("gen-data", "write a synthetic point cloud");
  gen_dirs.setup(c_gen);
  sum.setup(c_sum);
  bench.setup(c_bench);
  variance.setup(c_var);
  rate.setup(c_rate);
  gen_data.setup(c_data);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("qmcslice");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (c_gen->parsed()) return gen_dirs.run(out);
    if (c_sum->parsed()) return sum.run(out, err);
    if (c_bench->parsed()) return bench.run(out, err);
    if (c_var->parsed()) return variance.run(out);
    if (c_rate->parsed()) return rate.run(out);
    if (c_data->parsed()) return gen_data.run(out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace qmcslice::cli
