#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qmcslice/directions.hpp"
#include "qmcslice/kernels.hpp"

namespace qmcslice {

enum class VarianceTag { Exact, Bound, Asymptotic };
const char* to_string(VarianceTag tag) noexcept;

struct ClosedFormVariance {
  double value = 0.0;
  VarianceTag tag = VarianceTag::Exact;
};

// Variance of f(|<xi, x>|) for xi uniform on the sphere, ||x|| = x_norm.
//   Riesz (r > 0): exact.  Gauss/Laplace with d = 3: exact.
//   Other positive definite cases: the bound F(0)^2 - F(||x||)^2.
//   Thin plate: the printed large-d asymptotic, tagged Asymptotic.
ClosedFormVariance variance_closed_form(const KernelSpec& kernel, double x_norm);

// Exact thin-plate variance for finite d (digamma/trigamma closed form).
double thin_plate_variance_exact(int dim, double x_norm);
// c1 = 8 - 3 gamma - log 8, c2 = 3/4 (psi1(5/2) + (psi(5/2) + log 2)^2) + 2 (gamma + log 2 - 2)^2.
std::pair<double, double> thin_plate_asymptotic_constants();

struct VarianceReport {
  std::optional<ClosedFormVariance> closed_form;
  double mc_estimate = 0.0;
  double mc_stderr = 0.0;
  std::size_t n_samples = 0;
  double x_norm = 0.0;
};

// Sample variance of f(x_norm |t|) with t drawn from the projection density.
VarianceReport variance_mc(const KernelSpec& kernel, double x_norm, std::size_t n_samples, std::uint64_t seed);
VarianceReport variance_mc(const std::function<double(double)>& f, int dim, double x_norm, std::size_t n_samples,
                           std::uint64_t seed);

struct ExperimentConfig {
  std::vector<int> P_list;
  Generator generator = Generator::IID;
  int reps = 10;
  int n_x = 200;
  std::uint64_t seed = 0;
  double x_variance = 0.1;  // x ~ N(0, x_variance I)
  // Deterministic sets (unshifted Sobol, distance designs, files) get a fresh
  // Haar rotation per repetition; if false their reps collapse to 1.
  bool randomize_deterministic = true;
  bool sobol_shift = false;
  EnergyOptConfig optimizer;                  // distance designs; seed is derived per P
  std::map<int, std::string> design_files;    // P -> path for File / SphericalDesign
  int threads = 1;
};

struct ExperimentReport {
  std::vector<int> P;
  std::vector<double> mean_error;
  std::vector<double> std_dev;    // across repetitions
  std::vector<double> std_error;  // std_dev / sqrt(reps)
  double rate = 0.0;
  double intercept = 0.0;
  Generator generator = Generator::IID;
  std::string kernel;
  int d = 0;
  int reps = 0;
  int n_x = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

ExperimentReport slicing_error_experiment(const KernelSpec& kernel, const ExperimentConfig& config);

// Least squares line through (log P, log error); returns (r, intercept) with r = -slope.
std::pair<double, double> fit_rate(const std::vector<double>& P, const std::vector<double>& errors);

// Columns generator,kernel,d,P,mean_error,std_error plus a trailer row whose P
// column reads "rate" and whose error columns hold the fitted rate and intercept.
void write_experiment_csv(const ExperimentReport& report, std::ostream& out, bool header = true);

}  // namespace qmcslice
