#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qmcslice/error.hpp"
#include "qmcslice/analysis.hpp"
#include "qmcslice/kernels.hpp"
#include "qmcslice/special.hpp"

using namespace qmcslice;

TEST(Analysis, ClosedFormsInThreeDimensions) {
  const auto r = variance_closed_form(KernelSpec::riesz(1.0, 3), 1.0);
  EXPECT_EQ(r.tag, VarianceTag::Exact);
  EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-15);
  const auto l = variance_closed_form(KernelSpec::laplace(1.0, 3), 1.0);
  EXPECT_EQ(l.tag, VarianceTag::Exact);
  EXPECT_NEAR(l.value, (1 - 5 * std::exp(-2.0)) / 4, 1e-15);
  // High-precision quadrature reference; the series and erf branches meet at q = 2.
  EXPECT_NEAR(variance_closed_form(KernelSpec::gauss(1.0, 3), 1.0).value, 0.100268798145017367, 1e-15);
  EXPECT_NEAR(variance_closed_form(KernelSpec::gauss(1.0, 3), 1.3).value, 0.183235391573415, 1e-14);
  EXPECT_NEAR(variance_closed_form(KernelSpec::gauss(0.5, 3), 1.0).value,
              variance_closed_form(KernelSpec::gauss(1.0, 3), 2.0).value, 1e-15);
  const auto b = variance_closed_form(KernelSpec::matern(1.5, 1.0, 5), 0.7);
  EXPECT_EQ(b.tag, VarianceTag::Bound);
}

TEST(Analysis, MonteCarloAgreesWithExactVariances) {
  for (const auto& k : {KernelSpec::riesz(1.0, 3), KernelSpec::riesz(0.5, 7), KernelSpec::laplace(1.0, 3),
                        KernelSpec::gauss(1.0, 3)}) {
    const auto rep = variance_mc(k, 1.3, 200000, 5);
    ASSERT_TRUE(rep.closed_form);
    EXPECT_NEAR(rep.mc_estimate, rep.closed_form->value, 4.5 * rep.mc_stderr) << k.describe();
  }
}

TEST(Analysis, PositiveDefiniteBoundHolds) {
  for (const auto& k : {KernelSpec::gauss(1.0, 6), KernelSpec::matern(2.5, 0.5, 4), KernelSpec::laplace(2.0, 9)}) {
    for (double x : {0.2, 1.0, 3.0}) {
      const auto rep = variance_mc(k, x, 50000, 2);
      ASSERT_TRUE(rep.closed_form);
      EXPECT_EQ(rep.closed_form->tag, VarianceTag::Bound);
      EXPECT_LE(rep.mc_estimate, rep.closed_form->value + 4 * rep.mc_stderr);
    }
  }
}

TEST(Analysis, ThinPlateExactVarianceMatchesReference) {
  // High-precision quadrature reference.
  EXPECT_NEAR(thin_plate_variance_exact(50, 10.0), 147756.33333, 0.01);
  for (int d : {3, 8, 50}) {
    for (double s : {0.4, 2.0, 20.0}) {
      const auto rep = variance_mc(KernelSpec::thin_plate(d), s, 200000, 3);
      EXPECT_NEAR(rep.mc_estimate, thin_plate_variance_exact(d, s), 4.5 * rep.mc_stderr) << d << " " << s;
    }
  }
}

TEST(Analysis, ThinPlateLargeDimensionLimit) {
  // (1 + 2/d) Var / s^4 -> 2 L^2 + 2 L + 3/4 (pi^2/2 - 4), L = log s.
  for (double s : {3.0, 30.0}) {
    const double L = std::log(s);
    const double limit = 2 * L * L + 2 * L + 0.75 * (kPi * kPi / 2 - 4);
    const double d = 1e6;
    EXPECT_NEAR((1 + 2 / d) * thin_plate_variance_exact(1000000, s) / std::pow(s, 4), limit, 1e-4 * limit);
  }
}

TEST(Analysis, ThinPlatePrintedAsymptoticIsTagged) {
  const auto cf = variance_closed_form(KernelSpec::thin_plate(50), 100.0);
  EXPECT_EQ(cf.tag, VarianceTag::Asymptotic);
  const auto [c1, c2] = thin_plate_asymptotic_constants();
  EXPECT_NEAR(c1, 8 - 3 * kEulerGamma - std::log(8.0), 1e-14);
  // The printed expansion overshoots the exact variance by a stable margin at d = 50.
  const double ratio = cf.value / thin_plate_variance_exact(50, 100.0);
  EXPECT_GT(ratio, 1.3);
  EXPECT_LT(ratio, 1.45);
  EXPECT_THROW(variance_closed_form(KernelSpec::thin_plate(50), 1.0), Error);
}

TEST(Analysis, FitRateRecoversPowerLaw) {
  std::vector<double> P = {8, 16, 32, 64}, e;
  for (double p : P) e.push_back(3.0 * std::pow(p, -0.75));
  const auto [r, c] = fit_rate(P, e);
  EXPECT_NEAR(r, 0.75, 1e-12);
  EXPECT_NEAR(c, std::log(3.0), 1e-12);
}

TEST(Analysis, IidExperimentHasHalfRate) {
  ExperimentConfig cfg;
  cfg.P_list = {8, 32, 128};
  cfg.reps = 6;
  cfg.n_x = 60;
  cfg.seed = 4;
  const auto rep = slicing_error_experiment(KernelSpec::gauss(1.0, 3), cfg);
  ASSERT_EQ(rep.P.size(), 3u);
  EXPECT_GT(rep.rate, 0.3);
  EXPECT_LT(rep.rate, 0.7);
  std::ostringstream out;
  write_experiment_csv(rep, out);
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("generator,kernel,d,P,mean_error,std_error\n", 0), 0u);
  EXPECT_NE(csv.find(",rate,"), std::string::npos);
}

TEST(Analysis, ExperimentIsReproducible) {
  ExperimentConfig cfg;
  cfg.P_list = {4, 16};
  cfg.reps = 2;
  cfg.n_x = 10;
  cfg.generator = Generator::SobolSphere;
  const auto a = slicing_error_experiment(KernelSpec::laplace(1.0, 4), cfg);
  cfg.threads = 2;
  const auto b = slicing_error_experiment(KernelSpec::laplace(1.0, 4), cfg);
  EXPECT_EQ(a.mean_error, b.mean_error);
}

TEST(Analysis, DeterministicSetsCollapseWhenNotRandomized) {
  ExperimentConfig cfg;
  cfg.P_list = {8, 16};
  cfg.reps = 4;
  cfg.n_x = 20;
  cfg.generator = Generator::SobolSphere;
  cfg.randomize_deterministic = false;
  const auto rep = slicing_error_experiment(KernelSpec::gauss(1.0, 3), cfg);
  EXPECT_EQ(rep.reps, 1);
  EXPECT_FALSE(rep.warnings.empty());
  cfg.randomize_deterministic = true;
  EXPECT_EQ(slicing_error_experiment(KernelSpec::gauss(1.0, 3), cfg).reps, 4);
}
