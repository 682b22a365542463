#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qmcslice/error.hpp"
#include "qmcslice/nfft1d.hpp"
#include "qmcslice/rng.hpp"

using namespace qmcslice;

namespace {

double max_rel(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

std::vector<double> random_nodes(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform() - 0.5;
  return x;
}

std::vector<Complex> random_coeffs(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Complex> c(n);
  for (auto& v : c) v = Complex(rng.normal(), rng.normal());
  return c;
}

}  // namespace

TEST(Nfft, SingleNodeAtOriginGivesOnes) {
  NfftPlan plan(32);
  const std::vector<double> x = {0.0};
  const std::vector<double> w = {1.0};
  const auto out = plan.adjoint(x, w);
  ASSERT_EQ(out.size(), 32u);
  for (const auto& v : out) EXPECT_NEAR(std::abs(v - Complex(1, 0)), 0.0, 1e-12);
}

TEST(Nfft, AdjointAndForwardMatchDirectSums) {
  for (Window win : {Window::KaiserBessel, Window::Gaussian}) {
    const double tol = win == Window::KaiserBessel ? 1e-12 : 1e-7;
    NfftPlan plan(128, 2.0, 8, win);
    const auto x = random_nodes(300, 1);
    const auto w = random_coeffs(300, 2);
    EXPECT_LT(max_rel(plan.adjoint(x, w), direct_adjoint(x, w, 128)), tol);
    const auto c = random_coeffs(128, 3);
    EXPECT_LT(max_rel(plan.forward(x, c), direct_forward(x, c)), tol);
  }
}

TEST(Nfft, EdgeNodesAndSmallCutoff) {
  const std::vector<double> x = {-0.5, -0.4999999, 0.4999999, 0.0, 0.25};
  const auto w = random_coeffs(5, 4);
  NfftPlan plan(16, 2.0, 4);
  EXPECT_LT(max_rel(plan.adjoint(x, w), direct_adjoint(x, w, 16)), 1e-6);
}

TEST(Nfft, AccuracyImprovesWithCutoff) {
  const auto x = random_nodes(200, 5);
  const auto w = random_coeffs(200, 6);
  const auto ref = direct_adjoint(x, w, 64);
  double prev = 1.0;
  for (int m : {2, 4, 6}) {
    const double err = max_rel(NfftPlan(64, 2.0, m).adjoint(x, w), ref);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Nfft, RejectsBadInput) {
  EXPECT_THROW(NfftPlan(0), Error);
  EXPECT_THROW(NfftPlan(31), Error);
  EXPECT_THROW(NfftPlan(32, 1.0), Error);
  NfftPlan plan(32);
  const std::vector<double> x = {0.5};
  const std::vector<double> w = {1.0};
  EXPECT_THROW(plan.adjoint(x, w), Error);
  const std::vector<Complex> wrong(31);
  const std::vector<double> y = {0.1};
  EXPECT_THROW(plan.forward(y, wrong), Error);
}

TEST(Nfft, PlanIsReusableAcrossCalls) {
  NfftPlan plan(64);
  const auto x1 = random_nodes(50, 7), x2 = random_nodes(80, 8);
  const auto w1 = random_coeffs(50, 9), w2 = random_coeffs(80, 10);
  const auto a = plan.adjoint(x1, w1);
  plan.adjoint(x2, w2);
  EXPECT_EQ(a, plan.adjoint(x1, w1));
}
