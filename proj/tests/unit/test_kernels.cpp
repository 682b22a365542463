#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <vector>

#include "qmcslice/error.hpp"
#include "qmcslice/kernels.hpp"
#include "qmcslice/quadrature.hpp"
#include "qmcslice/rng.hpp"
#include "qmcslice/special.hpp"

using namespace qmcslice;

namespace {

struct FRef {
  int d;
  std::vector<double> values;
};

void check_f(const KernelSpec& base, const std::vector<double>& ts, const std::vector<FRef>& refs, double tol) {
  for (const auto& ref : refs) {
    const KernelSpec k = base.with_dim(ref.d);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double got = eval_f(k, ts[i]);
      EXPECT_NEAR(got, ref.values[i], tol * std::max(1.0, std::fabs(ref.values[i])))
          << to_string(k.family()) << " d=" << ref.d << " t=" << ts[i];
    }
  }
}

}  // namespace

TEST(Kernels, GaussSlicedProfileMatchesHighPrecisionReference) {
  const std::vector<double> ts = {0.1, 0.5, 1, 2, 4, 7};
  check_f(KernelSpec::gauss(1.0, 2), ts,
          {{2, {.990033266761799, .7698278586902576, .2752215409929237, -.27997614913081786, -.08158518325360826,
                -.021807747950348837}},
           {4, {.9800997338088896, .5585133056991042, -.22477845900707633, -.3600119254345911, .03030369114845373,
                .0015782028580232639}},
           {5, {.9751453966914684, .4596338034294768, -.40435377314175563, -.2255588053943545, .018226802782703142,
                1.6104468414373723e-08}},
           {10, {.9504976733200202, .0285204117343212, -.782015095969266, .36874409939434294, .008548164761737755,
                 -1.7798379986399118e-05}},
           {16, {.9211920313449268, -.3635028669845433, -.5526853976754309, .023641573282309147, -.015583297001031643,
                 -1.5479824408568484e-06}},
           {50, {.7606402708235938, -.8742112449120655, .5723165363947358, .04172109969718508, -.016281131618129243,
                 -5.137046110818263e-06}}},
          1e-9);
}

TEST(Kernels, LaplaceSlicedProfileMatchesHighPrecisionReference) {
  const std::vector<double> ts = {0.1, 0.5, 1, 3, 8};
  check_f(KernelSpec::laplace(1.0, 2), ts,
          {{2, {.8525385382901607, .42175635810912293, .12691575734913246, -.09377778158591202, -.018894005226132445}},
           {5, {.7570473064234196, .15163266492815836, -.12262648039048077, -.049787068367863944, .0030191636511226064}},
           {10, {.6600544065096483, -.03739465369458236, -.19153489877586227, .017045308495029395,
                 -.0008379859669185905}}},
          1e-8);
}

TEST(Kernels, MaternSlicedProfileMatchesHighPrecisionReference) {
  const std::vector<double> ts = {0.1, 0.5, 1, 3, 6};
  check_f(KernelSpec::matern(1.5, 1.0, 2), ts,
          {{2, {.9737957711290078, .6123956533315792, .16120355732273517, -.1401630313292542, -.033643839457461786}},
           {5, {.9376232513410903, .24502452185211243, -.27173299503133413, -.005750903031494219, .005198621527469174}},
           {10, {.882664058128761, -.10245379068314002, -.3659038252249672, .03713454289702399,
                 -.0013260040617984288}}},
          1e-8);
}

TEST(Kernels, ThreeDimensionalClosedForms) {
  for (double t : {0.0, 0.3, 1.0, 2.7, 6.0}) {
    const double z = t * t / 2.0;
    EXPECT_NEAR(eval_f(KernelSpec::gauss(1.0, 3), t), std::exp(-z) * (1 - 2 * z), 1e-14);
    EXPECT_NEAR(eval_f(KernelSpec::laplace(1.0, 3), t), std::exp(-t) * (1 - t), 1e-14);
  }
  // Matern nu = 3/2: F = (1 + s) e^{-s}, s = sqrt(3) t; f = (tF)' = (1 + s - s^2) e^{-s}.
  for (double t : {0.0, 0.2, 1.0, 3.0}) {
    const double s = std::sqrt(3.0) * t;
    EXPECT_NEAR(eval_f(KernelSpec::matern(1.5, 1.0, 3), t), (1 + s - s * s) * std::exp(-s), 1e-12) << t;
  }
}

TEST(Kernels, MaternRadialProfileAgreesWithBesselK) {
  for (double nu : {0.5, 1.5, 2.5, 0.8, 3.3}) {
    const auto k = KernelSpec::matern(nu, 1.3, 4);
    for (double t : {0.05, 0.4, 1.0, 3.0}) {
      const double s = std::sqrt(2 * nu) * t / 1.3;
      const double ref = std::pow(2.0, 1 - nu) / std::tgamma(nu) * std::pow(s, nu) * boost::math::cyl_bessel_k(nu, s);
      EXPECT_NEAR(eval_F(k, t), ref, 1e-13) << nu << " " << t;
    }
    EXPECT_DOUBLE_EQ(eval_F(k, 0.0), 1.0);
  }
}

TEST(Kernels, SeriesAndQuadraturePathsAgree) {
  for (const auto& k : {KernelSpec::gauss(0.7, 6), KernelSpec::laplace(2.0, 4), KernelSpec::matern(2.5, 1.0, 7)}) {
    for (double t : {0.05, 0.3, 0.9, 1.7}) {
      const double a = eval_f_with(k, t, SlicedPath::Series);
      const double b = eval_f_with(k, t, SlicedPath::Quadrature);
      EXPECT_NEAR(a, b, 1e-9) << k.describe() << " t=" << t;
    }
  }
}

TEST(Kernels, SpectralDensitiesIntegrateToOne) {
  for (const auto& k : {KernelSpec::gauss(1.0, 3), KernelSpec::gauss(0.5, 10), KernelSpec::laplace(1.0, 3),
                        KernelSpec::laplace(2.5, 6), KernelSpec::matern(1.5, 1.0, 3), KernelSpec::matern(0.7, 2.0, 8)}) {
    const auto r = integrate([&](double w) { return spectral_density_1d(k, w); }, 0.0, 50.0, 1e-13);
    const auto tail = integrate([&](double u) { return spectral_density_1d(k, 1.0 / u) / (u * u); }, 0.0, 1.0 / 50.0, 1e-13);
    EXPECT_NEAR(2.0 * (r.value + tail.value), 1.0, 1e-7) << k.describe();
    EXPECT_NEAR(spectral_density_1d(k, 0.3), spectral_density_1d(k, -0.3), 1e-15);
    EXPECT_GE(spectral_density_1d(k, 0.7), 0.0);
  }
}

TEST(Kernels, LaplaceDensityThreeDimensionalForm) {
  // rho(w) = 8 pi^2.5 w^2 / Gamma(3/2) (1 + 4 pi^2 w^2)^-2 for alpha = 1.
  const auto k = KernelSpec::laplace(1.0, 3);
  for (double w : {0.01, 0.2, 1.0, 5.0}) {
    const double ref = 8 * std::pow(kPi, 2.5) * w * w / std::tgamma(1.5) * std::pow(1 + 4 * kPi * kPi * w * w, -2.0);
    EXPECT_NEAR(spectral_density_1d(k, w), ref, 1e-14 * std::max(1.0, ref));
  }
}

TEST(Kernels, DensityIsCosineTransformOfSlicedProfile) {
  const auto k = KernelSpec::matern(1.5, 1.0, 5);
  for (double t : {0.2, 1.1}) {
    const auto ft = cosine_transform([&](double w) { return spectral_density_1d(k, w); }, t, 10.0, 1e-12);
    EXPECT_NEAR(2.0 * ft.value, eval_f(k, t), 1e-8);
  }
}

TEST(Kernels, SlicingIdentityByProjectionQuadrature) {
  // F(r) = E f(|t| r) with t having density ~ (1 - t^2)^((d-3)/2).
  for (const auto& k : {KernelSpec::gauss(1.0, 5), KernelSpec::laplace(1.0, 4), KernelSpec::matern(2.5, 1.0, 6),
                        KernelSpec::riesz(1.0, 5), KernelSpec::thin_plate(4)}) {
    const int d = k.dim();
    const double a = (d - 3) / 2.0;
    const auto dens = [&](double t) { return std::pow(1 - t * t, a); };
    const double z = integrate(dens, 0.0, 1.0, 1e-14).value;
    for (double r : {0.3, 1.2, 2.5}) {
      const double e = integrate([&](double t) { return dens(t) * eval_f(k, t * r); }, 0.0, 1.0, 1e-13).value / z;
      EXPECT_NEAR(e, eval_F(k, r), 1e-8 * std::max(1.0, std::fabs(eval_F(k, r)))) << k.describe() << " r=" << r;
    }
  }
}

TEST(Kernels, RieszAndThinPlateProfiles) {
  const auto riesz = KernelSpec::riesz(1.0, 3);
  EXPECT_DOUBLE_EQ(eval_F(riesz, 2.0), -2.0);
  EXPECT_NEAR(riesz_constant(3, 1.0), 2.0, 1e-14);
  EXPECT_NEAR(eval_f(riesz, 2.0), -4.0, 1e-13);
  const auto tps = KernelSpec::thin_plate(3);
  EXPECT_NEAR(eval_F(tps, 2.0), 4.0 * std::log(2.0), 1e-14);
  EXPECT_DOUBLE_EQ(eval_F(tps, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_f(tps, 0.0), 0.0);
}

TEST(Kernels, ParameterValidation) {
  EXPECT_THROW(KernelSpec::gauss(-1.0, 3), Error);
  EXPECT_THROW(KernelSpec::gauss(1.0, 1), Error);
  EXPECT_THROW(KernelSpec::riesz(-1.0, 3), Error);
  EXPECT_THROW(KernelSpec::matern(0.0, 1.0, 3), Error);
  KernelParams p;
  p.sigma = 1.0;
  p.alpha = 2.0;
  EXPECT_THROW(KernelSpec(KernelFamily::Gauss, p, 3), Error);
  EXPECT_THROW(parse_family("cauchy"), Error);
  EXPECT_EQ(parse_family("matern"), KernelFamily::Matern);
}

TEST(Kernels, RescalingMultipliesLengthScale) {
  const auto k = KernelSpec::laplace(2.0, 3).rescaled(0.5);
  EXPECT_DOUBLE_EQ(k.alpha(), 4.0);
  EXPECT_DOUBLE_EQ(KernelSpec::gauss(2.0, 3).rescaled(0.25).sigma(), 0.5);
}

TEST(Kernels, MedianRuleIsOrderInvariantAndExact) {
  Matrix a(3, 1), b(2, 1);
  a << 0.0, 1.0, 5.0;
  b << 2.0, 3.0;
  // Distances: 2 3 1 2 3 2 -> median 2.
  EXPECT_DOUBLE_EQ(median_rule(a, b, ScaleRule{}, 1), 2.0);
  EXPECT_DOUBLE_EQ(median_rule(a, b, ScaleRule{0.5, 1000}, 1), 1.0);
  Matrix big = Matrix::Random(300, 4), shuffled = big.colwise().reverse();
  const ScaleRule rule{1.0, 500};
  EXPECT_DOUBLE_EQ(median_rule(big, big, rule, 3), median_rule(shuffled, shuffled, rule, 3));
  Matrix zero = Matrix::Zero(4, 2);
  EXPECT_THROW(median_rule(zero, zero, rule, 1), Error);
}

TEST(Kernels, ProjectionSamplerMoments) {
  Rng rng(17);
  const int d = 6, n = 200000;
  double s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_projection(rng, d);
    ASSERT_LE(std::fabs(t), 1.0);
    s2 += t * t;
  }
  EXPECT_NEAR(s2 / n, 1.0 / d, 4 * std::sqrt(2.0 / (d * d) / n));
}
