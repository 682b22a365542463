#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qmcslice/directions.hpp"
#include "qmcslice/sobol.hpp"

using namespace qmcslice;

namespace {
std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qmcslice_test_" + name);
}
}  // namespace

TEST(Sobol, MatchesReferencePointsInFiveDimensions) {
  SobolEngine s(5);
  std::vector<double> p(5);
  const double ref[][5] = {{0, 0, 0, 0, 0},
                           {.5, .5, .5, .5, .5},
                           {.75, .25, .25, .25, .75},
                           {.25, .75, .75, .75, .25},
                           {.375, .375, .625, .875, .375},
                           {.875, .875, .125, .375, .875}};
  for (const auto& row : ref) {
    s.next(p.data());
    for (int j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(p[j], row[j]);
  }
}

TEST(Sobol, MatchesReferenceInHighestDimension) {
  SobolEngine s(SobolEngine::max_dim());
  ASSERT_EQ(SobolEngine::max_dim(), 1111);
  std::vector<double> p(1111);
  const int cols[] = {0, 1, 2, 783, 1110};
  const double ref[][5] = {{.75, .25, .25, .75, .75}, {.25, .75, .75, .25, .25}, {.375, .375, .625, .125, .875}};
  s.next(p.data());
  s.next(p.data());
  for (const auto& row : ref) {
    s.next(p.data());
    for (int j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(p[cols[j]], row[j]) << cols[j];
  }
  EXPECT_THROW(SobolEngine(1112), Error);
}

TEST(Sobol, FirstPowerOfTwoPointsAreStratified) {
  SobolEngine s(3);
  std::vector<double> p(3);
  std::vector<int> bins(16, 0);
  for (int i = 0; i < 16; ++i) {
    s.next(p.data());
    ++bins[static_cast<int>(p[2] * 16)];
  }
  for (int b : bins) EXPECT_EQ(b, 1);
}

TEST(Directions, GeneratorsProduceUnitVectors) {
  for (const auto& dirs : {iid_uniform(37, 5, 1), sobol_sphere(64, 4), sobol_sphere(64, 4, 9), orthogonal(10, 3, 2),
                           orthogonal(7, 7, 3)}) {
    EXPECT_NO_THROW(dirs.validate(1e-12));
  }
  EXPECT_EQ(sobol_sphere(33, 6).P(), 33);
}

TEST(Directions, SeedsAreReproducible) {
  EXPECT_EQ(iid_uniform(8, 3, 5).vectors, iid_uniform(8, 3, 5).vectors);
  EXPECT_NE(iid_uniform(8, 3, 5).vectors, iid_uniform(8, 3, 6).vectors);
  EXPECT_EQ(sobol_sphere(8, 3).vectors, sobol_sphere(8, 3).vectors);
}

TEST(Directions, OrthogonalBlocksAreOrthonormal) {
  const auto dirs = orthogonal(8, 4, 11);
  for (int blk = 0; blk < 2; ++blk) {
    const Matrix b = dirs.vectors.middleRows(4 * blk, 4);
    EXPECT_LT((b * b.transpose() - Matrix::Identity(4, 4)).norm(), 1e-12);
  }
}

TEST(Directions, IidMeanIsNearZero) {
  const auto dirs = iid_uniform(20000, 3, 4);
  const Eigen::RowVectorXd mean = dirs.vectors.colwise().mean();
  EXPECT_LT(mean.norm(), 4.0 * std::sqrt(1.0 / 20000));
}

TEST(Directions, RandomOrthogonalIsOrthogonal) {
  const Matrix q = random_orthogonal(6, 3);
  EXPECT_LT((q * q.transpose() - Matrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_NE(random_orthogonal(6, 3), random_orthogonal(6, 4));
}

TEST(Directions, EnergyOfAntipodalPair) {
  DirectionSet dirs;
  dirs.vectors = Matrix(2, 2);
  dirs.vectors << 1, 0, 0, 1;
  // Pairs (p,q) incl. diagonal: diag contributes 0 + 2 each; off-diagonal sqrt2 + sqrt2 each.
  EXPECT_NEAR(energy_sym(dirs), -2.0 * (2 * 2.0 + 2 * 2 * std::sqrt(2.0)), 1e-14);
  EXPECT_NEAR(energy_riesz(dirs, 1.0), -2 * std::sqrt(2.0), 1e-14);
  EXPECT_THROW(energy_riesz(dirs, 2.0), Error);
}

TEST(Directions, DistanceDesignImprovesOnRandom) {
  EnergyOptConfig cfg;
  cfg.seed = 3;
  OptimizationTrace trace;
  const auto opt = distance_design(12, 3, cfg, &trace);
  opt.validate(1e-12);
  EXPECT_EQ(static_cast<int>(trace.best_energy.size()), cfg.resolved_steps(12, 3));
  EXPECT_LT(energy_sym(opt), energy_sym(iid_uniform(12, 3, 3)));
  for (std::size_t i = 1; i < trace.best_energy.size(); ++i) EXPECT_LE(trace.best_energy[i], trace.best_energy[i - 1]);
  EXPECT_DOUBLE_EQ(trace.best_energy.back(), energy_sym(opt));
}

TEST(Directions, DistanceDesignIndependentOfThreads) {
  EnergyOptConfig cfg;
  cfg.seed = 8;
  cfg.steps = 50;
  const auto a = distance_design(16, 4, cfg);
  cfg.threads = 3;
  const auto b = distance_design(16, 4, cfg);
  EXPECT_EQ(a.vectors, b.vectors);
}

TEST(Directions, OptimizerConfigValidation) {
  EnergyOptConfig cfg;
  cfg.step_size = -1;
  EXPECT_THROW(distance_design(4, 3, cfg), Error);
  EXPECT_EQ(EnergyOptConfig{}.resolved_steps(5, 4), 200);
}

TEST(Directions, FileRoundTrip) {
  const auto path = temp_file("dirs.txt");
  const auto dirs = iid_uniform(9, 4, 2);
  save_directions(dirs, path.string());
  const auto back = load_directions(path.string());
  EXPECT_EQ(back.P(), 9);
  EXPECT_EQ(back.d(), 4);
  EXPECT_LT((back.vectors - dirs.vectors).cwiseAbs().maxCoeff(), 1e-16);
  std::filesystem::remove(path);
}

TEST(Directions, HeaderlessFileAndNormChecks) {
  const auto path = temp_file("dirs_headerless.txt");
  {
    std::ofstream out(path);
    out << "1 0 0\n0 0.6 0.8\n";
  }
  const auto dirs = load_directions(path.string());
  EXPECT_EQ(dirs.P(), 2);
  EXPECT_EQ(dirs.d(), 3);
  {
    std::ofstream out(path);
    out << "2 1\n1.1 0\n";
  }
  EXPECT_THROW(load_directions(path.string()), Error);
  {
    std::ofstream out(path);
    out << "3 2\n1 0 0\n";
  }
  EXPECT_THROW(load_directions(path.string()), Error);
  std::filesystem::remove(path);
  EXPECT_THROW(load_directions("/nonexistent/qmcslice.txt"), Error);
}

TEST(Directions, ValidateRejectsBadSets) {
  DirectionSet dirs;
  dirs.vectors = Matrix::Ones(3, 3);
  EXPECT_THROW(dirs.validate(), Error);
  EXPECT_THROW(iid_uniform(0, 3, 1), Error);
  EXPECT_THROW(iid_uniform(3, 1, 1), Error);
}
