#include "enflow/errors.hpp"
#include "enflow/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace enflow;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(Simulate, IdentityKernelKeepsTheEnsemble) {
  Vector prior(3);
  prior << 4, 0, 7;
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto traj = simulate(Marginal(prior), TransitionModel(Matrix::Identity(3, 3)),
                               {ObservationModel(Matrix::Constant(3, 2, 0.5))}, 5, seed);
    for (const auto& m : traj.marginals) EXPECT_EQ(m.mass(), prior);
  }
}

TEST(Simulate, PlansAreIntegerAndConsistent) {
  Vector prior(2);
  prior << 6, 3;
  const TransitionModel a(m2(0.3, 0.7, 0.6, 0.4));
  const std::vector<ObservationModel> b{ObservationModel(m2(0.9, 0.1, 0.2, 0.8)),
                                        ObservationModel(m2(0.5, 0.5, 0.5, 0.5))};
  const auto traj = simulate(Marginal(prior), a, b, 6, 17);
  ASSERT_EQ(traj.horizon(), 6);
  for (int t = 1; t <= 6; ++t) {
    const Matrix& m = traj.transfer_plans[t - 1].flow;
    EXPECT_EQ(m, m.array().round().matrix());
    EXPECT_EQ(Vector(m.rowwise().sum()), traj.marginals[t - 1].mass());
    EXPECT_EQ(Vector(m.colwise().sum().transpose()), traj.marginals[t].mass());
    EXPECT_DOUBLE_EQ(traj.marginals[t].total(), 9.0);
    for (std::size_t s = 0; s < 2; ++s) {
      const Matrix& d = traj.observation_plans[t - 1][s].assignment;
      EXPECT_EQ(Vector(d.rowwise().sum()), traj.marginals[t].mass());
      EXPECT_EQ(Vector(d.colwise().sum().transpose()), traj.observations[t - 1][s].counts);
    }
  }
}

TEST(Simulate, SingleParticleHasUnitEntries) {
  const TransitionModel a(Matrix::Constant(3, 3, 1.0 / 3.0));
  const auto traj = simulate(Marginal(Vector::Unit(3, 1)), a, {ObservationModel(Matrix::Constant(3, 2, 0.5))}, 4, 5);
  for (int t = 1; t <= 4; ++t) {
    EXPECT_DOUBLE_EQ(traj.transfer_plans[t - 1].flow.sum(), 1.0);
    EXPECT_DOUBLE_EQ(traj.transfer_plans[t - 1].flow.maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(traj.observations[t - 1][0].counts.maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(traj.observations[t - 1][0].counts.sum(), 1.0);
  }
}

TEST(Simulate, SameSeedSameTrajectory) {
  const TransitionModel a(m2(0.3, 0.7, 0.6, 0.4));
  const std::vector<ObservationModel> b{ObservationModel(m2(0.9, 0.1, 0.2, 0.8))};
  Vector prior(2);
  prior << 10, 10;
  const auto x = simulate(Marginal(prior), a, b, 5, 3);
  const auto y = simulate(Marginal(prior), a, b, 5, 3);
  for (int t = 0; t <= 5; ++t) EXPECT_EQ(x.marginals[t].mass(), y.marginals[t].mass());
}

TEST(Simulate, RejectsBadInput) {
  const TransitionModel a(m2(0.5, 0.5, 0.5, 0.5));
  const std::vector<ObservationModel> b{ObservationModel(Matrix::Identity(2, 2))};
  Vector frac(2);
  frac << 0.5, 1;
  EXPECT_THROW(simulate(Marginal(frac), a, b, 2, 1), PreconditionError);
  EXPECT_THROW(simulate(Marginal(Vector::Ones(2)), a, b, -1, 1), PreconditionError);
  EXPECT_THROW(simulate(Marginal(Vector::Ones(3)), a, b, 1, 1), DimensionError);
  const TransitionModel dead(m2(0, 1, 0, 0));
  EXPECT_THROW(simulate(Marginal(Vector::Unit(2, 0)), dead, b, 3, 1), ModelError);
}

TEST(GaussianChain, SingleState) {
  EXPECT_EQ(build_gaussian_chain(1, 0.5, 1.0).kernel(), Matrix::Ones(1, 1));
}

TEST(GaussianChain, FiveStatesFromTheFormula) {
  const auto a = build_gaussian_chain(5, 0.5, 1.0).kernel();
  for (int i = 1; i <= 5; ++i) {
    double norm = 0.0;
    for (int j = 1; j <= 5; ++j) norm += std::exp(-std::pow(j - i - 1.0, 2) / 0.5);
    for (int j = 1; j <= 5; ++j) {
      EXPECT_NEAR(a(i - 1, j - 1), std::exp(-std::pow(j - i - 1.0, 2) / 0.5) / norm, 1e-15);
    }
  }
  Eigen::Index arg = 0;
  a.row(0).maxCoeff(&arg);
  EXPECT_EQ(arg, 1);
}

TEST(GaussianChain, ZeroDriftIsSymmetricAwayFromTheBoundary) {
  const auto a = build_gaussian_chain(21, 2.0, 0.0).kernel();
  // Row 10 (0-based) sees the whole bulk of its Gaussian on both sides.
  for (int d = 1; d <= 10; ++d) EXPECT_NEAR(a(10, 10 - d), a(10, 10 + d), 1e-15);
}

TEST(BinnedObservation, TenthStatePeaksAtFirstBin) {
  const auto b = build_binned_observation(100, 5, 0.5).kernel();
  double norm = 0.0;
  for (int k = 1; k <= 5; ++k) norm += std::exp(-2.0 * (k - 1) * (k - 1));
  EXPECT_NEAR(b(9, 0), 1.0 / norm, 1e-15);
  Eigen::Index arg = 0;
  b.row(9).maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
}

TEST(BinnedObservation, FullMatrixFromTheFormula) {
  const auto b = build_binned_observation(100, 5, 0.5).kernel();
  ASSERT_EQ(b.rows(), 100);
  ASSERT_EQ(b.cols(), 5);
  for (int i = 1; i <= 100; ++i) {
    double row[5];
    double norm = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double d = k - (i + 10) / 20.0;
      row[k - 1] = std::exp(-d * d / 0.5);
      norm += row[k - 1];
    }
    for (int k = 0; k < 5; ++k) ASSERT_NEAR(b(i - 1, k), row[k] / norm, 1e-15) << i;
  }
}

TEST(BinnedObservation, SingleSymbolIsAllOnes) {
  EXPECT_EQ(build_binned_observation(7, 1, 0.5).kernel(), Matrix::Ones(7, 1));
}

TEST(Apportion, LargestRemainder) {
  Vector w(3);
  w << 1, 1, 1;
  const Vector out = apportion(w, 10);
  EXPECT_DOUBLE_EQ(out.sum(), 10.0);
  EXPECT_DOUBLE_EQ(out[0], 4.0);
  EXPECT_DOUBLE_EQ(out[1], 3.0);
  Vector skew(2);
  skew << 0.26, 0.74;
  EXPECT_EQ(apportion(skew, 2), (Vector(2) << 1, 1).finished());
  EXPECT_THROW(apportion(Vector::Zero(2), 3), PreconditionError);
}
