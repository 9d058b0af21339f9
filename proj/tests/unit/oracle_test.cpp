#include "enflow/bridge.hpp"
#include "enflow/divergence.hpp"
#include "enflow/errors.hpp"
#include "enflow/oracle.hpp"
#include "random_instances.hpp"
#include "reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace enflow;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Enumeration, TwoParticleIdentityPlan) {
  const auto r = brute_force_ml_plan(Marginal(v2(1, 1)), TransitionModel(m2(0.9, 0.1, 0.1, 0.9)), Marginal(v2(1, 1)));
  EXPECT_EQ(r.integer_plan, Matrix::Identity(2, 2));
  EXPECT_NEAR(r.log_likelihood, std::log(0.81), 1e-14);
  EXPECT_EQ(r.candidates, 2);
}

TEST(Enumeration, MaximumAgreesWithParticleLaw) {
  const Matrix a = m2(0.35, 0.65, 0.8, 0.2);
  const auto law = reference::particle_plan_law({3, 2}, a);
  const auto r = brute_force_ml_plan(Marginal(v2(3, 2)), TransitionModel(a), Marginal(v2(2, 3)));
  double best = 0.0;
  for (const auto& [key, p] : law) {
    if (key[0] + key[2] == 2) best = std::max(best, p);
  }
  EXPECT_NEAR(r.log_likelihood, std::log(best), 1e-12);
  EXPECT_NEAR(std::exp(r.log_likelihood), law.at(reference::plan_key(r.integer_plan)), 1e-14);
}

TEST(Enumeration, UnreachableTargetIsInfeasible) {
  EXPECT_THROW(brute_force_ml_plan(Marginal(v2(2, 0)), TransitionModel(m2(1, 0, 0.5, 0.5)), Marginal(v2(0, 2))),
               InfeasibleError);
}

TEST(Enumeration, SizeLimits) {
  EXPECT_THROW(brute_force_ml_plan(Marginal(Vector::Ones(5)), TransitionModel(Matrix::Constant(5, 5, 0.2)),
                                   Marginal(Vector::Ones(5))),
               EnumerationLimitError);
  EXPECT_THROW(brute_force_ml_plan(Marginal(v2(7, 6)), TransitionModel(Matrix::Constant(2, 2, 0.5)),
                                   Marginal(v2(6, 7))),
               EnumerationLimitError);
}

TEST(Enumeration, ApproachesContinuousBridgeAtTwelveParticles) {
  Vector mu0(3), mu1(3);
  Matrix a3(3, 3);
  a3 << 0.6, 0.3, 0.1,
        0.2, 0.5, 0.3,
        0.1, 0.3, 0.6;
  mu0 << 5, 4, 3;
  mu1 << 3, 4, 5;
  const auto r = brute_force_ml_plan(Marginal(mu0), TransitionModel(a3), Marginal(mu1));
  const auto bridge = solve_single_step(Marginal(Vector(mu0 / 12.0)), Marginal(Vector(mu1 / 12.0)),
                                        TransitionModel(a3), {1e-12, 100000, {}});
  EXPECT_LE((r.integer_plan / 12.0 - bridge.plans[0].flow).cwiseAbs().maxCoeff(), 0.15);
}

TEST(Enumeration, RateBoundsTheOptimum) {
  // H* <= -L(argmax) / N + (n^2 / 2) log N / N for the scaled problem.
  Matrix a3(3, 3);
  a3 << 0.5, 0.3, 0.2,
        0.2, 0.6, 0.2,
        0.3, 0.3, 0.4;
  Vector mu0(3), mu1(3);
  mu0 << 4, 4, 4;
  mu1 << 2, 5, 5;
  const double n = 12.0;
  const auto r = brute_force_ml_plan(Marginal(mu0), TransitionModel(a3), Marginal(mu1));
  const auto bridge = solve_single_step(Marginal(Vector(mu0 / n)), Marginal(Vector(mu1 / n)),
                                        TransitionModel(a3), {1e-12, 100000, {}});
  EXPECT_LE(bridge.objective, -r.log_likelihood / n + 4.5 * std::log(n) / n);
}

TEST(NewtonOracle, PriorConsistentEndpointHasZeroObjective) {
  const Matrix a = m2(0.8, 0.2, 0.3, 0.7);
  const Vector mu0 = v2(1.0, 2.0);
  const auto r = generic_kl_solver(Marginal(mu0), Marginal(Vector(a.transpose() * mu0)), TransitionModel(a), 1);
  EXPECT_NEAR(r.objective, 0.0, 1e-10);
  EXPECT_LE(r.constraint_violation, 1e-8);
}

TEST(NewtonOracle, TwoByTwoMatchesGoldenSection) {
  const Matrix a = m2(0.6, 0.4, 0.25, 0.75);
  const Vector mu0 = v2(1.2, 0.8);
  const Vector mu1 = v2(1.5, 0.5);
  const auto r = generic_kl_solver(Marginal(mu0), Marginal(mu1), TransitionModel(a), 1);
  const Matrix best = reference::best_coupling_2x2(
      mu0, mu1, [&](const Matrix& m) { return reference::kl(m, mu0.asDiagonal() * a); });
  EXPECT_NEAR(r.objective, reference::kl(best, mu0.asDiagonal() * a), 1e-8);
  EXPECT_LT((r.transfer_plans[0] - best).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NewtonOracle, CertificateOnRandomHmmInstance) {
  Rng rng(17);
  const auto inst = fixtures::random_hmm_instance(rng, 3, 2, 2, 2);
  const auto r = generic_kl_solver(inst);
  EXPECT_LE(r.constraint_violation, 1e-8);
  EXPECT_LE(r.stationarity, 1e-8);
  ASSERT_EQ(r.marginals.size(), 3u);
  ASSERT_EQ(r.observation_plans.size(), 2u);
  EXPECT_EQ(r.observation_plans[0].size(), 2u);
}

TEST(NewtonOracle, RejectsKernelsWithZeros) {
  EXPECT_THROW(generic_kl_solver(Marginal(v2(1, 1)), Marginal(v2(1, 1)), TransitionModel(Matrix::Identity(2, 2)), 1),
               PreconditionError);
}
