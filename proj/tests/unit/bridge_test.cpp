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

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// KL objective of a single-step plan, written out for the golden section.
double transfer_objective(const Matrix& plan, const Vector& mu0, const Matrix& a) {
  return reference::kl(plan, mu0.asDiagonal() * a);
}

}  // namespace

TEST(SinkhornScaling, MatchesMarginals) {
  Rng rng(5);
  const Matrix k = fixtures::random_stochastic(rng, 3, 4);
  const Vector r = fixtures::random_positive(rng, 3, 2.0);
  const Vector c = fixtures::random_positive(rng, 4, 2.0);
  const auto res = sinkhorn_scaling(k, r, c);
  EXPECT_LT((res.plan.rowwise().sum() - r).cwiseAbs().maxCoeff(), 1e-9 * 2.0);
  EXPECT_LT((res.plan.colwise().sum().transpose() - c).cwiseAbs().maxCoeff(), 1e-9 * 2.0);
  const Matrix rebuilt = res.row_scaling.asDiagonal() * k * res.col_scaling.asDiagonal();
  EXPECT_LT(max_abs(rebuilt - res.plan), 1e-12);
}

TEST(SinkhornScaling, RowViolationNeverIncreases) {
  Rng rng(8);
  const Matrix k = fixtures::random_stochastic(rng, 5, 5, 0.01);
  const auto res = sinkhorn_scaling(k, fixtures::random_positive(rng, 5, 1.0),
                                    fixtures::random_positive(rng, 5, 1.0), {1e-12, 100000, {}});
  ASSERT_GT(res.l1_history.size(), 2u);
  for (std::size_t i = 1; i < res.l1_history.size(); ++i) {
    EXPECT_LE(res.l1_history[i], res.l1_history[i - 1] + 1e-15);
  }
}

TEST(SinkhornScaling, StartingPointDoesNotChangeThePlan) {
  Rng rng(9);
  const Matrix k = fixtures::random_stochastic(rng, 3, 3);
  const Vector r = fixtures::random_positive(rng, 3, 1.0);
  const Vector c = fixtures::random_positive(rng, 3, 1.0);
  const auto a = sinkhorn_scaling(k, r, c, {1e-13, 100000, {}});
  const auto b = sinkhorn_scaling(k, r, c, {1e-13, 100000, Vector(fixtures::random_positive(rng, 3, 50.0))});
  EXPECT_LT(max_abs(a.plan - b.plan), 1e-11);
}

TEST(SingleStepBridge, PriorConsistentEndpointGivesPriorPlan) {
  const Matrix a = m2(0.9, 0.1, 0.3, 0.7);
  const Vector mu0 = v2(2.0, 1.0);
  const auto sol = solve_single_step(Marginal(mu0), Marginal(Vector(a.transpose() * mu0)), TransitionModel(a));
  EXPECT_LT(max_abs(sol.plans[0].flow - mu0.asDiagonal() * a), 1e-9);
  EXPECT_NEAR(sol.objective, 0.0, 1e-12);
}

TEST(SingleStepBridge, SymmetricCaseMatchesGoldenSection) {
  const Matrix a = m2(0.9, 0.1, 0.1, 0.9);
  const Vector mu = v2(1.0, 1.0);
  const auto sol = solve_single_step(Marginal(mu), Marginal(mu), TransitionModel(a), {1e-13, 100000, {}});
  const Matrix best = reference::best_coupling_2x2(
      mu, mu, [&](const Matrix& m) { return transfer_objective(m, mu, a); });
  EXPECT_LT(max_abs(sol.plans[0].flow - best), 1e-6);
  EXPECT_NEAR(sol.objective, transfer_objective(best, mu, a), 1e-6);
  EXPECT_NEAR(sol.plans[0].flow(0, 1), sol.plans[0].flow(1, 0), 1e-12);
}

TEST(SingleStepBridge, AsymmetricCaseMatchesGoldenSection) {
  const Matrix a = m2(0.6, 0.4, 0.25, 0.75);
  const Vector mu0 = v2(1.2, 0.8);
  const Vector mu1 = v2(1.5, 0.5);
  const auto sol = solve_single_step(Marginal(mu0), Marginal(mu1), TransitionModel(a), {1e-13, 100000, {}});
  const Matrix best = reference::best_coupling_2x2(
      mu0, mu1, [&](const Matrix& m) { return transfer_objective(m, mu0, a); });
  EXPECT_LT(max_abs(sol.plans[0].flow - best), 1e-6);
}

TEST(SingleStepBridge, BlockedSupportIsInfeasible) {
  const Matrix a = m2(1.0, 0.0, 0.5, 0.5);
  EXPECT_THROW(solve_single_step(Marginal(v2(2, 0)), Marginal(v2(0, 2)), TransitionModel(a)), InfeasibleError);
}

TEST(SingleStepBridge, RejectsMassMismatch) {
  EXPECT_THROW(solve_single_step(Marginal(v2(1, 1)), Marginal(v2(1, 2)), TransitionModel(Matrix::Constant(2, 2, 0.5))),
               PreconditionError);
}

TEST(SingleStepBridge, PlanScalesWithMass) {
  Rng rng(21);
  const auto p = fixtures::random_chain_problem(rng, 3, 1);
  const BridgeOptions tight{1e-13, 100000, {}};
  const auto base = solve_single_step(p.mu0, p.muT, p.transition, tight);
  const auto scaled = solve_single_step(Marginal(Vector(p.mu0.mass() * 7.0)), Marginal(Vector(p.muT.mass() * 7.0)),
                                        p.transition, tight);
  EXPECT_LT(max_abs(scaled.plans[0].flow - 7.0 * base.plans[0].flow), 1e-9);
  EXPECT_NEAR(scaled.objective, 7.0 * base.objective, 1e-9);
}

TEST(ChainBridge, PriorConsistentEndpointGivesZeroObjective) {
  Rng rng(2);
  const Matrix a = fixtures::random_stochastic(rng, 4, 4);
  const Vector mu0 = fixtures::random_positive(rng, 4, 3.0);
  Vector mut = mu0;
  for (int t = 0; t < 3; ++t) mut = a.transpose() * mut;
  const auto sol = solve_chain(Marginal(mu0), Marginal(mut), TransitionModel(a), 3, {1e-13, 100000, {}});
  EXPECT_NEAR(sol.objective, 0.0, 1e-10);
  for (int t = 1; t <= 3; ++t) {
    const Vector& prev = sol.marginals[t - 1].mass();
    EXPECT_LT(max_abs(sol.plans[t - 1].flow - prev.asDiagonal() * a), 1e-9);
  }
  for (const auto& f : factor_row_stochastic(sol)) EXPECT_LT(max_abs(f - a), 1e-9);
}

TEST(ChainBridge, HorizonOneEqualsSingleStep) {
  Rng rng(4);
  const auto p = fixtures::random_chain_problem(rng, 3, 1);
  const auto chain = solve_chain(p.mu0, p.muT, p.transition, 1);
  const auto single = solve_single_step(p.mu0, p.muT, p.transition);
  EXPECT_LT(max_abs(chain.plans[0].flow - single.plans[0].flow), 1e-12);
  EXPECT_DOUBLE_EQ(chain.objective, single.objective);
}

TEST(ChainBridge, EndpointsAreKeptExactly) {
  Rng rng(6);
  const auto p = fixtures::random_chain_problem(rng, 3, 4);
  const auto sol = solve_chain(p.mu0, p.muT, p.transition, 4);
  ASSERT_EQ(sol.marginals.size(), 5u);
  EXPECT_EQ(sol.marginals.front().mass(), p.mu0.mass());
  EXPECT_EQ(sol.marginals.back().mass(), p.muT.mass());
  for (int t = 1; t <= 4; ++t) {
    const Matrix& m = sol.plans[t - 1].flow;
    EXPECT_LT((m.rowwise().sum() - sol.marginals[t - 1].mass()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((m.colwise().sum().transpose() - sol.marginals[t].mass()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ChainBridge, ThreeStatesThreeStepsMatchOracle) {
  Rng rng(31);
  const auto p = fixtures::random_chain_problem(rng, 3, 3);
  const auto sol = solve_chain(p.mu0, p.muT, p.transition, 3, {1e-12, 100000, {}});
  const auto ref = generic_kl_solver(p.mu0, p.muT, p.transition, 3);
  EXPECT_NEAR(sol.objective, ref.objective, 1e-6 * std::max(1.0, std::abs(ref.objective)));
}

TEST(ChainBridge, RowStochasticFormHasSameObjective) {
  Rng rng(31);
  const auto p = fixtures::random_chain_problem(rng, 3, 3);
  const auto sol = solve_chain(p.mu0, p.muT, p.transition, 3, {1e-12, 100000, {}});
  const auto factors = factor_row_stochastic(sol);
  for (const auto& f : factors) EXPECT_LT((f.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_NEAR(row_stochastic_objective(factors, sol.marginals, p.transition), sol.objective, 1e-8);
}

TEST(ChainBridge, MatrixPower) {
  const Matrix a = m2(0.9, 0.1, 0.2, 0.8);
  EXPECT_LT(max_abs(matrix_power(a, 3) - a * a * a), 1e-15);
  EXPECT_EQ(matrix_power(a, 0), Matrix::Identity(2, 2));
}

TEST(EntropicOmt, TwoByTwoMatchesGoldenSection) {
  EntropicOmtProblem p{m2(0, 1, 1, 0), 1.0, Marginal(v2(0.5, 0.5)), Marginal(v2(0.5, 0.5))};
  const auto red = omt_to_kl(p);
  const auto sol = solve_single_step(red.mu0, red.mu1, red.prior_kernel, {1e-14, 100000, {}});
  // trace(C^T M) + eps sum M log M over the coupling family.
  const auto direct = [&](const Matrix& m) {
    double value = (p.cost.array() * m.array()).sum();
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double x = m.data()[i];
      if (x > 0.0) value += p.epsilon * x * std::log(x);
    }
    return value;
  };
  const Matrix best = reference::best_coupling_2x2(v2(0.5, 0.5), v2(0.5, 0.5), direct);
  EXPECT_LT(max_abs(sol.plans[0].flow - best), 1e-6);
  EXPECT_NEAR(red.omt_objective(sol.objective), direct(best), 1e-9);
  EXPECT_NEAR(entropic_omt_objective(p, sol.plans[0].flow), direct(sol.plans[0].flow), 1e-14);
}

TEST(EntropicOmt, LogCostRecoversTheKernel) {
  const Matrix a = m2(0.7, 0.3, 0.4, 0.6);
  const Vector mu0 = v2(2.0, 3.0);
  const double eps = 0.5;
  const Matrix cost = -eps * (mu0.asDiagonal() * a).array().log().matrix();
  const auto red = omt_to_kl({cost, eps, Marginal(mu0), Marginal(v2(2.5, 2.5))});
  EXPECT_LT(max_abs(red.prior_kernel.kernel() - a), 1e-14);
}

TEST(EntropicOmt, LargeEpsilonApproachesIndependentCoupling) {
  const Vector mu0 = v2(1.0, 3.0);
  const Vector mu1 = v2(2.5, 1.5);
  const auto red = omt_to_kl({m2(0, 1, 4, 0), 1e6, Marginal(mu0), Marginal(mu1)});
  const auto sol = solve_single_step(red.mu0, red.mu1, red.prior_kernel, {1e-13, 100000, {}});
  const Matrix independent = mu0 * mu1.transpose() / 4.0;
  EXPECT_LT(max_abs(sol.plans[0].flow - independent), 1e-5);
}
