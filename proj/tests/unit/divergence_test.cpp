#include "enflow/divergence.hpp"
#include "enflow/errors.hpp"
#include "enflow/rng.hpp"
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

const Matrix kUniform = m2(0.5, 0.5, 0.5, 0.5);

}  // namespace

TEST(Divergence, IdenticalDistributionsGiveZero) {
  Vector p(2);
  p << 0.3, 0.7;
  EXPECT_DOUBLE_EQ(kl_divergence(p, p), 0.0);
}

TEST(Divergence, SingleTermIsLogTwo) {
  Vector p(2), q(2);
  p << 1.0, 0.0;
  q << 0.5, 0.5;
  EXPECT_NEAR(kl_divergence(p, q), std::log(2.0), 1e-15);
}

TEST(Divergence, SupportViolationCarriesIndex) {
  Vector p(2), q(2);
  p << 0.5, 0.5;
  q << 0.0, 1.0;
  try {
    kl_divergence(p, q);
    FAIL() << "expected SupportError";
  } catch (const SupportError& e) {
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(Divergence, ShapeMismatchThrows) {
  EXPECT_THROW(kl_divergence(Vector(Vector::Ones(2)), Vector(Vector::Ones(3))), DimensionError);
  EXPECT_THROW(kl_divergence(Matrix(Matrix::Ones(2, 2)), Matrix(Matrix::Ones(1, 4))), DimensionError);
}

TEST(Divergence, NonnegativeForEqualMassAndJointlyConvex) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector p1 = fixtures::random_positive(rng, 4, 3.0);
    const Vector q1 = fixtures::random_positive(rng, 4, 3.0);
    const Vector p2 = fixtures::random_positive(rng, 4, 3.0);
    const Vector q2 = fixtures::random_positive(rng, 4, 3.0);
    EXPECT_GE(kl_divergence(p1, q1), 0.0);
    const double lambda = rng.uniform();
    const double mixed = kl_divergence(Vector(lambda * p1 + (1 - lambda) * p2),
                                       Vector(lambda * q1 + (1 - lambda) * q2));
    EXPECT_LE(mixed, lambda * kl_divergence(p1, q1) + (1 - lambda) * kl_divergence(p2, q2) + 1e-12);
  }
}

TEST(Likelihood, IdentityPlanUnderUniformKernel) {
  const double l = log_transfer_likelihood(Marginal(Vector::Ones(2)), TransitionModel(kUniform),
                                           Matrix::Identity(2, 2));
  EXPECT_NEAR(l, std::log(0.25), 1e-14);
}

TEST(Likelihood, MultinomialCoefficientTwo) {
  const double l = log_transfer_likelihood(Marginal(Vector::Unit(2, 0) * 2.0), TransitionModel(kUniform),
                                           m2(1, 1, 0, 0));
  EXPECT_NEAR(l, std::log(0.5), 1e-14);
}

TEST(Likelihood, ExactRationalRegression) {
  // 3!/(1!2!) * 2*8*8 * 1!/(1!0!) * 6 over 10^4, in integers.
  const long numerator = 3 * (2 * 8 * 8) * 6;
  const long denominator = 10 * 10 * 10 * 10;
  ASSERT_EQ(numerator, 2304);
  Vector prior(2);
  prior << 3, 1;
  const double l = log_transfer_likelihood(Marginal(prior), TransitionModel(m2(0.2, 0.8, 0.6, 0.4)),
                                           m2(1, 2, 1, 0));
  EXPECT_NEAR(l, std::log(static_cast<double>(numerator) / denominator), 1e-13);
}

TEST(Likelihood, MatchesParticleEnumeration) {
  const Matrix a = m2(0.3, 0.7, 0.55, 0.45);
  for (int n0 = 0; n0 <= 4; ++n0) {
    for (int n1 = 0; n0 + n1 <= 4; ++n1) {
      if (n0 + n1 == 0) continue;
      const auto law = reference::particle_plan_law({n0, n1}, a);
      Vector prior(2);
      prior << n0, n1;
      double total = 0.0;
      for (const auto& [key, p] : law) {
        const Matrix plan = m2(key[0], key[1], key[2], key[3]);
        EXPECT_NEAR(log_transfer_likelihood(Marginal(prior), TransitionModel(a), plan), std::log(p), 1e-12);
        total += p;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Likelihood, OutsideSupportIsMinusInfinity) {
  const double l = log_transfer_likelihood(Marginal(Vector::Ones(2)), TransitionModel(Matrix::Identity(2, 2)),
                                           m2(0, 1, 1, 0));
  EXPECT_EQ(l, -std::numeric_limits<double>::infinity());
}

TEST(Likelihood, RejectsInconsistentPlans) {
  EXPECT_THROW(log_transfer_likelihood(Marginal(Vector::Ones(2)), TransitionModel(kUniform), m2(0.5, 0.5, 1, 0)),
               PreconditionError);
  EXPECT_THROW(log_transfer_likelihood(Marginal(Vector::Ones(2)), TransitionModel(kUniform), m2(2, 0, 1, 0)),
               PreconditionError);
}

TEST(LikelihoodBounds, TwoParticleExample) {
  const LikelihoodReport r = likelihood_bounds(Marginal(Vector::Ones(2)), TransitionModel(kUniform),
                                               Matrix::Identity(2, 2));
  // H(I | diag(1,1) A) = 2 * log 2, N = 2, n = 2.
  const double h = 2.0 * std::log(2.0);
  const double l = std::log(0.25);
  const double logn = std::log(2.0);
  EXPECT_NEAR(r.exact_log_likelihood, l, 1e-14);
  EXPECT_NEAR(r.kl_rate, h, 1e-14);
  EXPECT_NEAR(r.upper_slack, (-h + logn) - l, 1e-13);
  EXPECT_NEAR(r.lower_slack, l - (-h - 0.5 * (4.0 + 2.0 * std::log(2.0 * M_PI) / logn) * logn), 1e-13);
  EXPECT_GE(r.upper_slack, 0.0);
  EXPECT_GE(r.lower_slack, 0.0);
  EXPECT_DOUBLE_EQ(r.n_particles, 2.0);
}

TEST(LikelihoodBounds, RequireTwoParticles) {
  EXPECT_THROW(likelihood_bounds(Marginal(Vector::Unit(2, 0)), TransitionModel(kUniform), m2(1, 0, 0, 0)),
               PreconditionError);
}

TEST(LikelihoodBounds, RateApproachesExactLikelihood) {
  Vector prior(2);
  prior << 0.4, 0.6;
  const Matrix a = m2(0.7, 0.3, 0.2, 0.8);
  const Matrix plan = m2(0.2, 0.2, 0.1, 0.5);
  double previous = std::numeric_limits<double>::infinity();
  for (double n : {10.0, 100.0, 1000.0}) {
    const auto r = likelihood_bounds(Marginal(prior * n), TransitionModel(a), plan * n);
    const double gap = std::abs(r.exact_log_likelihood / n + r.kl_rate / n);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
}
