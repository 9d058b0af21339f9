#include "reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace enflow;

TEST(Reference, GoldenSectionFindsParabolaMinimum) {
  EXPECT_NEAR(reference::golden_section_min([](double x) { return (x - 0.3) * (x - 0.3); }, -1.0, 2.0), 0.3, 1e-9);
}

TEST(Reference, CouplingFamilyHasTheMarginals) {
  const Vector r = (Vector(2) << 1.0, 2.0).finished();
  const Vector c = (Vector(2) << 1.5, 1.5).finished();
  const Matrix m = reference::coupling_2x2(r, c, 0.4);
  EXPECT_NEAR((Vector(m.rowwise().sum()) - r).norm(), 0.0, 1e-15);
  EXPECT_NEAR((Vector(m.colwise().sum().transpose()) - c).norm(), 0.0, 1e-15);
}

TEST(Reference, ParticleLawSumsToOne) {
  Matrix a(3, 3);
  a << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8, 0.6, 0.4, 0.0;
  const auto law = reference::particle_plan_law({2, 1, 2}, a);
  double total = 0.0;
  for (const auto& [key, p] : law) total += p;
  EXPECT_NEAR(total, 1.0, 1e-14);
}
