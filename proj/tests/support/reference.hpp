#pragma once

// Reference computations written independently of the library solvers.
// Tests freeze values against these, never against the code under test.

#include "enflow/model.hpp"

#include <functional>
#include <map>
#include <vector>

namespace enflow::reference {

/// Minimizes f over [lo, hi] by golden-section search down to `tol` width.
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-12);

/// 2x2 plans with row sums r and column sums c form the family
///   [[x, r0 - x], [c0 - x, r1 - c0 + x]],  x in [max(0, c0 - r1), min(r0, c0)].
Matrix coupling_2x2(const Vector& r, const Vector& c, double x);

/// Minimizer of `objective` over the 2x2 coupling family.
Matrix best_coupling_2x2(const Vector& r, const Vector& c,
                         const std::function<double(const Matrix&)>& objective);

/// sum p log(p / q) with 0 log 0 = 0, by plain loops over flat entries.
double kl(const Matrix& p, const Matrix& q);

/// Probability of every transfer plan reachable from the integer `prior`,
/// obtained by enumerating each particle's destination individually
/// (n^N outcomes), with no multinomial formula involved.
std::map<std::vector<int>, double> particle_plan_law(const std::vector<int>& prior,
                                                     const Matrix& transition);

/// Flattens an integer plan row-major, the key used by particle_plan_law.
std::vector<int> plan_key(const Matrix& plan);

}  // namespace enflow::reference
