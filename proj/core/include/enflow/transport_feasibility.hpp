#pragma once

#include "enflow/model.hpp"

namespace enflow {

/// Largest mass that can be routed from `source` to `target` using only the
/// positive entries of `support` as arcs (bipartite max-flow).
double max_transportable_mass(const Matrix& support, const Vector& source,
                              const Vector& target);

/// True when some nonnegative matrix with pattern inside support(`support`)
/// has row sums `source` and column sums `target`. Masses must have equal
/// totals; `relative_tol` absorbs floating-point slack in the flow value.
bool transport_feasible(const Matrix& support, const Vector& source,
                        const Vector& target, double relative_tol = 1e-12);

}  // namespace enflow
