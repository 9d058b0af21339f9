#include "enflow/oracle.hpp"

#include "enflow/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace enflow {
namespace {

// ---------------------------------------------------------------------------
// Enumeration

struct Enumerator {
  const Matrix& a;
  std::vector<long> rows;
  std::vector<long> cols;
  Eigen::Index n;
  Eigen::MatrixXi current;
  Eigen::MatrixXi best;
  double best_value = -std::numeric_limits<double>::infinity();
  long visited = 0;

  double log_likelihood() const {
    double value = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      value += std::lgamma(static_cast<double>(rows[i]) + 1.0);
      for (Eigen::Index j = 0; j < n; ++j) {
        const int m = current(i, j);
        if (m == 0) continue;
        value += m * std::log(a(i, j)) - std::lgamma(m + 1.0);
      }
    }
    return value;
  }

  // Fills row i from column j on, with `left` still to place in that row.
  void fill(Eigen::Index i, Eigen::Index j, long left, std::vector<long>& col_left) {
    if (i == n) {
      ++visited;
      const double value = log_likelihood();
      if (value > best_value) {
        best_value = value;
        best = current;
      }
      return;
    }
    if (j == n - 1) {
      if (left > col_left[j] || (left > 0 && a(i, j) == 0.0)) return;
      current(i, j) = static_cast<int>(left);
      col_left[j] -= left;
      fill(i + 1, 0, i + 1 < n ? rows[i + 1] : 0, col_left);
      col_left[j] += left;
      current(i, j) = 0;
      return;
    }
    const long cap = a(i, j) == 0.0 ? 0 : std::min(left, col_left[j]);
    for (long v = 0; v <= cap; ++v) {
      current(i, j) = static_cast<int>(v);
      col_left[j] -= v;
      fill(i, j + 1, left - v, col_left);
      col_left[j] += v;
    }
    current(i, j) = 0;
  }
};

long as_count(double value, const char* what) {
  const double r = std::round(value);
  if (value < 0.0 || std::abs(value - r) > 1e-9) {
    throw PreconditionError(std::string("enumeration: ") + what + " must hold nonnegative integers");
  }
  return static_cast<long>(r);
}

}  // namespace

OracleResult brute_force_ml_plan(const Marginal& prior, const TransitionModel& transition,
                                 const Marginal& target) {
  const Eigen::Index n = prior.size();
  if (transition.states() != n || target.size() != n) {
    throw DimensionError("enumeration: prior, kernel and target sizes differ");
  }
  if (n > kEnumerationMaxStates || prior.total() > kEnumerationMaxMass) {
    std::ostringstream msg;
    msg << "enumeration: instance with n=" << n << ", N=" << prior.total()
        << " exceeds the limit n <= " << kEnumerationMaxStates
        << ", N <= " << kEnumerationMaxMass;
    throw EnumerationLimitError(msg.str());
  }
  Enumerator e{transition.kernel(), {}, {}, n, Eigen::MatrixXi::Zero(n, n), {}, -std::numeric_limits<double>::infinity(), 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    e.rows.push_back(as_count(prior[i], "prior"));
    e.cols.push_back(as_count(target[i], "target"));
  }
  long total_rows = 0, total_cols = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total_rows += e.rows[i];
    total_cols += e.cols[i];
  }
  if (total_rows != total_cols) throw PreconditionError("enumeration: prior and target masses differ");

  std::vector<long> col_left = e.cols;
  if (n > 0) e.fill(0, 0, e.rows[0], col_left);
  if (e.visited == 0) {
    throw InfeasibleError("enumeration: no integer plan has the required marginals on the kernel support");
  }
  OracleResult out;
  out.method = "enumeration";
  out.integer_plan = e.best.cast<double>();
  out.log_likelihood = e.best_value;
  out.objective = -e.best_value;
  out.candidates = e.visited;
  out.marginals = {prior, target};
  out.transfer_plans = {out.integer_plan};
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Dense convex program
//
//   min sum_blocks sum_{(i,j) active} x_ij log(x_ij / (r_i K_ij))
//   s.t. linear equalities
//
// where r_i is either a fixed positive number or another variable (a hidden
// marginal entry). The objective is jointly convex in (x, r).

constexpr int kFixed = -1;

struct Block {
  Matrix kernel;
  /// Per row: variable index of r_i, or kFixed.
  std::vector<int> row_var;
  Vector row_fixed;
  /// var(i, j) = variable index, or -1 when the entry is pinned to zero.
  Eigen::MatrixXi var;
};

struct Constraint {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

struct Program {
  int size = 0;
  std::vector<Block> blocks;
  std::vector<Constraint> constraints;

  int add_var() { return size++; }

  double row_source(const Block& b, Eigen::Index i, const Vector& x) const {
    return b.row_var[i] == kFixed ? b.row_fixed[i] : x[b.row_var[i]];
  }

  double value(const Vector& x) const {
    double f = 0.0;
    for (const auto& b : blocks) {
      for (Eigen::Index i = 0; i < b.var.rows(); ++i) {
        const double r = row_source(b, i, x);
        for (Eigen::Index j = 0; j < b.var.cols(); ++j) {
          const int k = b.var(i, j);
          if (k < 0) continue;
          f += x[k] * std::log(x[k] / (r * b.kernel(i, j)));
        }
      }
    }
    return f;
  }

  void derivatives(const Vector& x, Vector& g, Matrix& h) const {
    g = Vector::Zero(size);
    h = Matrix::Zero(size, size);
    for (const auto& b : blocks) {
      for (Eigen::Index i = 0; i < b.var.rows(); ++i) {
        const double r = row_source(b, i, x);
        const int rv = b.row_var[i];
        for (Eigen::Index j = 0; j < b.var.cols(); ++j) {
          const int k = b.var(i, j);
          if (k < 0) continue;
          g[k] += std::log(x[k] / (r * b.kernel(i, j))) + 1.0;
          h(k, k) += 1.0 / x[k];
          if (rv != kFixed) {
            g[rv] -= x[k] / r;
            h(k, rv) -= 1.0 / r;
            h(rv, k) -= 1.0 / r;
            h(rv, rv) += x[k] / (r * r);
          }
        }
      }
    }
  }

  Matrix constraint_matrix(Vector& rhs) const {
    Matrix e = Matrix::Zero(static_cast<Eigen::Index>(constraints.size()), size);
    rhs.resize(static_cast<Eigen::Index>(constraints.size()));
    for (std::size_t c = 0; c < constraints.size(); ++c) {
      for (const auto& [k, coef] : constraints[c].terms) e(c, k) += coef;
      rhs[c] = constraints[c].rhs;
    }
    return e;
  }
};

struct Solved {
  Vector x;
  double value = 0.0;
  double violation = 0.0;
  double stationarity = 0.0;
  long iterations = 0;
};

Solved newton(const Program& p, Vector x, double scale, const OracleOptions& opts) {
  Vector rhs;
  const Matrix e = p.constraint_matrix(rhs);
  // Orthonormal nullspace basis from the full SVD.
  Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;
  const Matrix z = svd.matrixV().rightCols(p.size - rank);

  Solved out;
  Vector g;
  Matrix h;
  for (long it = 0;; ++it) {
    p.derivatives(x, g, h);
    const Vector zg = z.transpose() * g;
    out.stationarity = zg.size() ? zg.cwiseAbs().maxCoeff() : 0.0;
    out.violation = rhs.size() ? (e * x - rhs).cwiseAbs().maxCoeff() / scale : 0.0;
    out.iterations = it;
    if (out.stationarity <= 1e-3 * opts.tol && out.violation <= opts.tol) break;
    if (it >= opts.max_iters) {
      if (out.stationarity <= opts.tol && out.violation <= opts.tol) break;
      throw ConvergenceError(std::max(out.stationarity, out.violation), it,
                             "oracle: Newton iteration did not reach its certificate");
    }
    const Matrix reduced = z.transpose() * h * z;
    Eigen::LDLT<Matrix> ldlt(reduced);
    Vector step = z * ldlt.solve(-zg);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      throw ConvergenceError(out.stationarity, it, "oracle: reduced Hessian is singular");
    }
    const double slope = g.dot(step);
    if (slope >= 0.0) {
      // Already at the floating-point floor of the objective.
      if (out.stationarity <= opts.tol && out.violation <= opts.tol) break;
      throw ConvergenceError(out.stationarity, it, "oracle: no descent direction");
    }
    double alpha = 1.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (step[k] < 0.0) alpha = std::min(alpha, -0.95 * x[k] / step[k]);
    }
    const double f0 = p.value(x);
    Vector trial = x + alpha * step;
    while (p.value(trial) > f0 + 0.25 * alpha * slope && alpha > 1e-16) {
      alpha *= 0.5;
      trial = x + alpha * step;
    }
    if (alpha <= 1e-16) {
      if (out.stationarity <= opts.tol && out.violation <= opts.tol) break;
      throw ConvergenceError(out.stationarity, it, "oracle: line search stalled");
    }
    x = std::move(trial);
  }
  out.value = p.value(x);
  out.x = std::move(x);
  return out;
}

void require_positive(const Matrix& k, const char* what) {
  if (!(k.array() > 0.0).all()) {
    throw PreconditionError(std::string("oracle: ") + what + " must be strictly positive");
  }
}

// Adds an n x m plan block whose rows are scaled by `source` (fixed values or
// variables) and returns it. Rows with fixed zero source and columns with
// zero fixed target are pinned to zero.
Block make_block(Program& p, const Matrix& kernel, const std::vector<int>& row_var,
                 const Vector& row_fixed, const std::optional<Vector>& col_fixed) {
  Block b;
  b.kernel = kernel;
  b.row_var = row_var;
  b.row_fixed = row_fixed;
  b.var = Eigen::MatrixXi::Constant(kernel.rows(), kernel.cols(), -1);
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    if (row_var[i] == kFixed && row_fixed[i] == 0.0) continue;
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      if (col_fixed && (*col_fixed)[j] == 0.0) continue;
      b.var(i, j) = p.add_var();
    }
  }
  return b;
}

// Row sums equal the source, column sums equal the target (fixed or variable).
void add_marginal_constraints(Program& p, const Block& b, const std::vector<int>& col_var,
                              const Vector& col_fixed) {
  for (Eigen::Index i = 0; i < b.var.rows(); ++i) {
    Constraint c;
    for (Eigen::Index j = 0; j < b.var.cols(); ++j) {
      if (b.var(i, j) >= 0) c.terms.emplace_back(b.var(i, j), 1.0);
    }
    if (b.row_var[i] == kFixed) {
      if (b.row_fixed[i] == 0.0) continue;
      c.rhs = b.row_fixed[i];
    } else {
      c.terms.emplace_back(b.row_var[i], -1.0);
    }
    p.constraints.push_back(std::move(c));
  }
  for (Eigen::Index j = 0; j < b.var.cols(); ++j) {
    Constraint c;
    for (Eigen::Index i = 0; i < b.var.rows(); ++i) {
      if (b.var(i, j) >= 0) c.terms.emplace_back(b.var(i, j), 1.0);
    }
    if (col_var[j] == kFixed) {
      if (col_fixed[j] == 0.0) continue;
      c.rhs = col_fixed[j];
    } else {
      c.terms.emplace_back(col_var[j], -1.0);
    }
    p.constraints.push_back(std::move(c));
  }
}

Matrix extract(const Block& b, const Vector& x) {
  Matrix out = Matrix::Zero(b.var.rows(), b.var.cols());
  for (Eigen::Index i = 0; i < b.var.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.var.cols(); ++j) {
      if (b.var(i, j) >= 0) out(i, j) = x[b.var(i, j)];
    }
  }
  return out;
}

// Independent coupling of two positive-sum vectors, placed on active entries.
void seed_block(const Block& b, const Vector& rows, const Vector& cols, Vector& x) {
  const double total = rows.sum();
  for (Eigen::Index i = 0; i < b.var.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.var.cols(); ++j) {
      if (b.var(i, j) >= 0) x[b.var(i, j)] = rows[i] * cols[j] / total;
    }
  }
}

}  // namespace

OracleResult generic_kl_solver(const Marginal& mu0, const Marginal& muT,
                               const TransitionModel& transition, int horizon,
                               const OracleOptions& options) {
  const Eigen::Index n = mu0.size();
  if (horizon < 1) throw PreconditionError("oracle: horizon must be at least 1");
  if (muT.size() != n || transition.states() != n) {
    throw DimensionError("oracle: endpoint and kernel sizes differ");
  }
  const double mass = mu0.total();
  if (!(mass > 0.0) || std::abs(mass - muT.total()) > kMassTolerance * mass) {
    throw PreconditionError("oracle: endpoint masses must be positive and equal");
  }
  require_positive(transition.kernel(), "transition kernel");

  Program p;
  // marginal variables for t = 1..T-1
  std::vector<std::vector<int>> mu_var(static_cast<std::size_t>(horizon) + 1,
                                       std::vector<int>(static_cast<std::size_t>(n), kFixed));
  for (int t = 1; t < horizon; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) mu_var[t][i] = p.add_var();
  }
  const Vector interior = Vector::Constant(n, mass / static_cast<double>(n));
  auto fixed_at = [&](int t) -> Vector {
    if (t == 0) return mu0.mass();
    if (t == horizon) return muT.mass();
    return Vector::Zero(n);
  };
  for (int t = 1; t <= horizon; ++t) {
    std::optional<Vector> col_fixed;
    if (t == horizon) col_fixed = muT.mass();
    p.blocks.push_back(make_block(p, transition.kernel(), mu_var[t - 1], fixed_at(t - 1), col_fixed));
  }
  for (int t = 1; t <= horizon; ++t) {
    add_marginal_constraints(p, p.blocks[t - 1], mu_var[t], fixed_at(t));
  }

  Vector x = Vector::Zero(p.size);
  for (int t = 1; t < horizon; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) x[mu_var[t][i]] = interior[i];
  }
  for (int t = 1; t <= horizon; ++t) {
    const Vector rows = t == 1 ? mu0.mass() : interior;
    const Vector cols = t == horizon ? muT.mass() : interior;
    seed_block(p.blocks[t - 1], rows, cols, x);
  }

  const Solved s = newton(p, std::move(x), mass, options);
  OracleResult out;
  out.method = "nullspace_newton";
  out.objective = s.value;
  out.constraint_violation = s.violation;
  out.stationarity = s.stationarity;
  out.iterations = s.iterations;
  for (int t = 0; t <= horizon; ++t) {
    if (t == 0 || t == horizon) {
      out.marginals.push_back(t == 0 ? mu0 : muT);
      continue;
    }
    Vector m(n);
    for (Eigen::Index i = 0; i < n; ++i) m[i] = s.x[mu_var[t][i]];
    out.marginals.push_back(Marginal::unchecked(std::move(m)));
  }
  for (const auto& b : p.blocks) out.transfer_plans.push_back(extract(b, s.x));
  return out;
}

OracleResult generic_kl_solver(const ProblemInstance& instance, const OracleOptions& options) {
  require_valid(instance);
  const int horizon = instance.horizon();
  const Eigen::Index n = instance.prior.size();
  const double mass = instance.prior.total();
  require_positive(instance.transition.kernel(), "transition kernel");
  for (const auto& sensor : instance.sensors) require_positive(sensor.kernel(), "observation kernel");

  Program p;
  std::vector<std::vector<int>> mu_var(static_cast<std::size_t>(horizon) + 1,
                                       std::vector<int>(static_cast<std::size_t>(n), kFixed));
  for (int t = 1; t <= horizon; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) mu_var[t][i] = p.add_var();
  }
  const Vector none = Vector::Zero(n);
  const Vector& mu0 = instance.prior.mass();
  std::vector<int> transfer_blocks;
  std::vector<std::vector<int>> observation_blocks(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    transfer_blocks.push_back(static_cast<int>(p.blocks.size()));
    p.blocks.push_back(make_block(p, instance.transition.kernel(), mu_var[t - 1],
                                  t == 1 ? mu0 : none, std::nullopt));
    for (std::size_t s = 0; s < instance.sensor_count(); ++s) {
      observation_blocks[t - 1].push_back(static_cast<int>(p.blocks.size()));
      p.blocks.push_back(make_block(p, instance.sensors[s].kernel(), mu_var[t], none,
                                    instance.observations[t - 1][s].counts));
    }
  }
  for (int t = 1; t <= horizon; ++t) {
    add_marginal_constraints(p, p.blocks[transfer_blocks[t - 1]], mu_var[t], none);
    for (std::size_t s = 0; s < instance.sensor_count(); ++s) {
      const Vector& phi = instance.observations[t - 1][s].counts;
      const std::vector<int> fixed_cols(static_cast<std::size_t>(phi.size()), kFixed);
      add_marginal_constraints(p, p.blocks[observation_blocks[t - 1][s]], fixed_cols, phi);
    }
  }

  const Vector interior = Vector::Constant(n, mass / static_cast<double>(n));
  Vector x = Vector::Zero(p.size);
  for (int t = 1; t <= horizon; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) x[mu_var[t][i]] = interior[i];
    seed_block(p.blocks[transfer_blocks[t - 1]], t == 1 ? mu0 : interior, interior, x);
    for (std::size_t s = 0; s < instance.sensor_count(); ++s) {
      seed_block(p.blocks[observation_blocks[t - 1][s]], interior,
                 instance.observations[t - 1][s].counts, x);
    }
  }

  const Solved sol = newton(p, std::move(x), mass, options);
  OracleResult out;
  out.method = "nullspace_newton";
  out.objective = sol.value;
  out.constraint_violation = sol.violation;
  out.stationarity = sol.stationarity;
  out.iterations = sol.iterations;
  out.marginals.push_back(instance.prior);
  for (int t = 1; t <= horizon; ++t) {
    Vector m(n);
    for (Eigen::Index i = 0; i < n; ++i) m[i] = sol.x[mu_var[t][i]];
    out.marginals.push_back(Marginal::unchecked(std::move(m)));
    out.transfer_plans.push_back(extract(p.blocks[transfer_blocks[t - 1]], sol.x));
    std::vector<Matrix> per_sensor;
    for (int b : observation_blocks[t - 1]) per_sensor.push_back(extract(p.blocks[b], sol.x));
    out.observation_plans.push_back(std::move(per_sensor));
  }
  return out;
}

}  // namespace enflow
