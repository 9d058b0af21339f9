#include "enflow/model.hpp"

#include "enflow/errors.hpp"

#include <cmath>
#include <sstream>

namespace enflow {
namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << describe(violations[i]);
  }
  return out.str();
}

std::vector<Violation> check_stochastic(const Matrix& kernel,
                                        const std::string& field,
                                        bool allow_zero_rows) {
  std::vector<Violation> out;
  if (kernel.rows() == 0 || kernel.cols() == 0) {
    out.push_back({field, std::nullopt, "nonempty", "kernel has no entries"});
    return out;
  }
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    bool row_ok = true;
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      const double v = kernel(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "entry (" << i << ", " << j << ") = " << v
            << " is negative or not finite";
        out.push_back({field, static_cast<std::size_t>(i), "nonnegative",
                       msg.str()});
        row_ok = false;
      }
    }
    if (!row_ok) continue;
    const double sum = kernel.row(i).sum();
    if (allow_zero_rows && sum == 0.0) continue;
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum;
      out.push_back({field, static_cast<std::size_t>(i), "row_stochastic",
                     msg.str()});
    }
  }
  return out;
}

Matrix normalized(Matrix kernel, Normalization normalization) {
  if (normalization == Normalization::renormalize_rows) {
    for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
      const double sum = kernel.row(i).sum();
      if (sum > 0.0 && std::isfinite(sum)) kernel.row(i) /= sum;
    }
  }
  return kernel;
}

}  // namespace

std::string describe(const Violation& violation) {
  std::ostringstream out;
  out << violation.field;
  if (violation.index) out << "[" << *violation.index << "]";
  out << ": " << violation.invariant << " (" << violation.message << ")";
  return out.str();
}

Marginal::Marginal(Vector mass) : mass_(std::move(mass)) {
  if (auto v = check("marginal"); !v.empty()) {
    throw PreconditionError(join_violations(v));
  }
}

Marginal Marginal::unchecked(Vector mass) {
  Marginal m;
  m.mass_ = std::move(mass);
  return m;
}

bool Marginal::is_integral() const {
  for (double v : mass_) {
    if (v != std::floor(v)) return false;
  }
  return true;
}

std::vector<Violation> Marginal::check(const std::string& field) const {
  std::vector<Violation> out;
  for (Eigen::Index i = 0; i < mass_.size(); ++i) {
    if (!std::isfinite(mass_[i]) || mass_[i] < 0.0) {
      std::ostringstream msg;
      msg << "mass " << mass_[i] << " is negative or not finite";
      out.push_back({field, static_cast<std::size_t>(i), "nonnegative",
                     msg.str()});
    }
  }
  return out;
}

TransitionModel::TransitionModel(Matrix kernel, Normalization normalization)
    : kernel_(normalized(std::move(kernel), normalization)) {
  if (kernel_.rows() != kernel_.cols()) {
    throw DimensionError("transition kernel must be square");
  }
  if (auto v = check("transition"); !v.empty()) {
    throw ModelError(join_violations(v));
  }
}

TransitionModel TransitionModel::unchecked(Matrix kernel) {
  TransitionModel t;
  t.kernel_ = std::move(kernel);
  return t;
}

bool TransitionModel::row_is_zero(Eigen::Index i) const {
  return (kernel_.row(i).array() == 0.0).all();
}

std::vector<Violation> TransitionModel::check(const std::string& field) const {
  auto out = check_stochastic(kernel_, field, /*allow_zero_rows=*/true);
  if (kernel_.rows() != kernel_.cols()) {
    out.push_back({field, std::nullopt, "square", "transition kernel is not square"});
  }
  return out;
}

ObservationModel::ObservationModel(Matrix kernel, Normalization normalization)
    : kernel_(normalized(std::move(kernel), normalization)) {
  if (auto v = check("observation"); !v.empty()) {
    throw ModelError(join_violations(v));
  }
}

ObservationModel ObservationModel::unchecked(Matrix kernel) {
  ObservationModel o;
  o.kernel_ = std::move(kernel);
  return o;
}

std::vector<Violation> ObservationModel::check(const std::string& field) const {
  return check_stochastic(kernel_, field, /*allow_zero_rows=*/false);
}

std::vector<Violation> validate_instance(const ProblemInstance& instance) {
  std::vector<Violation> out;
  auto append = [&out](std::vector<Violation> v) {
    out.insert(out.end(), v.begin(), v.end());
  };

  const auto n = instance.prior.size();
  append(instance.prior.check("prior"));
  const double total = instance.prior.total();
  if (!(total > 0.0)) {
    out.push_back({"prior", std::nullopt, "positive_total",
                   "prior carries no mass"});
  }

  append(instance.transition.check("transition"));
  if (instance.transition.states() != n) {
    std::ostringstream msg;
    msg << "transition has " << instance.transition.states()
        << " states but prior has " << n;
    out.push_back({"transition", std::nullopt, "dimension", msg.str()});
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (instance.prior[i] > 0.0 && instance.transition.row_is_zero(i)) {
        out.push_back({"transition", static_cast<std::size_t>(i),
                       "zero_row_with_mass",
                       "state has prior mass but an all-zero transition row"});
      }
    }
  }

  if (instance.sensors.empty()) {
    out.push_back({"sensors", std::nullopt, "nonempty",
                   "at least one observation model is required"});
  }
  for (std::size_t s = 0; s < instance.sensors.size(); ++s) {
    const auto field = "sensors[" + std::to_string(s) + "]";
    append(instance.sensors[s].check(field));
    if (instance.sensors[s].states() != n) {
      out.push_back({field, std::nullopt, "dimension",
                     "observation model row count differs from prior size"});
    }
  }

  if (instance.observations.empty()) {
    out.push_back({"observations", std::nullopt, "nonempty",
                   "horizon T must be at least 1"});
  }
  for (std::size_t t = 0; t < instance.observations.size(); ++t) {
    const auto& row = instance.observations[t];
    const auto field = "observations[" + std::to_string(t) + "]";
    if (row.size() != instance.sensors.size()) {
      out.push_back({field, std::nullopt, "dimension",
                     "one observation per sensor is required"});
      continue;
    }
    for (std::size_t s = 0; s < row.size(); ++s) {
      const auto& obs = row[s];
      const auto obs_field = field + "[" + std::to_string(s) + "]";
      if (obs.counts.size() != instance.sensors[s].symbols()) {
        out.push_back({obs_field, std::nullopt, "dimension",
                       "count vector length differs from sensor symbol count"});
        continue;
      }
      bool nonneg = true;
      for (Eigen::Index k = 0; k < obs.counts.size(); ++k) {
        if (!std::isfinite(obs.counts[k]) || obs.counts[k] < 0.0) {
          out.push_back({obs_field, static_cast<std::size_t>(k), "nonnegative",
                         "observation count is negative or not finite"});
          nonneg = false;
        }
      }
      const double obs_total = obs.counts.sum();
      if (nonneg && std::abs(obs_total - total) >
                        kMassTolerance * std::max(1.0, std::abs(total))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "observed total " << obs_total << " differs from prior total "
            << total;
        out.push_back({obs_field, std::nullopt, "mass_conservation", msg.str()});
      }
    }
  }
  return out;
}

void require_valid(const ProblemInstance& instance) {
  if (auto v = validate_instance(instance); !v.empty()) {
    throw PreconditionError("invalid problem instance: " + join_violations(v));
  }
}

std::vector<Marginal> forward_propagate(const Marginal& prior,
                                        const TransitionModel& transition,
                                        int steps) {
  if (steps < 0) throw PreconditionError("steps must be nonnegative");
  if (transition.states() != prior.size()) {
    throw DimensionError("prior and transition sizes differ");
  }
  std::vector<Marginal> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(prior);
  for (int t = 0; t < steps; ++t) {
    Vector next = transition.kernel().transpose() * out.back().mass();
    out.push_back(Marginal::unchecked(std::move(next)));
  }
  return out;
}

}  // namespace enflow
