#pragma once

// Matrix-vector products on vectors stored as logarithms. Structural zeros
// of the kernel and zero vector entries are carried as -infinity.

#include "enflow/hmm_flow.hpp"

namespace enflow::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Kernel K with cached log(K) laid out so that every output entry of
/// K x reads one contiguous column.
class LogKernel {
 public:
  LogKernel() = default;
  explicit LogKernel(const Matrix& kernel);

  Eigen::Index rows() const noexcept { return linear_.rows(); }
  Eigen::Index cols() const noexcept { return linear_.cols(); }
  const Matrix& linear() const noexcept { return linear_; }

  /// out = log(K exp(log_x)).
  ///   off:       direct linear product of exp(log_x); may over/underflow.
  ///   automatic: max-shifted linear product; output entries whose shifted
  ///              value falls below 1e-280 are recomputed by log-sum-exp.
  ///   on:        log-sum-exp for every entry.
  /// Adds the number of multiply-adds spent to `work`.
  void apply(const Vector& log_x, Vector& out, LogDomain mode, long& work) const;

 private:
  double log_sum_exp_row(Eigen::Index i, const Vector& log_x) const;

  Matrix linear_;
  Matrix log_transposed_;  // column i = log of row i of K
};

/// log(sum_i exp(x_i)) over finite entries; -inf when none.
double log_sum_exp(const Vector& x);

}  // namespace enflow::detail
