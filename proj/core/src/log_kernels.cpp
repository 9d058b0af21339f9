#include "log_kernels.hpp"

#include <cmath>

namespace enflow::detail {
namespace {

constexpr double kLinearFloor = 1e-280;

}  // namespace

LogKernel::LogKernel(const Matrix& kernel) : linear_(kernel) {
  log_transposed_ = kernel.transpose().unaryExpr([](double v) {
    return v > 0.0 ? std::log(v) : kNegInf;
  });
}

double LogKernel::log_sum_exp_row(Eigen::Index i, const Vector& log_x) const {
  const auto column = log_transposed_.col(i);
  double peak = kNegInf;
  for (Eigen::Index j = 0; j < column.size(); ++j) {
    peak = std::max(peak, column[j] + log_x[j]);
  }
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < column.size(); ++j) {
    const double term = column[j] + log_x[j];
    if (term != kNegInf) sum += std::exp(term - peak);
  }
  return peak + std::log(sum);
}

void LogKernel::apply(const Vector& log_x, Vector& out, LogDomain mode,
                      long& work) const {
  out.resize(rows());
  work += static_cast<long>(rows() * cols());
  if (mode == LogDomain::on) {
    for (Eigen::Index i = 0; i < rows(); ++i) out[i] = log_sum_exp_row(i, log_x);
    return;
  }

  double shift = 0.0;
  if (mode == LogDomain::automatic) {
    shift = kNegInf;
    for (double v : log_x) shift = std::max(shift, v);
    if (shift == kNegInf) {
      out.setConstant(kNegInf);
      return;
    }
  }
  // Scratch reused across calls; sweeps call this O(T) times per pass.
  thread_local Vector x;
  thread_local Vector y;
  x = (log_x.array() - shift).exp().matrix();
  y.noalias() = linear_ * x;
  out = y.array().log() + shift;
  if (mode != LogDomain::automatic) return;
  for (Eigen::Index i = 0; i < rows(); ++i) {
    if (!(y[i] > kLinearFloor)) {
      out[i] = log_sum_exp_row(i, log_x);
      work += static_cast<long>(cols());
    }
  }
}

double log_sum_exp(const Vector& x) {
  double peak = kNegInf;
  for (double v : x) peak = std::max(peak, v);
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : x) {
    if (v != kNegInf) sum += std::exp(v - peak);
  }
  return peak + std::log(sum);
}

}  // namespace enflow::detail
