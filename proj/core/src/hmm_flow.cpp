#include "enflow/hmm_flow.hpp"

#include "enflow/divergence.hpp"
#include "enflow/errors.hpp"
#include "log_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace enflow {

using detail::kNegInf;
using detail::LogKernel;

namespace {

Vector log_of(const Vector& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? std::log(v) : kNegInf; });
}

// a - b with (-inf) - anything = -inf; used for x ./ y where x = 0 means 0.
Vector log_ratio(const Vector& log_num, const Vector& log_den, std::size_t t,
                 const char* what) {
  Vector out(log_num.size());
  for (Eigen::Index i = 0; i < log_num.size(); ++i) {
    if (log_num[i] == kNegInf) {
      out[i] = kNegInf;
    } else if (log_den[i] == kNegInf) {
      std::ostringstream msg;
      msg << what << ": positive mass meets a zero denominator at t=" << t
          << ", state " << i;
      throw DegenerateSupportError(t, static_cast<std::size_t>(i), msg.str());
    } else {
      out[i] = log_num[i] - log_den[i];
    }
  }
  return out;
}

// value = lin * exp(shift), with max(lin) = 1 after normalize().
struct Scaled {
  Vector lin;
  double shift = 0.0;
};

void normalize(Scaled& x) {
  const double peak = x.lin.maxCoeff();
  if (peak > 0.0) {
    x.lin *= 1.0 / peak;
    x.shift += std::log(peak);
  }
}

Vector to_log(const Scaled& x) { return (x.lin.array().log() + x.shift).matrix(); }

Scaled from_log(const Vector& log_x) {
  double peak = kNegInf;
  for (double v : log_x) peak = std::max(peak, v);
  if (peak == kNegInf) return {Vector::Zero(log_x.size()), 0.0};
  return {(log_x.array() - peak).exp().matrix(), peak};
}

// log of the ratio between the largest and smallest entry of K x over all
// nonnegative x whose largest entry is 1; infinite unless K > 0.
double kernel_range(const Matrix& k) {
  if (k.size() == 0 || !(k.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log(k.maxCoeff() / k.minCoeff()) + std::log(static_cast<double>(k.cols()));
}

// log(max / min) over the positive entries; infinite when there are none.
double positive_range(const Vector& x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double v : x) {
    if (v > 0.0) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi > 0.0 ? std::log(hi / lo) : std::numeric_limits<double>::infinity();
}

// Scaled linear recursions stay clear of underflow while every vector spans
// less than this many nats.
constexpr double kScaledRangeLimit = 600.0;

double weighted_log_sum(const Vector& weights, const Vector& logs) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) sum += weights[i] * logs[i];
  }
  return sum;
}

}  // namespace

struct FlowSweeper::Impl {
  Impl(const ProblemInstance& inst, const EstimatorOptions& opts);

  int horizon = 0;
  std::size_t sensors = 0;
  Eigen::Index states = 0;
  double mass = 0.0;
  EstimatorOptions options;

  Vector mu0;
  Vector log_mu0;
  LogKernel a;
  LogKernel a_t;
  std::vector<LogKernel> b;
  std::vector<LogKernel> b_t;
  /// phi[t][s], t = 1..T (index 0 unused)
  std::vector<std::vector<Vector>> phi;
  std::vector<std::vector<Vector>> log_phi;

  DualState state;
  /// log(A w_t) for t = 1..T+1, with w_{T+1} = 1.
  std::vector<Vector> log_aw;
  /// log(B_s v_ts), t = 1..T (index 0 unused)
  std::vector<std::vector<Vector>> log_bv;

  double mu0_log_u1 = 0.0;
  double phi_log_v = 0.0;

  // Automatic mode on strictly positive kernels runs the sweeps on scaled
  // linear vectors and refreshes the log state above only when it is read.
  bool scaled = false;
  bool logs_stale = false;
  Scaled f_u1;
  std::vector<Scaled> f_y;                // t = 1..T at t - 1
  std::vector<Scaled> f_aw;               // t = 1..T+1 at t
  std::vector<std::vector<Scaled>> f_bv;  // t = 1..T at t
  std::vector<std::vector<Scaled>> f_v;   // t = 1..T at t
  Vector scratch_n, scratch_m, scratch_base, scratch_prefix;
  std::vector<Vector> scratch_suffix;
  std::vector<double> scratch_suffix_shift;
  std::vector<double> block_trace;
  long work = 0;

  Vector& log_v(int t, std::size_t s) { return state.log_v[t - 1][s]; }
  const Vector& log_v(int t, std::size_t s) const { return state.log_v[t - 1][s]; }
  Vector& log_w(int t) { return state.log_w[t - 1]; }
  const Vector& log_w(int t) const { return state.log_w[t - 1]; }
  Vector& log_y(int t) { return state.log_y[t - 1]; }

  void backward();
  void update_u1();
  void update_v(int t);
  void sweep();
  bool scaled_is_safe() const;
  void enter_scaled();
  void scaled_backward();
  void scaled_update_u1();
  void scaled_update_v(int t);
  void sync_logs();
  double block_value(const Vector& log_y_plus_w) const;
  double dual_objective() const;
  std::vector<Vector> log_marginals() const;
  double observation_residual() const;
  FlowEstimate reconstruct() const;
};

FlowSweeper::Impl::Impl(const ProblemInstance& inst, const EstimatorOptions& opts)
    : horizon(inst.horizon()),
      sensors(inst.sensor_count()),
      states(inst.prior.size()),
      mass(inst.prior.total()),
      options(opts),
      mu0(inst.prior.mass()),
      log_mu0(log_of(inst.prior.mass())),
      a(inst.transition.kernel()),
      a_t(Matrix(inst.transition.kernel().transpose())) {
  for (const auto& sensor : inst.sensors) {
    b.emplace_back(sensor.kernel());
    b_t.emplace_back(Matrix(sensor.kernel().transpose()));
  }
  phi.assign(static_cast<std::size_t>(horizon) + 1, {});
  log_phi.assign(static_cast<std::size_t>(horizon) + 1, {});
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      phi[t].push_back(inst.observations[t - 1][s].counts);
      log_phi[t].push_back(log_of(inst.observations[t - 1][s].counts));
    }
  }

  state.log_u1 = Vector::Zero(states);
  state.log_v.assign(static_cast<std::size_t>(horizon), {});
  state.log_y.assign(static_cast<std::size_t>(horizon), Vector::Zero(states));
  state.log_w.assign(static_cast<std::size_t>(horizon), Vector::Zero(states));
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      Vector init = Vector::Zero(b[s].cols());
      if (opts.initial) {
        const auto& given = opts.initial->log_v;
        if (given.size() != static_cast<std::size_t>(horizon) ||
            given[t - 1].size() != sensors ||
            given[t - 1][s].size() != b[s].cols() || !given[t - 1][s].allFinite()) {
          throw PreconditionError(
              "initial dual state must hold finite log v_ts for every t and sensor");
        }
        init = given[t - 1][s];
      }
      // Zero counts pin v to zero whatever the starting point.
      for (Eigen::Index k = 0; k < init.size(); ++k) {
        if (phi[t][s][k] == 0.0) init[k] = kNegInf;
      }
      state.log_v[t - 1].push_back(std::move(init));
    }
  }

  log_bv.assign(static_cast<std::size_t>(horizon) + 1, {});
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      Vector out;
      b[s].apply(log_v(t, s), out, options.log_domain, work);
      log_bv[t].push_back(std::move(out));
      phi_log_v += weighted_log_sum(phi[t][s], log_v(t, s));
    }
  }
  log_aw.assign(static_cast<std::size_t>(horizon) + 2, Vector());
  a.apply(Vector::Zero(states), log_aw[horizon + 1], options.log_domain, work);
  backward();
  if (scaled_is_safe()) enter_scaled();
}

bool FlowSweeper::Impl::scaled_is_safe() const {
  if (options.log_domain != LogDomain::automatic || options.record_block_trace) return false;
  const double range_a = kernel_range(a.linear());
  double range_b = 0.0;
  for (std::size_t s = 0; s < sensors; ++s) {
    range_b = std::max({range_b, kernel_range(b[s].linear()), kernel_range(b_t[s].linear())});
  }
  double range_phi = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      range_phi = std::max(range_phi, positive_range(phi[t][s]));
    }
  }
  // Loose sum of the spans of every factor that meets in one product.
  const double bound = 3.0 * range_a + (static_cast<double>(sensors) + 1.0) * range_b +
                       positive_range(mu0) + range_phi;
  return std::isfinite(bound) && bound < kScaledRangeLimit;
}

void FlowSweeper::Impl::enter_scaled() {
  scaled = true;
  f_y.clear();
  for (int t = 1; t <= horizon; ++t) f_y.push_back(from_log(log_y(t)));
  f_aw.assign(static_cast<std::size_t>(horizon) + 2, Scaled{});
  for (int t = 1; t <= horizon + 1; ++t) f_aw[t] = from_log(log_aw[t]);
  f_bv.assign(static_cast<std::size_t>(horizon) + 1, {});
  f_v.assign(static_cast<std::size_t>(horizon) + 1, {});
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      f_bv[t].push_back(from_log(log_bv[t][s]));
      f_v[t].push_back(from_log(log_v(t, s)));
    }
  }
}

void FlowSweeper::Impl::scaled_backward() {
  Vector& w = scratch_n;
  for (int t = horizon; t >= 1; --t) {
    w = f_aw[t + 1].lin;
    double shift = f_aw[t + 1].shift;
    for (std::size_t s = 0; s < sensors; ++s) {
      w.array() *= f_bv[t][s].lin.array();
      shift += f_bv[t][s].shift;
    }
    f_aw[t].lin.noalias() = a.linear() * w;
    f_aw[t].shift = shift;
    normalize(f_aw[t]);
    work += static_cast<long>(states * states);
  }
}

void FlowSweeper::Impl::scaled_update_u1() {
  const Scaled& aw1 = f_aw[1];
  f_u1.lin = aw1.lin.cwiseInverse();
  f_u1.shift = 1.0 - aw1.shift;
  normalize(f_u1);
  scratch_n = mu0.cwiseProduct(f_u1.lin);
  Scaled& y1 = f_y[0];
  y1.lin.noalias() = a_t.linear() * scratch_n;
  y1.shift = f_u1.shift;
  normalize(y1);
  work += static_cast<long>(states * states);
}

// Products of normalized vectors are left unnormalized: the range bound of
// scaled_is_safe() covers them.
void FlowSweeper::Impl::scaled_update_v(int t) {
  Vector& base = scratch_base;
  base = f_y[t - 1].lin.cwiseProduct(f_aw[t + 1].lin);
  const double base_shift = f_y[t - 1].shift + f_aw[t + 1].shift;
  scratch_suffix.resize(sensors + 1);
  scratch_suffix_shift.assign(sensors + 1, 0.0);
  scratch_suffix[sensors].setOnes(states);
  for (std::size_t s = sensors; s-- > 0;) {
    scratch_suffix[s] = scratch_suffix[s + 1].cwiseProduct(f_bv[t][s].lin);
    scratch_suffix_shift[s] = scratch_suffix_shift[s + 1] + f_bv[t][s].shift;
  }
  Vector& prefix = scratch_prefix;
  prefix.setOnes(states);
  double prefix_shift = 0.0;

  for (std::size_t s = 0; s < sensors; ++s) {
    scratch_n = base.cwiseProduct(prefix).cwiseProduct(scratch_suffix[s + 1]);
    scratch_m.noalias() = b_t[s].linear() * scratch_n;
    work += static_cast<long>(b_t[s].rows() * b_t[s].cols());
    Scaled& v = f_v[t][s];
    v.lin = phi[t][s].cwiseQuotient(scratch_m);
    v.shift = 1.0 - (base_shift + prefix_shift + scratch_suffix_shift[s + 1]);
    normalize(v);
    Scaled& bv = f_bv[t][s];
    bv.lin.noalias() = b[s].linear() * v.lin;
    bv.shift = v.shift;
    normalize(bv);
    work += static_cast<long>(b[s].rows() * b[s].cols());
    prefix.array() *= bv.lin.array();
    prefix_shift += bv.shift;
  }
  if (t < horizon) {
    scratch_n = f_y[t - 1].lin.cwiseProduct(prefix);
    Scaled& next = f_y[t];
    next.lin.noalias() = a_t.linear() * scratch_n;
    next.shift = f_y[t - 1].shift + prefix_shift;
    normalize(next);
    work += static_cast<long>(states * states);
  }
}

void FlowSweeper::Impl::sync_logs() {
  if (!logs_stale) return;
  state.log_u1 = (1.0 - to_log(f_aw[1]).array()).matrix();
  mu0_log_u1 = weighted_log_sum(mu0, state.log_u1);
  phi_log_v = 0.0;
  for (int t = 1; t <= horizon + 1; ++t) log_aw[t] = to_log(f_aw[t]);
  for (int t = 1; t <= horizon; ++t) {
    log_y(t) = to_log(f_y[t - 1]);
    Vector lw = log_aw[t + 1];
    for (std::size_t s = 0; s < sensors; ++s) {
      log_bv[t][s] = to_log(f_bv[t][s]);
      log_v(t, s) = to_log(f_v[t][s]);
      lw += log_bv[t][s];
      phi_log_v += weighted_log_sum(phi[t][s], log_v(t, s));
    }
    log_w(t) = std::move(lw);
  }
  logs_stale = false;
}

void FlowSweeper::Impl::backward() {
  for (int t = horizon; t >= 1; --t) {
    Vector lw = log_aw[t + 1];
    for (std::size_t s = 0; s < sensors; ++s) lw += log_bv[t][s];
    log_w(t) = std::move(lw);
    a.apply(log_w(t), log_aw[t], options.log_domain, work);
  }
}

double FlowSweeper::Impl::block_value(const Vector& log_y_plus_w) const {
  // -(1/e) y_t^T w_t + mu0^T log u1 + sum Phi^T log v
  const double lse = detail::log_sum_exp(log_y_plus_w);
  const double coupling = lse == kNegInf ? 0.0 : std::exp(lse - 1.0);
  return -coupling + mu0_log_u1 + phi_log_v;
}

void FlowSweeper::Impl::update_u1() {
  const Vector& law1 = log_aw[1];
  for (Eigen::Index i = 0; i < states; ++i) {
    if (law1[i] != kNegInf) {
      state.log_u1[i] = 1.0 - law1[i];
    } else if (mu0[i] > 0.0) {
      std::ostringstream msg;
      msg << "u_1 update: state " << i
          << " carries prior mass but A w_1 vanishes there";
      throw DegenerateSupportError(1, static_cast<std::size_t>(i), msg.str());
    } else {
      state.log_u1[i] = kNegInf;
    }
  }
  mu0_log_u1 = weighted_log_sum(mu0, state.log_u1);
  Vector weighted(states);
  for (Eigen::Index i = 0; i < states; ++i) {
    weighted[i] = log_mu0[i] == kNegInf ? kNegInf : log_mu0[i] + state.log_u1[i];
  }
  a_t.apply(weighted, log_y(1), options.log_domain, work);
  if (options.record_block_trace) {
    Vector lyw(states);
    for (Eigen::Index i = 0; i < states; ++i) {
      lyw[i] = weighted[i] == kNegInf ? kNegInf : weighted[i] + law1[i];
    }
    block_trace.push_back(block_value(lyw));
  }
}

void FlowSweeper::Impl::update_v(int t) {
  const Vector base = log_y(t) + log_aw[t + 1];
  // suffix[s] = sum of the not-yet-updated log(B_s' v_s't) for s' >= s
  std::vector<Vector> suffix(sensors + 1, Vector::Zero(states));
  for (std::size_t s = sensors; s-- > 0;) suffix[s] = suffix[s + 1] + log_bv[t][s];
  Vector prefix = Vector::Zero(states);

  for (std::size_t s = 0; s < sensors; ++s) {
    const Vector others = base + prefix + suffix[s + 1];
    Vector den;
    b_t[s].apply(others, den, options.log_domain, work);

    Vector& lv = log_v(t, s);
    phi_log_v -= weighted_log_sum(phi[t][s], lv);
    for (Eigen::Index k = 0; k < lv.size(); ++k) {
      const bool zero_count = phi[t][s][k] == 0.0;
      if (den[k] == kNegInf) {
        std::ostringstream msg;
        msg << "v update: observation symbol " << k << " of sensor " << s
            << (zero_count ? " has zero count and zero reachable mass (0/0)"
                           : " has positive count but no reachable mass")
            << " at t=" << t;
        throw DegenerateSupportError(static_cast<std::size_t>(t),
                                     static_cast<std::size_t>(k), msg.str());
      }
      lv[k] = zero_count ? kNegInf : 1.0 + log_phi[t][s][k] - den[k];
    }
    phi_log_v += weighted_log_sum(phi[t][s], lv);
    b[s].apply(lv, log_bv[t][s], options.log_domain, work);
    prefix += log_bv[t][s];

    if (options.record_block_trace) {
      block_trace.push_back(block_value(base + prefix + suffix[s + 1]));
    }
  }
  log_w(t) = log_aw[t + 1] + prefix;
  if (t < horizon) {
    a_t.apply(log_y(t) + prefix, log_y(t + 1), options.log_domain, work);
  }
}

void FlowSweeper::Impl::sweep() {
  if (scaled) {
    scaled_update_u1();
    for (int t = 1; t <= horizon; ++t) scaled_update_v(t);
    scaled_backward();
    logs_stale = true;
    return;
  }
  update_u1();
  for (int t = 1; t <= horizon; ++t) update_v(t);
  backward();
}

double FlowSweeper::Impl::dual_objective() const {
  Vector lyw(states);
  for (Eigen::Index i = 0; i < states; ++i) {
    lyw[i] = log_mu0[i] == kNegInf || state.log_u1[i] == kNegInf
                 ? kNegInf
                 : log_mu0[i] + state.log_u1[i] + log_aw[1][i];
  }
  return block_value(lyw);
}

std::vector<Vector> FlowSweeper::Impl::log_marginals() const {
  std::vector<Vector> out(static_cast<std::size_t>(horizon) + 1);
  out[0] = log_mu0;
  long scratch = 0;
  for (int t = 1; t <= horizon; ++t) {
    const Vector ratio = log_ratio(out[t - 1], log_aw[t], static_cast<std::size_t>(t),
                                   "marginal reconstruction");
    Vector pushed;
    a_t.apply(ratio, pushed, options.log_domain, scratch);
    out[t] = pushed + log_w(t);
    for (Eigen::Index i = 0; i < states; ++i) {
      if (pushed[i] == kNegInf) out[t][i] = kNegInf;
    }
  }
  return out;
}

double FlowSweeper::Impl::observation_residual() const {
  const auto log_mu = log_marginals();
  double worst = 0.0;
  long scratch = 0;
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      const Vector ratio = log_ratio(log_mu[t], log_bv[t][s],
                                     static_cast<std::size_t>(t), "observation plan");
      Vector cols;
      b_t[s].apply(ratio, cols, options.log_domain, scratch);
      const Vector& lv = log_v(t, s);
      for (Eigen::Index k = 0; k < cols.size(); ++k) {
        const double col = (cols[k] == kNegInf || lv[k] == kNegInf)
                               ? 0.0
                               : std::exp(cols[k] + lv[k]);
        worst = std::max(worst, std::abs(col - phi[t][s][k]));
      }
    }
  }
  return worst / mass;
}

FlowEstimate FlowSweeper::Impl::reconstruct() const {
  const auto log_mu = log_marginals();
  FlowEstimate est;
  for (int t = 0; t <= horizon; ++t) {
    Vector m = log_mu[t].unaryExpr([](double v) { return v == kNegInf ? 0.0 : std::exp(v); });
    if (t == 0) m = mu0;
    for (Eigen::Index i = 0; i < states; ++i) {
      if (t > 0 && m[i] == 0.0) est.zero_mass_states.emplace_back(t, static_cast<int>(i));
    }
    est.marginals.push_back(Marginal::unchecked(std::move(m)));
  }

  const Matrix& a_lin = a.linear();
  for (int t = 1; t <= horizon; ++t) {
    const Vector ratio = log_ratio(log_mu[t - 1], log_aw[t], static_cast<std::size_t>(t),
                                   "transfer plan");
    const Vector& lw = log_w(t);
    const Vector& prev = est.marginals[t - 1].mass();
    const Vector& here = est.marginals[t].mass();
    Matrix flow = Matrix::Zero(states, states);
    for (Eigen::Index j = 0; j < states; ++j) {
      if (lw[j] == kNegInf) continue;
      for (Eigen::Index i = 0; i < states; ++i) {
        // Skip entries whose reference mass underflows, so that the plan
        // stays inside the support of diag(mu) A in floating point.
        if (ratio[i] == kNegInf || prev[i] * a_lin(i, j) == 0.0) continue;
        flow(i, j) = a_lin(i, j) * std::exp(ratio[i] + lw[j]);
      }
    }
    est.transfer_plans.push_back({std::move(flow), t});

    std::vector<ObservationPlan> plans;
    for (std::size_t s = 0; s < sensors; ++s) {
      const Vector r = log_ratio(log_mu[t], log_bv[t][s], static_cast<std::size_t>(t),
                                 "observation plan");
      const Vector& lv = log_v(t, s);
      const Matrix& b_lin = b[s].linear();
      Matrix assign = Matrix::Zero(states, b_lin.cols());
      for (Eigen::Index k = 0; k < b_lin.cols(); ++k) {
        if (lv[k] == kNegInf) continue;
        for (Eigen::Index i = 0; i < states; ++i) {
          if (r[i] == kNegInf || here[i] * b_lin(i, k) == 0.0) continue;
          assign(i, k) = b_lin(i, k) * std::exp(r[i] + lv[k]);
        }
      }
      plans.push_back({std::move(assign), t, static_cast<int>(s)});
    }
    est.observation_plans.push_back(std::move(plans));
  }
  est.dual = state;
  est.block_trace = block_trace;
  return est;
}

FlowSweeper::FlowSweeper(const ProblemInstance& instance,
                         const EstimatorOptions& options)
    : impl_(std::make_unique<Impl>(instance, options)) {}
FlowSweeper::~FlowSweeper() = default;
FlowSweeper::FlowSweeper(FlowSweeper&&) noexcept = default;
FlowSweeper& FlowSweeper::operator=(FlowSweeper&&) noexcept = default;

void FlowSweeper::sweep() { impl_->sweep(); }
double FlowSweeper::dual_objective() const {
  impl_->sync_logs();
  return impl_->dual_objective();
}
double FlowSweeper::observation_residual() const {
  impl_->sync_logs();
  return impl_->observation_residual();
}
const DualState& FlowSweeper::dual() const {
  impl_->sync_logs();
  return impl_->state;
}
const std::vector<double>& FlowSweeper::block_trace() const { return impl_->block_trace; }
long FlowSweeper::work() const { return impl_->work; }

FlowEstimate FlowSweeper::reconstruct() const {
  impl_->sync_logs();
  return impl_->reconstruct();
}

namespace {

FlowEstimate run_estimator(const ProblemInstance& instance,
                           const EstimatorOptions& options) {
  require_valid(instance);
  if (!(options.tol > 0.0) || options.max_sweeps < 1) {
    throw PreconditionError("estimator: tol must be positive and max_sweeps >= 1");
  }
  FlowSweeper sweeper(instance, options);
  std::vector<double> trace;
  double previous = kNegInf;
  double residual = std::numeric_limits<double>::infinity();
  long sweeps = 0;
  for (;;) {
    sweeper.sweep();
    ++sweeps;
    const double value = sweeper.dual_objective();
    trace.push_back(value);
    if (!std::isfinite(value)) {
      throw ConvergenceError(residual, sweeps,
                             "estimator: dual objective is not finite; the linear "
                             "recursions overflowed (use the log domain)",
                             trace);
    }
    residual = sweeper.observation_residual();
    const bool settled = std::abs(value - previous) <=
                         options.tol * std::max(1.0, std::abs(value));
    if (residual <= options.tol && settled) break;
    previous = value;
    if (sweeps >= options.max_sweeps) {
      std::ostringstream msg;
      msg << "estimator: no convergence after " << sweeps
          << " sweeps (residual " << residual << ")";
      throw ConvergenceError(residual, sweeps, msg.str(), trace);
    }
  }

  FlowEstimate est = sweeper.reconstruct();
  est.sweeps = sweeps;
  est.dual_objective_trace = std::move(trace);
  std::vector<Matrix> transfer;
  std::vector<std::vector<Matrix>> observation;
  for (const auto& plan : est.transfer_plans) transfer.push_back(plan.flow);
  for (const auto& row : est.observation_plans) {
    std::vector<Matrix> per_sensor;
    for (const auto& plan : row) per_sensor.push_back(plan.assignment);
    observation.push_back(std::move(per_sensor));
  }
  est.residual = constraint_residual(est.marginals, transfer, observation, instance);
  est.objective = primal_objective(est.marginals, transfer, observation, instance);
  return est;
}

}  // namespace

FlowEstimate estimate_flow(const ProblemInstance& instance,
                           const EstimatorOptions& options) {
  if (instance.sensor_count() != 1) {
    throw PreconditionError("estimate_flow: exactly one sensor is required; use "
                            "estimate_flow_multi for several");
  }
  return run_estimator(instance, options);
}

FlowEstimate estimate_flow_multi(const ProblemInstance& instance,
                                 const EstimatorOptions& options) {
  return run_estimator(instance, options);
}

double primal_objective(const std::vector<Marginal>& marginals,
                        const std::vector<Matrix>& transfer_plans,
                        const std::vector<std::vector<Matrix>>& observation_plans,
                        const ProblemInstance& instance) {
  const auto horizon = static_cast<std::size_t>(instance.horizon());
  if (marginals.size() != horizon + 1 || transfer_plans.size() != horizon ||
      observation_plans.size() != horizon) {
    throw DimensionError("primal_objective: plan and marginal counts do not match T");
  }
  const Matrix& a = instance.transition.kernel();
  double total = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    total += kl_divergence(transfer_plans[t - 1],
                           Matrix(marginals[t - 1].mass().asDiagonal() * a));
    if (observation_plans[t - 1].size() != instance.sensor_count()) {
      throw DimensionError("primal_objective: one observation plan per sensor required");
    }
    for (std::size_t s = 0; s < instance.sensor_count(); ++s) {
      total += kl_divergence(
          observation_plans[t - 1][s],
          Matrix(marginals[t].mass().asDiagonal() * instance.sensors[s].kernel()));
    }
  }
  return total;
}

double constraint_residual(const std::vector<Marginal>& marginals,
                           const std::vector<Matrix>& transfer_plans,
                           const std::vector<std::vector<Matrix>>& observation_plans,
                           const ProblemInstance& instance) {
  const auto horizon = static_cast<std::size_t>(instance.horizon());
  if (marginals.size() != horizon + 1 || transfer_plans.size() != horizon ||
      observation_plans.size() != horizon) {
    throw DimensionError("constraint_residual: plan and marginal counts do not match T");
  }
  double worst = (marginals[0].mass() - instance.prior.mass()).cwiseAbs().maxCoeff();
  for (std::size_t t = 1; t <= horizon; ++t) {
    const Matrix& m = transfer_plans[t - 1];
    worst = std::max(worst, (m.rowwise().sum() - marginals[t - 1].mass()).cwiseAbs().maxCoeff());
    worst = std::max(worst,
                     (m.colwise().sum().transpose() - marginals[t].mass()).cwiseAbs().maxCoeff());
    for (std::size_t s = 0; s < instance.sensor_count(); ++s) {
      const Matrix& d = observation_plans[t - 1][s];
      worst = std::max(worst, (d.rowwise().sum() - marginals[t].mass()).cwiseAbs().maxCoeff());
      worst = std::max(worst, (d.colwise().sum().transpose() -
                               instance.observations[t - 1][s].counts)
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  return worst / instance.prior.total();
}

double evaluate_primal_objective(const FlowEstimate& estimate,
                                 const ProblemInstance& instance) {
  std::vector<Matrix> transfer;
  std::vector<std::vector<Matrix>> observation;
  for (const auto& plan : estimate.transfer_plans) transfer.push_back(plan.flow);
  for (const auto& row : estimate.observation_plans) {
    std::vector<Matrix> per_sensor;
    for (const auto& plan : row) per_sensor.push_back(plan.assignment);
    observation.push_back(std::move(per_sensor));
  }
  const double residual =
      constraint_residual(estimate.marginals, transfer, observation, instance);
  if (residual > 1e-6) {
    throw PreconditionError("evaluate_primal_objective: estimate violates its "
                            "constraints (relative residual " +
                            std::to_string(residual) + ")");
  }
  return primal_objective(estimate.marginals, transfer, observation, instance);
}

}  // namespace enflow
