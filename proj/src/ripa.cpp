#include "ripa/ripa.hpp"

#include "ripa/error.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace ripa {

double DiscreteConfig::lambda_k(long long k) const {
  const double kk = static_cast<double>(k);
  switch (schedule) {
    case DiscreteScheduleKind::RipaStandard:
      return (1.0 + epsilon) * (s / (alpha * alpha)) * kk * kk;
    case DiscreteScheduleKind::RipaPerturbed:
      return (1.0 + 0.5 * s + epsilon) * (2.0 * s / (alpha * alpha)) * kk * kk;
    case DiscreteScheduleKind::ConstantLambda:
      return lambda_bar;
    case DiscreteScheduleKind::ClassicalUnregularized:
      return 0.0;
  }
  return 0.0;
}

bool DiscreteConfig::theorem_compliant() const {
  if (!(alpha > 2.0)) return false;
  switch (schedule) {
    case DiscreteScheduleKind::RipaStandard:
      return epsilon > 2.0 / (alpha - 2.0) && perturbation.kind() == SourceKind::None;
    case DiscreteScheduleKind::RipaPerturbed:
      return epsilon > (2.0 + s) / (alpha - 2.0) &&
             perturbation.satisfies_integrability().value_or(false);
    default:
      return false;
  }
}

void DiscreteConfig::validate(Eigen::Index dim) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  }
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidArgument, "s must be positive");
  if ((schedule == DiscreteScheduleKind::RipaStandard ||
       schedule == DiscreteScheduleKind::RipaPerturbed) &&
      (!(epsilon > 0.0) || !std::isfinite(epsilon))) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  }
  if (schedule == DiscreteScheduleKind::ConstantLambda && !(lambda_bar > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "constant lambda must be positive");
  }
  if (max_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be nonnegative");
  require_dimension(x0, dim, "x0");
  require_dimension(x_minus1, dim, "x_minus1");
  if (!x0.allFinite() || !x_minus1.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "initial iterates must be finite");
  }
}

IterationState initial_state(const DiscreteConfig& config) {
  IterationState st;
  st.k = 1;
  st.x = config.x0;
  st.x_prev = config.x_minus1;
  st.y = config.x0;
  st.residual = Point::Zero(config.x0.size());
  return st;
}

Point ripa_update_resolvent_form(const Operator& op, const Point& w, double lambda, double s) {
  const double total = lambda + s;
  return w - (s / total) * (w - op.resolvent(total, w));
}

Point ripa_update_yosida_form(const Operator& op, const Point& w, double lambda, double s) {
  return w - s * op.yosida(lambda + s, w);
}

namespace {

struct Extrapolated {
  Point y;
  Point w;
};

Extrapolated extrapolate(const IterationState& st, const DiscreteConfig& cfg) {
  Extrapolated e;
  e.y = st.x + cfg.momentum_k(st.k) * (st.x - st.x_prev);
  e.w = e.y;
  if (cfg.perturbation.kind() != SourceKind::None) {
    e.w += cfg.s * cfg.perturbation.at(static_cast<double>(st.k), st.x.size());
  }
  return e;
}

}  // namespace

IterationState ripa_step(const Operator& op, const IterationState& state,
                         const DiscreteConfig& config) {
  if (state.k < 1) throw Error(ErrorKind::InvalidArgument, "iteration index must be >= 1");
  if (config.schedule == DiscreteScheduleKind::ClassicalUnregularized) {
    return classical_step(op, state, config);
  }
  const Extrapolated e = extrapolate(state, config);
  const double lambda = config.lambda_k(state.k);
  const double s = config.s;

  IterationState next;
  next.k = state.k + 1;
  next.x_prev = state.x;
  next.x = ripa_update_resolvent_form(op, e.w, lambda, s);
  next.residual = (e.w - next.x) / s;
#ifndef NDEBUG
  {
    const Point alt = ripa_update_yosida_form(op, e.w, lambda, s);
    assert((alt - next.x).norm() <= 1e-12 * (1.0 + e.w.norm()));
  }
#endif
  next.y = e.y;
  return next;
}

IterationState classical_step(const Operator& op, const IterationState& state,
                              const DiscreteConfig& config) {
  if (state.k < 1) throw Error(ErrorKind::InvalidArgument, "iteration index must be >= 1");
  const Extrapolated e = extrapolate(state, config);
  IterationState next;
  next.k = state.k + 1;
  next.x_prev = state.x;
  next.x = op.resolvent(config.s, e.w);
  next.residual = (e.w - next.x) / config.s;
  next.y = e.y;
  return next;
}

RunResult run(const Operator& op, const DiscreteConfig& config, const StopRule& stop) {
  const auto start = std::chrono::steady_clock::now();
  config.validate(op.dimension());
  if (stop.max_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be nonnegative");

  RunResult result;
  Trajectory& traj = result.trajectory;
  RunSummary& sum = result.summary;
  sum.compliant = config.theorem_compliant();
  const auto cap = static_cast<std::size_t>(std::min<long long>(stop.max_iters + 1, 10'000'000));
  traj.reserve(cap);
  sum.partial_k_dx2.reserve(cap);
  sum.partial_k_lambda_res2.reserve(cap);
  sum.y_gap.reserve(cap);

  const bool classical = config.schedule == DiscreteScheduleKind::ClassicalUnregularized;
  double acc_dx2 = 0.0;
  double acc_res2 = 0.0;

  auto record = [&](const IterationState& st, double residual_norm) {
    const double k = static_cast<double>(st.k);
    const double lambda = classical ? 0.0 : config.lambda_k(st.k);
    Sample s;
    s.t = k;
    s.x = st.x;
    s.v = st.x - st.x_prev;
    s.lambda = lambda;
    s.yosida_norm = residual_norm;
    const double dx = s.v.norm();
    acc_dx2 += k * dx * dx;
    if (std::isfinite(residual_norm)) acc_res2 += k * lambda * residual_norm * residual_norm;
    sum.sup_k_dx = std::max(sum.sup_k_dx, k * dx);
    sum.partial_k_dx2.push_back(acc_dx2);
    sum.partial_k_lambda_res2.push_back(acc_res2);
    traj.push(std::move(s));
  };

  const long long last_k = stop.max_iters + 1;
  IterationState st = initial_state(config);
  bool stop_next = false;
  for (;;) {
    IterationState next = ripa_step(op, st, config);
    record(st, next.residual.norm());
    if (st.k >= last_k || stop_next) break;
    sum.y_gap.push_back((next.x - next.y).norm());
    ++sum.iterations;

    if (!next.x.allFinite() || next.x.norm() > config.divergence_threshold) {
      sum.diverged = true;
      traj.metadata().diverged = true;
      traj.metadata().truncated = true;
      if (next.x.allFinite()) {
        double res = std::numeric_limits<double>::quiet_NaN();
        try {
          res = ripa_step(op, next, config).residual.norm();
        } catch (const Error&) {
        }
        record(next, res);
      }
      break;
    }
    if (stop.early_exit_tol &&
        static_cast<double>(next.k) * (next.x - next.x_prev).norm() < *stop.early_exit_tol) {
      sum.early_exit = true;
      stop_next = true;
    }
    st = std::move(next);
  }

  traj.metadata().wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult run(const Operator& op, const DiscreteConfig& config) {
  return run(op, config, StopRule{config.max_iters, std::nullopt});
}

}  // namespace ripa
