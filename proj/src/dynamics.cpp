#include "ripa/dynamics.hpp"

#include "ripa/error.hpp"

#include <chrono>
#include <cmath>

namespace ripa {

namespace {

void validate_common(double t0, double t_end, const IntegratorSettings& integ, int stride) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) {
    throw Error(ErrorKind::InvalidArgument, "t0 must be positive (the damping alpha/t is singular at 0)");
  }
  if (!(t_end > t0) || !std::isfinite(t_end)) {
    throw Error(ErrorKind::InvalidArgument, "t_end must exceed t0");
  }
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "sample_stride must be positive");
  if (integ.method == IntegratorMethod::RK4Fixed && !(integ.dt > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "RK4 step must be positive");
  }
  if (integ.method == IntegratorMethod::RK45Adaptive && (!(integ.rtol > 0.0) || !(integ.atol > 0.0))) {
    throw Error(ErrorKind::InvalidArgument, "tolerances must be positive");
  }
}

void require_raw_allowed(const Operator& op, FieldMode field) {
  if (field == FieldMode::Raw && !op.single_valued()) {
    throw Error(ErrorKind::SetValued,
                "raw flow requested on set-valued operator " + op.describe());
  }
}

// Shared observer logic: sampling stride, final record, divergence handling.
class Recorder {
 public:
  Recorder(Trajectory& traj, const DivergencePolicy& policy, int stride, double t_end)
      : traj_(traj), policy_(policy), stride_(stride), t_end_(t_end) {}

  template <class MakeSample>
  bool observe(double t, const Point& x, MakeSample&& make) {
    if (!x.allFinite()) {
      flag_truncated();
      return false;
    }
    const bool escaped = x.norm() > policy_.truncate_above;
    if (steps_ % stride_ == 0 || t == t_end_ || escaped) traj_.push(make());
    ++steps_;
    if (escaped) {
      flag_truncated();
      return false;
    }
    return true;
  }

  void finish(double initial_norm) {
    if (!traj_.empty() &&
        traj_.back().x.norm() >= policy_.growth_factor * std::max(1.0, initial_norm)) {
      traj_.metadata().diverged = true;
    }
  }

 private:
  void flag_truncated() {
    traj_.metadata().diverged = true;
    traj_.metadata().truncated = true;
  }

  Trajectory& traj_;
  const DivergencePolicy& policy_;
  int stride_;
  double t_end_;
  long long steps_ = 0;
};

}  // namespace

void ContinuousConfig::validate(Eigen::Index dim) const {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  validate_common(t0, t_end, integrator, sample_stride);
  require_dimension(x0, dim, "x0");
  require_dimension(v0, dim, "v0");
  if (!x0.allFinite() || !v0.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "initial data must be finite");
  }
}

void FirstOrderConfig::validate(Eigen::Index dim) const {
  validate_common(t0, t_end, integrator, sample_stride);
  require_dimension(x0, dim, "x0");
  if (!x0.allFinite()) throw Error(ErrorKind::InvalidArgument, "initial data must be finite");
}

PhaseField::PhaseField(Operator op, const ContinuousConfig& config)
    : op_(std::move(op)),
      alpha_(config.alpha),
      schedule_(config.schedule),
      field_(config.field),
      source_(config.source) {
  require_raw_allowed(op_, field_);
}

double PhaseField::lambda_at(double t) const {
  return field_ == FieldMode::Raw ? 0.0 : schedule_(t);
}

Point PhaseField::drive(double t, const Point& u) const {
  return field_ == FieldMode::Raw ? op_.apply(u) : op_.yosida(schedule_(t), u);
}

Point PhaseField::operator()(double t, const Point& state) const {
  const Eigen::Index n = op_.dimension();
  require_dimension(state, 2 * n, "phase state");
  const auto u = state.head(n);
  const auto v = state.tail(n);
  Point out(2 * n);
  out.head(n) = v;
  Point accel = -(alpha_ / t) * v - drive(t, u);
  if (source_.kind() != SourceKind::None) accel += source_.at(t, n);
  out.tail(n) = accel;
  return out;
}

PhaseField reduce_to_first_order(const Operator& op, const ContinuousConfig& config) {
  return PhaseField(op, config);
}

Trajectory simulate_second_order(const Operator& op, const ContinuousConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = op.dimension();
  config.validate(n);
  const PhaseField field(op, config);

  Point state(2 * n);
  state << config.x0, config.v0;

  Trajectory traj(TimeAxis::Continuous);
  Recorder rec(traj, config.divergence, config.sample_stride, config.t_end);
  auto observer = [&](double t, const Point& y) {
    const Point x = y.head(n);
    return rec.observe(t, x, [&] {
      Sample s;
      s.t = t;
      s.x = x;
      s.v = y.tail(n);
      s.lambda = field.lambda_at(t);
      s.yosida_norm = field.drive(t, s.x).norm();
      return s;
    });
  };
  integrate(field, config.t0, state, config.t_end, config.integrator, observer);
  rec.finish(config.x0.norm());

  traj.metadata().wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

Trajectory simulate_first_order(const Operator& op, const FirstOrderConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = op.dimension();
  config.validate(n);
  require_raw_allowed(op, config.field);

  const bool raw = config.field == FieldMode::Raw;
  const Schedule schedule = config.schedule;
  auto drive = [&](double t, const Point& x) -> Point {
    return raw ? op.apply(x) : op.yosida(schedule(t), x);
  };
  auto field = [&](double t, const Point& x) -> Point { return -drive(t, x); };

  Trajectory traj(TimeAxis::Continuous);
  Recorder rec(traj, config.divergence, config.sample_stride, config.t_end);
  auto observer = [&](double t, const Point& x) {
    return rec.observe(t, x, [&] {
      Sample s;
      s.t = t;
      s.x = x;
      const Point a = drive(t, x);
      s.v = -a;
      s.lambda = raw ? 0.0 : schedule(t);
      s.yosida_norm = a.norm();
      return s;
    });
  };
  integrate(field, config.t0, config.x0, config.t_end, config.integrator, observer);
  rec.finish(config.x0.norm());

  traj.metadata().wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

}  // namespace ripa
