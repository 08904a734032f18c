#include "ripa/diagnostics.hpp"

#include "ripa/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace ripa {

std::vector<AnchorPoint> anchor_series(const Trajectory& traj, const Point& z) {
  std::vector<AnchorPoint> out;
  out.reserve(traj.size());
  const bool discrete = traj.axis() == TimeAxis::Discrete;
  for (const Sample& s : traj.samples()) {
    require_dimension(z, s.x.size(), "anchor point");
    AnchorPoint a;
    a.t = s.t;
    const Point d = s.x - z;
    a.h = 0.5 * d.squaredNorm();
    if (discrete) {
      // x_{k-1} = x_k - v
      a.dh = a.h - 0.5 * (d - s.v).squaredNorm();
    } else {
      a.dh = d.dot(s.v);
    }
    out.push_back(a);
  }
  return out;
}

double LyapunovReport::max_increase() const {
  double m = 0.0;
  for (const Increase& inc : increases) m = std::max(m, inc.amount);
  return m;
}

std::size_t LyapunovReport::count_above(double absolute_tol) const {
  return static_cast<std::size_t>(std::count_if(
      increases.begin(), increases.end(), [&](const Increase& i) { return i.amount > absolute_tol; }));
}

std::size_t LyapunovReport::count_above_relative(double rel) const {
  return static_cast<std::size_t>(
      std::count_if(increases.begin(), increases.end(),
                    [&](const Increase& i) { return i.amount > rel * std::abs(i.previous); }));
}

ContinuousLyapunovParams lyapunov_params(const Schedule& schedule) {
  if (schedule.kind() != ScheduleKind::QuadraticTime) {
    throw Error(ErrorKind::InvalidArgument, "Lyapunov parameters need a quadratic-time schedule");
  }
  return {schedule.alpha(), schedule.epsilon()};
}

DiscreteLyapunovParams lyapunov_params(const DiscreteConfig& config) {
  DiscreteLyapunovParams p;
  p.alpha = config.alpha;
  p.epsilon = config.epsilon;
  p.s = config.s;
  if (config.schedule == DiscreteScheduleKind::RipaPerturbed) {
    p.beta = (1.0 + 0.5 * config.s + config.epsilon) / config.alpha;
  } else {
    p.beta = (1.0 + config.epsilon) / config.alpha;
  }
  p.lambda = [config](long long k) { return config.lambda_k(k); };
  if (config.perturbation.kind() != SourceKind::None) {
    const SourceTerm f = config.perturbation;
    p.perturbation_norm = [f](long long k) { return f.norm_at(static_cast<double>(k)); };
  }
  p.monitor_from = std::ceil(config.alpha);
  return p;
}

namespace {

void collect_increases(LyapunovReport& rep) {
  for (std::size_t i = 1; i < rep.phi.size(); ++i) {
    const double d = rep.phi[i] - rep.phi[i - 1];
    if (d > 0.0 || std::isnan(d)) {
      Increase inc{i, rep.t[i], std::isnan(d) ? std::numeric_limits<double>::infinity() : d,
                   rep.phi[i - 1]};
      if (rep.t[i] >= rep.monitor_from) {
        rep.increases.push_back(inc);
      } else {
        rep.unmonitored_increases.push_back(inc);
      }
    }
  }
}

const Point& require_zero(const Operator& op) {
  if (!op.known_zero()) {
    throw Error(ErrorKind::InvalidArgument, "operator has no known zero: " + op.describe());
  }
  return *op.known_zero();
}

}  // namespace

LyapunovReport lyapunov_report(const Trajectory& traj, const Point& z,
                               const ContinuousLyapunovParams& params) {
  if (traj.axis() != TimeAxis::Continuous) {
    throw Error(ErrorKind::InvalidArgument, "continuous Lyapunov report on a discrete trajectory");
  }
  const double alpha = params.alpha;
  const double eps = params.epsilon;
  const double beta = (1.0 + eps) / alpha;

  LyapunovReport rep;
  rep.monitor_from = traj.empty() ? 0.0 : traj.front().t;
  rep.t.reserve(traj.size());
  rep.phi.reserve(traj.size());
  double integral = 0.0;
  double prev_t = 0.0;
  double prev_sg = 0.0;
  const auto anchor = anchor_series(traj, z);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Sample& s = traj[i];
    const double g = s.v.squaredNorm();
    const double sg = s.t * g;
    if (i > 0) integral += 0.5 * (s.t - prev_t) * (sg + prev_sg);
    prev_t = s.t;
    prev_sg = sg;
    const double phi = s.t * anchor[i].dh + (alpha - 1.0) * anchor[i].h + beta * s.t * s.t * g +
                       (eps - 2.0 * beta) * integral;
    rep.t.push_back(s.t);
    rep.phi.push_back(phi);
  }
  collect_increases(rep);
  return rep;
}

LyapunovReport lyapunov_report(const Trajectory& traj, const Point& z,
                               const DiscreteLyapunovParams& params) {
  if (traj.axis() != TimeAxis::Discrete) {
    throw Error(ErrorKind::InvalidArgument, "discrete Lyapunov report on a continuous trajectory");
  }
  const double alpha = params.alpha;
  const double eps = params.epsilon;
  const double beta = params.beta;
  const double s = params.s;

  LyapunovReport rep;
  rep.monitor_from = params.monitor_from;
  const std::size_t n = traj.size();
  if (n < 2) return rep;
  rep.t.reserve(n - 1);
  rep.phi.reserve(n - 1);

  double sum_pg = 0.0;
  double sum_g = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Sample& cur = traj[i];
    const Sample& nxt = traj[i + 1];
    require_dimension(z, cur.x.size(), "anchor point");
    const double k = cur.t;
    const auto ki = static_cast<long long>(std::llround(k));
    const double g = cur.v.squaredNorm();
    const double g_next = nxt.v.squaredNorm();
    const double h = 0.5 * (cur.x - z).squaredNorm();
    const double h_next = 0.5 * (nxt.x - z).squaredNorm();
    sum_pg += k * g;
    sum_g += g;
    if (params.perturbation_norm) {
      const double fn = params.perturbation_norm(ki);
      const double lam = params.lambda ? params.lambda(ki) : 0.0;
      comp += s * k * (0.5 + s + lam) * fn * fn + s * k * (cur.x - z).norm() * fn;
    }
    const double e = k * (h_next - h) + (alpha - 1.0) * h + beta * k * k * g_next +
                     (eps - 2.0 * beta) * sum_pg + beta * sum_g - comp;
    rep.t.push_back(k);
    rep.phi.push_back(e);
  }
  collect_increases(rep);
  return rep;
}

LyapunovReport lyapunov_report(const Trajectory& traj, const Operator& op,
                               const ContinuousLyapunovParams& params) {
  return lyapunov_report(traj, require_zero(op), params);
}

LyapunovReport lyapunov_report(const Trajectory& traj, const Operator& op,
                               const DiscreteLyapunovParams& params) {
  return lyapunov_report(traj, require_zero(op), params);
}

double window_max(const std::vector<double>& t, const std::vector<double>& values, double lo,
                  double hi) {
  double m = 0.0;
  const std::size_t n = std::min(t.size(), values.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] >= lo && t[i] <= hi) m = std::max(m, values[i]);
  }
  return m;
}

std::vector<double> times(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const Sample& s : traj.samples()) out.push_back(s.t);
  return out;
}

std::vector<double> scaled_speed(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const Sample& s : traj.samples()) out.push_back(s.t * s.v.norm());
  return out;
}

std::vector<double> scaled_residual(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const Sample& s : traj.samples()) out.push_back(s.lambda * s.yosida_norm);
  return out;
}

std::vector<Point> acceleration(const Trajectory& traj) {
  const std::size_t n = traj.size();
  std::vector<Point> out(n);
  if (n == 0) return out;
  if (n == 1) {
    out[0] = Point::Zero(traj[0].v.size());
    return out;
  }
  out[0] = (traj[1].v - traj[0].v) / (traj[1].t - traj[0].t);
  out[n - 1] = (traj[n - 1].v - traj[n - 2].v) / (traj[n - 1].t - traj[n - 2].t);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = traj[i].t - traj[i - 1].t;
    const double hp = traj[i + 1].t - traj[i].t;
    const Point dm = (traj[i].v - traj[i - 1].v) / hm;
    const Point dp = (traj[i + 1].v - traj[i].v) / hp;
    out[i] = (hm * dp + hp * dm) / (hm + hp);
  }
  return out;
}

RateStats rate_stats(const Trajectory& traj) {
  RateStats r;
  if (traj.empty()) return r;
  const auto t = times(traj);
  const auto sp = scaled_speed(traj);
  for (double v : sp) r.sup_scaled_speed = std::max(r.sup_scaled_speed, v);
  const double t0 = t.front();
  const double t1 = t.back();
  r.first_decade_max = window_max(t, sp, t0, 10.0 * t0);
  r.last_decade_max = window_max(t, sp, t1 / 10.0, t1);
  return r;
}

std::vector<double> speed_partial_sums(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  double acc = 0.0;
  if (traj.axis() == TimeAxis::Discrete) {
    for (const Sample& s : traj.samples()) {
      acc += s.t * s.v.squaredNorm();
      out.push_back(acc);
    }
    return out;
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i > 0) {
      const Sample& a = traj[i - 1];
      const Sample& b = traj[i];
      acc += 0.5 * (b.t - a.t) * (a.t * a.v.squaredNorm() + b.t * b.v.squaredNorm());
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> residual_partial_sums(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  double acc = 0.0;
  for (const Sample& s : traj.samples()) {
    if (std::isfinite(s.yosida_norm)) acc += s.t * s.lambda * s.yosida_norm * s.yosida_norm;
    out.push_back(acc);
  }
  return out;
}

SolutionSetDesc SolutionSetDesc::single_point(Point z, std::optional<double> growth_modulus) {
  if (z.size() == 0 || !z.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "solution point must be finite and non-empty");
  }
  if (growth_modulus && !(*growth_modulus > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "growth modulus must be positive");
  }
  SolutionSetDesc d;
  d.basis_ = Matrix::Zero(z.size(), 0);
  d.offset_ = std::move(z);
  d.nu_ = growth_modulus;
  return d;
}

SolutionSetDesc SolutionSetDesc::affine_subspace(const Matrix& basis, Point offset,
                                                 std::optional<double> growth_modulus) {
  if (basis.rows() != offset.size()) {
    throw Error(ErrorKind::DimensionMismatch, "basis rows must match the offset dimension");
  }
  SolutionSetDesc d = single_point(std::move(offset), growth_modulus);
  if (basis.cols() == 0) return d;
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  qr.setThreshold(1e-12);
  const Eigen::Index rank = qr.rank();
  const Matrix q = qr.householderQ();
  d.basis_ = q.leftCols(rank);
  return d;
}

Point SolutionSetDesc::project(const Point& x) const {
  require_dimension(x, offset_.size(), "point");
  const Point d = x - offset_;
  return offset_ + basis_ * (basis_.transpose() * d);
}

double SolutionSetDesc::distance(const Point& x) const {
  require_dimension(x, offset_.size(), "point");
  const Point d = x - offset_;
  return (d - basis_ * (basis_.transpose() * d)).norm();
}

namespace {

template <class ResidualNorm>
GrowthCertificate certify(const Trajectory& traj, const SolutionSetDesc& set,
                          ResidualNorm&& residual_norm) {
  if (!set.growth_modulus()) {
    throw Error(ErrorKind::InvalidArgument, "growth certificate needs a growth modulus");
  }
  GrowthCertificate c;
  if (traj.empty()) return c;
  const double nu = *set.growth_modulus();
  c.lambda0 = traj.front().lambda;
  if (!(c.lambda0 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "growth certificate needs a positive initial index");
  }
  const double factor = 2.0 * (1.0 + c.lambda0 * nu) / (c.lambda0 * nu);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Sample& s = traj[i];
    const double r = residual_norm(s);
    const double dist = set.distance(s.x);
    const double bound = factor * s.lambda * (s.lambda + 0.5 / nu) * r * r;
    c.t.push_back(s.t);
    c.dist.push_back(dist);
    c.bound.push_back(bound);
    if (dist * dist > bound) ++c.violations;
  }
  return c;
}

}  // namespace

GrowthCertificate growth_certificate(const Trajectory& traj, const SolutionSetDesc& set) {
  return certify(traj, set, [](const Sample& s) { return s.yosida_norm; });
}

GrowthCertificate growth_certificate(const Operator& op, const Trajectory& traj,
                                     const SolutionSetDesc& set) {
  return certify(traj, set, [&](const Sample& s) { return op.yosida(s.lambda, s.x).norm(); });
}

VariationAudit variation_bound_audit(const Operator& op, const Point& z, std::size_t sample_count,
                                     std::uint64_t seed) {
  const Eigen::Index n = op.dimension();
  require_dimension(z, n, "zero");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> log_index(std::log(1e-3), std::log(1e3));
  VariationAudit audit;
  audit.max_slack = -std::numeric_limits<double>::infinity();
  Point x(n), y(n);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double g = std::exp(log_index(rng));
    const double d = std::exp(log_index(rng));
    for (Eigen::Index j = 0; j < n; ++j) x[j] = coord(rng);
    for (Eigen::Index j = 0; j < n; ++j) y[j] = coord(rng);
    const double lhs = (g * op.yosida(g, x) - d * op.yosida(d, y)).norm();
    const double rhs = 2.0 * (x - y).norm() + 2.0 * (x - z).norm() * std::abs(g - d) / g;
    audit.max_slack = std::max(audit.max_slack, lhs - rhs);
    ++audit.samples;
  }
  if (audit.samples == 0) audit.max_slack = 0.0;
  return audit;
}

VariationAudit variation_bound_audit(const Operator& op, std::size_t sample_count,
                                     std::uint64_t seed) {
  return variation_bound_audit(op, require_zero(op), sample_count, seed);
}

namespace {

template <class Params>
DiagnosticsReport build_report(const Trajectory& traj, const std::optional<Point>& z,
                               const std::optional<SolutionSetDesc>& set,
                               const std::optional<Params>& params) {
  DiagnosticsReport r;
  if (z) {
    r.anchor = anchor_series(traj, *z);
    if (params) r.lyapunov = lyapunov_report(traj, *z, *params);
  }
  r.rates = rate_stats(traj);
  r.speed_sums = speed_partial_sums(traj);
  r.residual_sums = residual_partial_sums(traj);
  if (set) {
    r.dist.reserve(traj.size());
    for (const Sample& s : traj.samples()) r.dist.push_back(set->distance(s.x));
  }
  return r;
}

}  // namespace

DiagnosticsReport make_report(const Trajectory& traj, const std::optional<Point>& z,
                              const std::optional<SolutionSetDesc>& set,
                              const std::optional<ContinuousLyapunovParams>& params) {
  return build_report(traj, z, set, params);
}

DiagnosticsReport make_report(const Trajectory& traj, const std::optional<Point>& z,
                              const std::optional<SolutionSetDesc>& set,
                              const std::optional<DiscreteLyapunovParams>& params) {
  return build_report(traj, z, set, params);
}

void write_series_csv(std::ostream& os, const Trajectory& traj, const DiagnosticsReport& report) {
  os << (traj.axis() == TimeAxis::Discrete ? "k" : "t")
     << ",h,dh,phi,scaled_speed,speed_sum,residual_sum,dist\n";
  const auto speed = scaled_speed(traj);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_double(traj[i].t) << ',';
    if (i < report.anchor.size()) {
      os << format_double(report.anchor[i].h) << ',' << format_double(report.anchor[i].dh);
    } else {
      os << ',';
    }
    os << ',';
    if (report.lyapunov && i < report.lyapunov->phi.size()) {
      os << format_double(report.lyapunov->phi[i]);
    }
    os << ',' << format_double(speed[i]) << ',' << format_double(report.speed_sums[i]) << ','
       << format_double(report.residual_sums[i]) << ',';
    if (i < report.dist.size()) os << format_double(report.dist[i]);
    os << '\n';
  }
}

}  // namespace ripa
