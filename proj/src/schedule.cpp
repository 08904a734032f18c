#include "ripa/schedule.hpp"

#include "ripa/error.hpp"

#include <algorithm>
#include <cmath>

namespace ripa {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be positive");
  }
}

}  // namespace

Schedule Schedule::constant(double lambda) {
  require_positive(lambda, "constant lambda");
  return Schedule(ScheduleKind::Constant, lambda, 0.0);
}

Schedule Schedule::quadratic_time(double alpha, double epsilon) {
  require_positive(alpha, "alpha");
  require_positive(epsilon, "epsilon");
  return Schedule(ScheduleKind::QuadraticTime, alpha, epsilon);
}

Schedule Schedule::power_law(double c, double p) {
  require_positive(c, "power-law coefficient");
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::InvalidArgument, "power-law exponent must be nonnegative");
  }
  return Schedule(ScheduleKind::PowerLaw, c, p);
}

double Schedule::operator()(double t) const {
  switch (kind_) {
    case ScheduleKind::Constant: return a_;
    case ScheduleKind::QuadraticTime: return (1.0 + b_) * t * t / (a_ * a_);
    case ScheduleKind::PowerLaw: return a_ * std::pow(t, b_);
  }
  return a_;
}

bool Schedule::theorem_compliant() const {
  return kind_ == ScheduleKind::QuadraticTime && quadratic_schedule_compliant(a_, b_);
}

bool quadratic_schedule_compliant(double alpha, double epsilon) {
  return alpha > 2.0 && epsilon > 2.0 / (alpha - 2.0);
}

SourceTerm SourceTerm::none() { return SourceTerm{}; }

SourceTerm SourceTerm::power_decay(double c, double q, Point direction) {
  if (!std::isfinite(c) || !std::isfinite(q) || !(q >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "power-decay source needs finite c and q >= 0");
  }
  const double n = direction.norm();
  if (!(n > 0.0) || !direction.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "power-decay direction must be a nonzero vector");
  }
  SourceTerm s;
  s.kind_ = SourceKind::PowerDecay;
  s.c_ = c;
  s.q_ = q;
  s.u_ = direction / n;
  return s;
}

SourceTerm SourceTerm::custom(std::vector<double> times, std::vector<Point> values) {
  if (times.empty() || times.size() != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "custom source needs matching, nonempty tables");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "custom source times must be strictly increasing");
    }
    if (values[i].size() != values[0].size()) {
      throw Error(ErrorKind::DimensionMismatch, "custom source values differ in dimension");
    }
  }
  SourceTerm s;
  s.kind_ = SourceKind::Custom;
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

Point SourceTerm::at(double t, Eigen::Index dim) const {
  switch (kind_) {
    case SourceKind::None:
      return Point::Zero(dim);
    case SourceKind::PowerDecay:
      require_dimension(u_, dim, "source direction");
      return (c_ * std::pow(t, -q_)) * u_;
    case SourceKind::Custom: {
      require_dimension(values_.front(), dim, "source table");
      if (t < times_.front() || t > times_.back()) return Point::Zero(dim);
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      if (it == times_.end()) return values_.back();
      const auto hi = static_cast<std::size_t>(it - times_.begin());
      const std::size_t lo = hi - 1;
      const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
      return (1.0 - w) * values_[lo] + w * values_[hi];
    }
  }
  return Point::Zero(dim);
}

double SourceTerm::norm_at(double t) const {
  switch (kind_) {
    case SourceKind::None: return 0.0;
    case SourceKind::PowerDecay: return std::abs(c_) * std::pow(t, -q_);
    case SourceKind::Custom: return at(t, values_.front().size()).norm();
  }
  return 0.0;
}

std::optional<bool> SourceTerm::satisfies_integrability() const {
  switch (kind_) {
    case SourceKind::None: return true;
    case SourceKind::PowerDecay: return c_ == 0.0 || q_ > 2.0;
    case SourceKind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace ripa
