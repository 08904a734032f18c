#pragma once

#include "ripa/point.hpp"

#include <optional>
#include <vector>

namespace ripa {

enum class ScheduleKind { Constant, QuadraticTime, PowerLaw };

/// Time-dependent regularization index lambda(t) of the continuous dynamic.
class Schedule {
 public:
  /// Constant index 1.
  Schedule() : Schedule(ScheduleKind::Constant, 1.0, 0.0) {}
  static Schedule constant(double lambda);
  /// lambda(t) = (1 + epsilon) t^2 / alpha^2.
  static Schedule quadratic_time(double alpha, double epsilon);
  /// lambda(t) = c t^p.
  static Schedule power_law(double c, double p);

  double operator()(double t) const;

  ScheduleKind kind() const { return kind_; }
  double lambda_bar() const { return a_; }
  double alpha() const { return a_; }
  double epsilon() const { return b_; }
  double coefficient() const { return a_; }
  double exponent() const { return b_; }

  /// True only for QuadraticTime with alpha > 2 and epsilon > 2 / (alpha - 2).
  bool theorem_compliant() const;

 private:
  Schedule(ScheduleKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  ScheduleKind kind_;
  double a_;
  double b_;
};

/// alpha > 2 and epsilon > 2 / (alpha - 2).
bool quadratic_schedule_compliant(double alpha, double epsilon);

enum class SourceKind { None, PowerDecay, Custom };

/// External forcing f(t) of the continuous dynamic, or the perturbation
/// sequence f_k of the discrete scheme (evaluated at t = k).
class SourceTerm {
 public:
  static SourceTerm none();
  /// f(t) = c t^{-q} u with u the normalized `direction`.
  static SourceTerm power_decay(double c, double q, Point direction);
  /// Piecewise-linear interpolation of the table; zero outside its range.
  static SourceTerm custom(std::vector<double> times, std::vector<Point> values);

  SourceKind kind() const { return kind_; }
  double coefficient() const { return c_; }
  double exponent() const { return q_; }
  const Point& direction() const { return u_; }

  /// f(t) in dimension `dim`.
  Point at(double t, Eigen::Index dim) const;
  /// ||f(t)||, computed without materializing the vector for parametric kinds.
  double norm_at(double t) const;

  /// Whether the integrability hypotheses int t^3 ||f||^2 < inf and
  /// int t ||f|| < inf (equivalently the discrete sums) hold. Decided only for
  /// parametric kinds; Custom tables return nullopt.
  std::optional<bool> satisfies_integrability() const;

 private:
  SourceKind kind_ = SourceKind::None;
  double c_ = 0.0;
  double q_ = 0.0;
  Point u_;
  std::vector<double> times_;
  std::vector<Point> values_;
};

}  // namespace ripa
