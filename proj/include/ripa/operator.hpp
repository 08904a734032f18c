#pragma once

#include "ripa/point.hpp"

#include <concepts>
#include <memory>
#include <optional>
#include <string>

namespace ripa {

enum class OperatorKind { Zero, AffineLinear, Rotation2D, ProxOracle };

enum class ProxRuleKind { AbsoluteValue, BoxIndicator, Quadratic };

/// Closed-form proximal rule applied coordinate-wise. The operator is the
/// subdifferential of the separable function
///   AbsoluteValue: weight * |x_i|
///   BoxIndicator:  indicator of [lower, upper]
///   Quadratic:     0.5 * curvature * (x_i - center)^2
struct ProxRule {
  ProxRuleKind kind = ProxRuleKind::AbsoluteValue;
  double weight = 1.0;
  double lower = -1.0;
  double upper = 1.0;
  double curvature = 1.0;
  double center = 0.0;

  static ProxRule absolute_value(double weight = 1.0);
  static ProxRule box(double lower, double upper);
  static ProxRule quadratic(double curvature, double center = 0.0);

  /// Scalar resolvent (I + lambda * d f)^{-1}(v).
  double resolvent(double lambda, double v) const;
  std::string name() const;
};

/// A maximally monotone operator on R^n known through an exact resolvent.
///
/// Instances are immutable and cheap to copy; copies share the factorization
/// memo of affine operators. Evaluation is safe from several threads at once.
class Operator {
 public:
  static Operator zero(Eigen::Index dim);
  /// A(x) = M x + q. Rejects M whose symmetric part has an eigenvalue below
  /// -1e-10.
  static Operator affine(Matrix m, Point offset);
  static Operator affine(Matrix m);
  /// Counterclockwise rotation by pi/2 in the plane, A(x, y) = (-y, x).
  static Operator rotation2d();
  static Operator prox(ProxRule rule, Eigen::Index dim);

  /// Returns a copy carrying a certified zero. Throws InvalidArgument when the
  /// resolvent does not fix `z`.
  Operator with_known_zero(Point z) const;

  OperatorKind kind() const;
  Eigen::Index dimension() const;
  const std::optional<Point>& known_zero() const;

  /// Linear part and offset. Defined for Zero, AffineLinear and Rotation2D.
  Matrix matrix() const;
  Point offset() const;
  const ProxRule& rule() const;

  /// J_{lambda A}(x) = (I + lambda A)^{-1} x.
  Point resolvent(double lambda, const Point& x) const;
  /// A_lambda(x) = (x - J_{lambda A} x) / lambda.
  Point yosida(double lambda, const Point& x) const;

  bool single_valued() const;
  /// The raw operator A(x). Throws SetValued for set-valued prox rules.
  Point apply(const Point& x) const;

  std::string describe() const;

 private:
  struct Impl;
  explicit Operator(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

Point resolvent(const Operator& op, double lambda, const Point& x);
Point yosida(const Operator& op, double lambda, const Point& x);

/// The Yosida regularization A_lambda viewed as a maximally monotone operator
/// in its own right.
class YosidaView {
 public:
  YosidaView(Operator base, double lambda);

  const Operator& base() const { return base_; }
  double lambda() const { return lambda_; }
  Eigen::Index dimension() const { return base_.dimension(); }

  /// J_{mu A_lambda}(x) through the resolvent equation: one base resolvent at
  /// index lambda + mu, no inner iteration.
  Point resolvent(double mu, const Point& x) const;
  /// (A_lambda)_mu(x), which equals A_{lambda + mu}(x).
  Point yosida(double mu, const Point& x) const;
  /// A_lambda(x).
  Point apply(const Point& x) const;

 private:
  Operator base_;
  double lambda_;
};

Point yosida_view_resolvent(const YosidaView& view, double mu, const Point& x);

template <class Op>
concept ResolventOracle = requires(const Op& op, double index, const Point& x) {
  { op.resolvent(index, x) } -> std::convertible_to<Point>;
  { op.yosida(index, x) } -> std::convertible_to<Point>;
  { op.dimension() } -> std::convertible_to<Eigen::Index>;
};

static_assert(ResolventOracle<Operator>);
static_assert(ResolventOracle<YosidaView>);

}  // namespace ripa
