#pragma once

#include "ripa/operator.hpp"

#include <variant>

namespace ripa {

/// f(x) = 0.5 x^T Q x + c^T x with Q symmetric positive semidefinite.
struct QuadraticTerm {
  Matrix hessian;
  Point linear;

  /// 0.5 * a * ||x - center||^2 in dimension center.size().
  static QuadraticTerm centered(double a, const Point& center);
};

/// A separable prox-friendly function. Accepted by the builder's signature but
/// rejected: the coupled resolvent of the Lagrangian operator then has no
/// closed form.
struct ProxTerm {
  ProxRule rule;
  Eigen::Index dim = 1;
};

using SaddleTerm = std::variant<QuadraticTerm, ProxTerm>;

/// Operator of the Lagrangian L(x, y, z) = f(x) + g(y) + <z, Ax - By>:
///   M(x, y, z) = (df(x) + A^T z, dg(y) - B^T z, By - Ax)
/// on X x Y x Z. With quadratic f and g the result is AffineLinear; the
/// known zero is filled in from the KKT system whenever it is solvable.
Operator build_saddle_operator(const SaddleTerm& f, const SaddleTerm& g, const Matrix& a,
                               const Matrix& b);

/// ||M u + q|| for an affine operator, i.e. the KKT residual at u = (x, y, z).
double kkt_residual(const Operator& op, const Point& u);

}  // namespace ripa
