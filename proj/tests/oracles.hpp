#pragma once

// Reference computations that share no code with the library: hand-written
// elimination in long double, scalar bisection, closed forms.

#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Real = long double;
using Vec = std::vector<Real>;
using Mat = std::vector<std::vector<Real>>;

inline Vec solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Real f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    Real s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline Mat identity(std::size_t n) {
  Mat m(n, Vec(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0L;
  return m;
}

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.size(), 0.0L);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t k = 0; k < x.size(); ++k) y[i] += m[i][k] * x[k];
  }
  return y;
}

/// (I + lambda M)^{-1}(x - lambda q)
inline Vec affine_resolvent(const Mat& m, const Vec& q, Real lambda, const Vec& x) {
  const std::size_t n = x.size();
  Mat a = identity(n);
  Vec b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) a[i][k] += lambda * m[i][k];
    b[i] = x[i] - lambda * q[i];
  }
  return solve(a, b);
}

inline Vec affine_yosida(const Mat& m, const Vec& q, Real lambda, const Vec& x) {
  const Vec j = affine_resolvent(m, q, lambda, x);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - j[i]) / lambda;
  return out;
}

/// Root of the increasing function g on [lo, hi] by bisection.
inline Real bisect(const std::function<Real(Real)>& g, Real lo, Real hi) {
  for (int i = 0; i < 200; ++i) {
    const Real mid = 0.5L * (lo + hi);
    if (g(mid) > 0) hi = mid; else lo = mid;
  }
  return 0.5L * (lo + hi);
}

/// Scalar resolvent of a monotone single-valued-outside-kinks map, found by
/// solving p + lambda * a(p) = v for p; `a` must be increasing with the
/// given subgradient convention handled by the caller.
inline Real scalar_resolvent(const std::function<Real(Real, Real)>& residual, Real v) {
  const Real span = 1e6L + std::fabs(v) * 10;
  return bisect([&](Real p) { return residual(p, v); }, -span, span);
}

/// prox of lambda * w |.| : solves v in p + lambda w sign(p) by bisection.
inline Real prox_abs(Real lambda, Real w, Real v) {
  // p + lambda w sgn(p) - v; at 0 the subdifferential fills [-lambda w, lambda w].
  return scalar_resolvent(
      [&](Real p, Real vv) {
        const Real s = p > 0 ? 1 : (p < 0 ? -1 : 0);
        return p + lambda * w * s - vv;
      },
      v);
}

/// Projection onto [lo, hi] as argmin (p - v)^2 by ternary search.
inline Real prox_box(Real lo, Real hi, Real v) {
  Real a = lo, b = hi;
  for (int i = 0; i < 300; ++i) {
    const Real m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if ((m1 - v) * (m1 - v) <= (m2 - v) * (m2 - v)) b = m2; else a = m1;
  }
  return 0.5L * (a + b);
}

inline Real prox_quadratic(Real lambda, Real a, Real c, Real v) {
  return scalar_resolvent([&](Real p, Real vv) { return p + lambda * a * (p - c) - vv; }, v);
}

/// Planar rotation: J_lambda(x) = (x1 + lambda x2, x2 - lambda x1) / (1 + lambda^2).
inline std::pair<Real, Real> rotation_resolvent(Real lambda, Real x1, Real x2) {
  const Real d = 1 + lambda * lambda;
  return {(x1 + lambda * x2) / d, (x2 - lambda * x1) / d};
}

/// A_lambda = 1/(1 + lambda^2) ((lambda, -1), (1, lambda)).
inline std::pair<Real, Real> rotation_yosida(Real lambda, Real x1, Real x2) {
  const Real d = 1 + lambda * lambda;
  return {(lambda * x1 - x2) / d, (x1 + lambda * x2) / d};
}

/// Roots of theta^2 - b theta + w = 0 in extended precision, ordered by the
/// sign in front of the principal square root.
inline std::pair<std::complex<Real>, std::complex<Real>> quadratic_roots(Real b,
                                                                         std::complex<Real> w) {
  const std::complex<Real> disc = std::sqrt(b * b - 4.0L * w);
  return {(b + disc) / 2.0L, (b - disc) / 2.0L};
}

/// ||x(100)|| for x' = -A_lambda x with constant lambda on the rotation,
/// x0 = (10, 10), t in [1, 100].
inline double e4_closed_form(double lambda = 10.0) {
  return std::sqrt(200.0) * std::exp(-(lambda / (1.0 + lambda * lambda)) * 99.0);
}

/// x(t) for x'' + (alpha/t) x' = 0, x(t0) = x0, x'(t0) = v0.
inline double free_damped(double alpha, double t0, double x0, double v0, double t) {
  return x0 + v0 * t0 / (alpha - 1.0) * (1.0 - std::pow(t0 / t, alpha - 1.0));
}

/// min over a fine grid of ||x - (offset + s * u)|| for a line in the plane.
inline double grid_distance_to_line(double x1, double x2, double o1, double o2, double u1,
                                    double u2) {
  double best = 1e300;
  // Coarse scan, then three refinements around the minimizer.
  double lo = -1e3, hi = 1e3;
  for (int level = 0; level < 4; ++level) {
    const int n = 20000;
    double arg = lo;
    for (int i = 0; i <= n; ++i) {
      const double s = lo + (hi - lo) * i / n;
      const double d = std::hypot(x1 - o1 - s * u1, x2 - o2 - s * u2);
      if (d < best) {
        best = d;
        arg = s;
      }
    }
    const double w = (hi - lo) / n;
    lo = arg - 2 * w;
    hi = arg + 2 * w;
  }
  return best;
}

}  // namespace oracle
