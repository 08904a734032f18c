#pragma once

#include "ripa/error.hpp"
#include "ripa/point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ripa {

enum class IntegratorMethod { RK4Fixed, RK45Adaptive };

struct IntegratorSettings {
  IntegratorMethod method = IntegratorMethod::RK45Adaptive;
  double dt = 1e-2;     // RK4Fixed
  double rtol = 1e-8;   // RK45Adaptive
  double atol = 1e-10;  // RK45Adaptive
  double max_step = std::numeric_limits<double>::infinity();
};

// The field is called as f(t, y) -> Point. The observer is called as
// obs(t, y) at the initial point and after every accepted step; returning
// false stops the integration.

/// Classical fourth-order Runge-Kutta with a fixed step; the last step is
/// shortened to land on t_end.
template <class Field, class Observer>
void integrate_rk4(Field&& f, double t0, Point y, double t_end, double dt, Observer&& obs) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "RK4 step must be positive");
  if (!obs(t0, y)) return;
  const auto steps = static_cast<long long>(std::ceil((t_end - t0) / dt - 1e-9));
  double t = t0;
  for (long long i = 1; i <= steps; ++i) {
    const double t_next = (i == steps) ? t_end : t0 + static_cast<double>(i) * dt;
    const double h = t_next - t;
    const Point k1 = f(t, y);
    const Point k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const Point k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const Point k4 = f(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t_next;
    if (!obs(t, y)) return;
  }
}

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

inline double error_norm(const Point& err, const Point& y0, const Point& y1, double rtol,
                         double atol) {
  const Eigen::ArrayXd scale = atol + rtol * y0.array().abs().max(y1.array().abs());
  return std::sqrt((err.array() / scale).square().mean());
}

}  // namespace detail

/// Dormand-Prince 5(4) with first-same-as-last stages and the standard
/// step-size controller (safety 0.9, growth clamped to [0.2, 5]).
/// Throws IntegrationError when the step underflows.
template <class Field, class Observer>
void integrate_dopri5(Field&& f, double t0, Point y, double t_end, double rtol, double atol,
                      double max_step, Observer&& obs) {
  using namespace detail;
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerances must be positive");
  }
  if (!obs(t0, y)) return;
  double t = t0;
  Point k1 = f(t, y);

  // Initial step guess (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    const Eigen::ArrayXd sc = atol + rtol * y.array().abs();
    const double d0 = std::sqrt((y.array() / sc).square().mean());
    const double d1 = std::sqrt((k1.array() / sc).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t0);
    const Point k_probe = f(t + h0, y + h0 * k1);
    const double d2 = std::sqrt(((k_probe - k1).array() / sc).square().mean()) / h0;
    const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100.0 * h0, h1, max_step, t_end - t0});
  }

  while (t < t_end) {
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < h_min) {
      throw IntegrationError(t, "step size underflow at t = " + std::to_string(t));
    }
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }
    const Point k2 = f(t + c2 * h, y + h * (a21 * k1));
    const Point k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Point k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Point k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Point k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Point y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Point k7 = f(t + h, y_new);
    const Point err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = error_norm(err, y, y_new, rtol, atol);
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      t = last ? t_end : t + h;
      y = y_new;
      k1 = k7;
      if (!obs(t, y)) return;
      const double fac = (en == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = std::min(h * fac, max_step);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
  }
}

/// Dispatches on settings.method.
template <class Field, class Observer>
void integrate(Field&& f, double t0, const Point& y0, double t_end,
               const IntegratorSettings& settings, Observer&& obs) {
  if (settings.method == IntegratorMethod::RK4Fixed) {
    integrate_rk4(f, t0, y0, t_end, settings.dt, obs);
  } else {
    integrate_dopri5(f, t0, y0, t_end, settings.rtol, settings.atol, settings.max_step, obs);
  }
}

}  // namespace ripa
