#pragma once

#include "ripa/schedule.hpp"

#include <complex>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace ripa {

using Complex = std::complex<double>;

/// Roots of theta^2 - (alpha/t) theta + (lambda + i)/(1 + lambda^2) = 0.
struct EigenPair {
  Complex theta_plus;
  Complex theta_minus;
};

/// theta = (alpha/2t)(1 +- sqrt(1 - (4t^2/alpha^2)(lambda + i)/(1 + lambda^2))),
/// principal square root. theta_minus is evaluated as (alpha/2t) u / (1 + r)
/// to avoid cancellation when u is small.
EigenPair rotation_eigenvalues(double t, double alpha, double lambda_t);

/// |theta^2 - (alpha/t) theta + w| / (|theta|^2 + (alpha/t)|theta| + |w|).
double characteristic_residual(const Complex& theta, double t, double alpha, double lambda_t);

enum class RateClass { Convergent, Critical, NonConvergent };

const char* to_string(RateClass c);

struct RateClassification {
  RateClass verdict = RateClass::Convergent;
  /// theta_plus ~ t^{-a}, theta_minus ~ t^{-b}; set for p >= 2.
  std::optional<std::pair<double, double>> exponents;
  /// p = 2 only: whether lambda(t) = c t^2 is a compliant quadratic schedule
  /// for this alpha (epsilon = c alpha^2 - 1).
  std::optional<bool> compliant;
  /// p < 2 only: int Re theta_minus dt over the upper half (log scale) of t_range.
  std::optional<double> tail_integral;
};

/// lambda(t) = coefficient * t^p on the rotation example.
///   p > 2: non-convergent, exponents (1, p - 1).
///   p = 2: convergent with exponents (1, 1) and the compliance flag.
///   p < 2: quadrature of Re theta_minus; a tail increment above 1 over
///          [sqrt(t_lo t_hi), t_hi] counts as a divergent integral (convergent),
///          anything else as non-convergent.
RateClassification classify_rate(double p, double alpha, std::pair<double, double> t_range,
                                 double coefficient = 1.0);

/// int_{a}^{b} Re theta_minus(t) dt for lambda(t) = coefficient t^p.
double integrate_re_theta_minus(double p, double alpha, double coefficient, double a, double b);

/// Header t,lambda,re_plus,im_plus,re_minus,im_minus.
void write_spectra_csv(std::ostream& os, double alpha, const Schedule& schedule,
                       const std::vector<double>& t_values);

/// n points log-spaced on [a, b].
std::vector<double> log_grid(double a, double b, std::size_t n);

}  // namespace ripa
