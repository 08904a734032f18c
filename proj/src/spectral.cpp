#include "ripa/spectral.hpp"

#include "ripa/error.hpp"
#include "ripa/trajectory.hpp"

#include <cmath>
#include <ostream>

namespace ripa {

namespace {

Complex index_weight(double lambda) { return Complex(lambda, 1.0) / (1.0 + lambda * lambda); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

EigenPair rotation_eigenvalues(double t, double alpha, double lambda_t) {
  require_positive(t, "t");
  require_positive(alpha, "alpha");
  require_positive(lambda_t, "lambda");
  const double half = alpha / (2.0 * t);
  const Complex u = (4.0 * t * t / (alpha * alpha)) * index_weight(lambda_t);
  const Complex r = std::sqrt(1.0 - u);
  return {half * (1.0 + r), half * u / (1.0 + r)};
}

double characteristic_residual(const Complex& theta, double t, double alpha, double lambda_t) {
  const Complex w = index_weight(lambda_t);
  const double a = alpha / t;
  const Complex value = theta * theta - a * theta + w;
  const double scale = std::norm(theta) + a * std::abs(theta) + std::abs(w);
  return scale > 0.0 ? std::abs(value) / scale : std::abs(value);
}

const char* to_string(RateClass c) {
  switch (c) {
    case RateClass::Convergent: return "convergent";
    case RateClass::Critical: return "critical";
    case RateClass::NonConvergent: return "non-convergent";
  }
  return "unknown";
}

std::vector<double> log_grid(double a, double b, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  if (n == 1) return {a};
  out.reserve(n);
  const double la = std::log(a);
  const double lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  out.back() = b;
  return out;
}

double integrate_re_theta_minus(double p, double alpha, double coefficient, double a, double b) {
  require_positive(a, "lower limit");
  require_positive(coefficient, "coefficient");
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "integration range must be increasing");
  // Simpson in s = ln t: integrand Re theta_minus(e^s) e^s.
  const std::size_t panels = 4000;
  const double la = std::log(a);
  const double h = (std::log(b) - la) / static_cast<double>(panels);
  auto f = [&](double s) {
    const double t = std::exp(s);
    return rotation_eigenvalues(t, alpha, coefficient * std::pow(t, p)).theta_minus.real() * t;
  };
  double acc = f(la) + f(la + h * static_cast<double>(panels));
  for (std::size_t i = 1; i < panels; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * f(la + h * static_cast<double>(i));
  }
  return acc * h / 3.0;
}

RateClassification classify_rate(double p, double alpha, std::pair<double, double> t_range,
                                 double coefficient) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::InvalidArgument, "growth exponent must be nonnegative");
  }
  require_positive(alpha, "alpha");
  RateClassification out;
  if (p > 2.0) {
    out.verdict = RateClass::NonConvergent;
    out.exponents = std::make_pair(1.0, p - 1.0);
    return out;
  }
  if (p == 2.0) {
    out.verdict = RateClass::Convergent;
    out.exponents = std::make_pair(1.0, 1.0);
    out.compliant = quadratic_schedule_compliant(alpha, coefficient * alpha * alpha - 1.0);
    return out;
  }
  const auto [lo, hi] = t_range;
  require_positive(lo, "t range start");
  if (!(hi > lo)) throw Error(ErrorKind::InvalidArgument, "t range must be increasing");
  const double mid = std::sqrt(lo * hi);
  const double tail = integrate_re_theta_minus(p, alpha, coefficient, mid, hi);
  out.tail_integral = tail;
  out.verdict = tail > 1.0 ? RateClass::Convergent : RateClass::NonConvergent;
  return out;
}

void write_spectra_csv(std::ostream& os, double alpha, const Schedule& schedule,
                       const std::vector<double>& t_values) {
  os << "t,lambda,re_plus,im_plus,re_minus,im_minus\n";
  for (double t : t_values) {
    const double lambda = schedule(t);
    const EigenPair e = rotation_eigenvalues(t, alpha, lambda);
    os << format_double(t) << ',' << format_double(lambda) << ','
       << format_double(e.theta_plus.real()) << ',' << format_double(e.theta_plus.imag()) << ','
       << format_double(e.theta_minus.real()) << ',' << format_double(e.theta_minus.imag())
       << '\n';
  }
}

}  // namespace ripa
