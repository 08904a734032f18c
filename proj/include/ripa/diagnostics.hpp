#pragma once

#include "ripa/operator.hpp"
#include "ripa/ripa.hpp"
#include "ripa/schedule.hpp"
#include "ripa/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ripa {

// ---------------------------------------------------------------------------
// Anchor h_z = 0.5 ||x - z||^2

struct AnchorPoint {
  double t = 0.0;
  double h = 0.0;
  /// <x - z, v> for continuous runs, h_k - h_{k-1} for discrete runs.
  double dh = 0.0;
};

std::vector<AnchorPoint> anchor_series(const Trajectory& traj, const Point& z);

// ---------------------------------------------------------------------------
// Lyapunov quantities

struct Increase {
  std::size_t index = 0;
  double t = 0.0;
  double amount = 0.0;
  /// Value of the series before the increase.
  double previous = 0.0;
};

/// Lyapunov series and every place it goes up. No tolerance is applied
/// here; callers filter with count_above / count_above_relative.
struct LyapunovReport {
  std::vector<double> t;
  std::vector<double> phi;
  /// Increases at indices where the monotonicity claim applies.
  std::vector<Increase> increases;
  /// Increases before the monitored range starts (discrete: k < alpha, where
  /// the extrapolation coefficient is negative).
  std::vector<Increase> unmonitored_increases;
  double monitor_from = 0.0;

  std::size_t raw_violation_count() const { return increases.size(); }
  double max_increase() const;
  std::size_t count_above(double absolute_tol) const;
  /// Increases larger than rel * |previous value|.
  std::size_t count_above_relative(double rel) const;
};

/// Phi(t) = t h'(t) + (alpha-1) h(t) + beta t^2 ||x'||^2
///          + (eps - 2 beta) int_{t0}^t s ||x'(s)||^2 ds,   beta = (1+eps)/alpha.
/// h' uses the stored velocity; the integral is trapezoidal over samples.
struct ContinuousLyapunovParams {
  double alpha = 10.0;
  double epsilon = 1.25;
};

/// E_K = K (h_{K+1} - h_K) + (alpha-1) h_K + beta K^2 g_{K+1}
///       + (eps - 2 beta) sum_{p<=K} p g_p + beta sum_{p<=K} g_p - C_K,
/// g_p = ||x_p - x_{p-1}||^2. With a perturbation, C_K accumulates
///   s p (1/2 + s + lambda_p) ||f_p||^2 + s p ||x_p - z|| ||f_p||,
/// otherwise C_K = 0.
struct DiscreteLyapunovParams {
  double alpha = 10.0;
  double epsilon = 1.25;
  double beta = 0.225;
  double s = 1.0;
  std::function<double(long long)> lambda;
  /// ||f_k||; empty when unperturbed.
  std::function<double(long long)> perturbation_norm;
  /// First K at which increments are checked.
  double monitor_from = 10.0;
};

ContinuousLyapunovParams lyapunov_params(const Schedule& schedule);
DiscreteLyapunovParams lyapunov_params(const DiscreteConfig& config);

LyapunovReport lyapunov_report(const Trajectory& traj, const Point& z,
                               const ContinuousLyapunovParams& params);
/// The discrete series has one entry fewer than the trajectory: E_K needs x_{K+1}.
LyapunovReport lyapunov_report(const Trajectory& traj, const Point& z,
                               const DiscreteLyapunovParams& params);
/// Uses op.known_zero(); throws InvalidArgument when it is missing.
LyapunovReport lyapunov_report(const Trajectory& traj, const Operator& op,
                               const ContinuousLyapunovParams& params);
LyapunovReport lyapunov_report(const Trajectory& traj, const Operator& op,
                               const DiscreteLyapunovParams& params);

// ---------------------------------------------------------------------------
// Rates and partial sums

/// Largest value of `values[i]` with t[i] in [lo, hi]; 0 when the window is empty.
double window_max(const std::vector<double>& t, const std::vector<double>& values, double lo,
                  double hi);

std::vector<double> times(const Trajectory& traj);
/// t ||x'(t)|| (continuous) or k ||x_k - x_{k-1}|| (discrete).
std::vector<double> scaled_speed(const Trajectory& traj);
/// lambda ||A_lambda x|| per sample.
std::vector<double> scaled_residual(const Trajectory& traj);
/// x'' by central differences of the stored velocity (one-sided at the ends).
std::vector<Point> acceleration(const Trajectory& traj);

struct RateStats {
  double sup_scaled_speed = 0.0;
  /// Window [t0, 10 t0] and [t_end / 10, t_end].
  double first_decade_max = 0.0;
  double last_decade_max = 0.0;
};

RateStats rate_stats(const Trajectory& traj);

/// Continuous: cumulative trapezoid of t ||x'||^2. Discrete: cumulative
/// sum of k ||x_k - x_{k-1}||^2.
std::vector<double> speed_partial_sums(const Trajectory& traj);
/// Cumulative sum of k lambda_k yosida_norm_k^2 (discrete).
std::vector<double> residual_partial_sums(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Solution sets and quadratic growth

class SolutionSetDesc {
 public:
  static SolutionSetDesc single_point(Point z, std::optional<double> growth_modulus = {});
  /// offset + span(columns of basis); the basis is orthonormalized here.
  static SolutionSetDesc affine_subspace(const Matrix& basis, Point offset,
                                         std::optional<double> growth_modulus = {});

  double distance(const Point& x) const;
  Point project(const Point& x) const;
  const std::optional<double>& growth_modulus() const { return nu_; }
  const Matrix& basis() const { return basis_; }
  const Point& offset() const { return offset_; }

 private:
  Matrix basis_;  // orthonormal columns; zero columns for a single point
  Point offset_;
  std::optional<double> nu_;
};

struct GrowthCertificate {
  std::vector<double> t;
  std::vector<double> dist;
  /// [2(1 + lambda0 nu)/(lambda0 nu)] lambda (lambda + 1/(2 nu)) ||A_lambda x||^2
  std::vector<double> bound;
  double lambda0 = 0.0;
  /// Samples with dist^2 > bound.
  std::size_t violations = 0;
};

/// Uses the stored lambda and yosida_norm of each sample (continuous runs).
GrowthCertificate growth_certificate(const Trajectory& traj, const SolutionSetDesc& set);
/// Re-evaluates ||A_lambda(x)|| at each sample's x with the sample's lambda.
/// Needed for discrete runs, whose stored residual is taken at y_k.
GrowthCertificate growth_certificate(const Operator& op, const Trajectory& traj,
                                     const SolutionSetDesc& set);

// ---------------------------------------------------------------------------
// Operator audit

struct VariationAudit {
  std::size_t samples = 0;
  /// max of ||g A_g x - d A_d y|| - (2||x - y|| + 2||x - z|| |g - d| / g).
  double max_slack = 0.0;
};

/// Random g, d log-uniform in [1e-3, 1e3], x, y uniform in [-10, 10]^n.
VariationAudit variation_bound_audit(const Operator& op, const Point& z, std::size_t sample_count,
                                     std::uint64_t seed);
VariationAudit variation_bound_audit(const Operator& op, std::size_t sample_count,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Aggregate report

struct DiagnosticsReport {
  std::vector<AnchorPoint> anchor;
  std::optional<LyapunovReport> lyapunov;
  RateStats rates;
  std::vector<double> speed_sums;
  std::vector<double> residual_sums;
  std::vector<double> dist;
};

DiagnosticsReport make_report(const Trajectory& traj, const std::optional<Point>& z,
                              const std::optional<SolutionSetDesc>& set,
                              const std::optional<ContinuousLyapunovParams>& params);
DiagnosticsReport make_report(const Trajectory& traj, const std::optional<Point>& z,
                              const std::optional<SolutionSetDesc>& set,
                              const std::optional<DiscreteLyapunovParams>& params);

/// t,h,dh,phi,scaled_speed,speed_sum,residual_sum,dist (missing columns empty).
void write_series_csv(std::ostream& os, const Trajectory& traj, const DiagnosticsReport& report);

}  // namespace ripa
