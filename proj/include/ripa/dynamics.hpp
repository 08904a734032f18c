#pragma once

#include "ripa/integrator.hpp"
#include "ripa/operator.hpp"
#include "ripa/schedule.hpp"
#include "ripa/trajectory.hpp"

namespace ripa {

/// Which operator drives a flow: the Yosida regularization A_{lambda(t)} or,
/// for single-valued operators only, A itself.
enum class FieldMode { Yosida, Raw };

struct DivergencePolicy {
  /// The run is truncated as soon as ||x|| exceeds this value.
  double truncate_above = 1e30;
  /// A completed run is flagged diverged when ||x(t_end)|| reaches this
  /// multiple of max(1, ||x0||).
  double growth_factor = 1e12;
};

/// x'' + (alpha / t) x' + A_{lambda(t)}(x) = f(t),  x(t0) = x0, x'(t0) = v0.
struct ContinuousConfig {
  double alpha = 10.0;
  Schedule schedule;
  FieldMode field = FieldMode::Yosida;
  double t0 = 1.0;
  double t_end = 100.0;
  Point x0;
  Point v0;
  SourceTerm source;
  IntegratorSettings integrator;
  int sample_stride = 1;
  DivergencePolicy divergence;

  /// Throws InvalidArgument / DimensionMismatch on a malformed config.
  void validate(Eigen::Index dim) const;
};

/// x' = -A_{lambda(t)}(x), or x' = -A(x) in Raw mode.
struct FirstOrderConfig {
  Schedule schedule;
  FieldMode field = FieldMode::Yosida;
  double t0 = 1.0;
  double t_end = 100.0;
  Point x0;
  IntegratorSettings integrator;
  int sample_stride = 1;
  DivergencePolicy divergence;

  void validate(Eigen::Index dim) const;
};

/// Phase-space vector field F(t, (u, v)) = (v, -(alpha/t) v - A_{lambda(t)}(u) + f(t))
/// acting on the stacked state (u, v) in R^{2n}.
class PhaseField {
 public:
  PhaseField(Operator op, const ContinuousConfig& config);

  Point operator()(double t, const Point& state) const;

  /// Index used at time t; 0 in Raw mode.
  double lambda_at(double t) const;
  /// A_{lambda(t)}(u), or A(u) in Raw mode.
  Point drive(double t, const Point& u) const;

  Eigen::Index dimension() const { return op_.dimension(); }

 private:
  Operator op_;
  double alpha_;
  Schedule schedule_;
  FieldMode field_;
  SourceTerm source_;
};

PhaseField reduce_to_first_order(const Operator& op, const ContinuousConfig& config);

/// Integrates the second-order dynamic. Samples every `sample_stride`
/// accepted steps plus the initial and final points. Truncates on divergence.
/// Throws IntegrationError on step-size underflow.
Trajectory simulate_second_order(const Operator& op, const ContinuousConfig& config);

Trajectory simulate_first_order(const Operator& op, const FirstOrderConfig& config);

}  // namespace ripa
