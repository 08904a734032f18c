#pragma once

#include "ripa/operator.hpp"
#include "ripa/schedule.hpp"
#include "ripa/trajectory.hpp"

#include <optional>
#include <vector>

namespace ripa {

enum class DiscreteScheduleKind {
  /// lambda_k = (1 + eps) (s / alpha^2) k^2
  RipaStandard,
  /// lambda_k = (1 + s/2 + eps) (2 s / alpha^2) k^2
  RipaPerturbed,
  /// lambda_k = lambda_bar
  ConstantLambda,
  /// x_{k+1} = (I + sA)^{-1}(y_k), no regularization
  ClassicalUnregularized,
};

/// Parameters of the inertial proximal schemes.
///
/// Indexing: the run starts at k = 1 with x_k = x0 and x_{k-1} = x_minus1,
/// so the first extrapolation coefficient is 1 - alpha (negative for
/// alpha > 1) and is used as is.
struct DiscreteConfig {
  double alpha = 10.0;
  double s = 1.0;
  double epsilon = 1.25;
  DiscreteScheduleKind schedule = DiscreteScheduleKind::RipaStandard;
  double lambda_bar = 1.0;
  long long max_iters = 1000;
  /// f_k = perturbation.at(k). None for the unperturbed schemes.
  SourceTerm perturbation;
  Point x0;
  Point x_minus1;
  double divergence_threshold = 1e30;

  double lambda_k(long long k) const;
  /// Extrapolation coefficient 1 - alpha / k.
  double momentum_k(long long k) const { return 1.0 - alpha / static_cast<double>(k); }

  /// RipaStandard: alpha > 2, eps > 2/(alpha-2).
  /// RipaPerturbed: alpha > 2, eps > (2+s)/(alpha-2), perturbation summable.
  /// Everything else is non-compliant.
  bool theorem_compliant() const;

  void validate(Eigen::Index dim) const;
};

/// x_k and x_{k-1}, plus the extrapolated point y_{k-1} and the residual
/// A_{lambda+s}(y_{k-1} + s f_{k-1}) of the step that produced x_k.
struct IterationState {
  long long k = 1;
  Point x;
  Point x_prev;
  Point y;
  Point residual;
};

IterationState initial_state(const DiscreteConfig& config);

/// x_{k+1} = (lambda/(lambda+s)) w + (s/(lambda+s)) J_{(lambda+s)A}(w).
Point ripa_update_resolvent_form(const Operator& op, const Point& w, double lambda, double s);
/// x_{k+1} = w - s A_{lambda+s}(w).
Point ripa_update_yosida_form(const Operator& op, const Point& w, double lambda, double s);

/// One step of (RIPA) / (RIPA-pert):
///   y_k = x_k + (1 - alpha/k)(x_k - x_{k-1}),  w = y_k + s f_k,
///   x_{k+1} = w - s A_{lambda_k + s}(w)  (evaluated in resolvent form).
/// Debug builds assert that both forms agree to 1e-12.
IterationState ripa_step(const Operator& op, const IterationState& state,
                         const DiscreteConfig& config);

/// Classical inertial proximal step x_{k+1} = (I + sA)^{-1}(y_k + s f_k).
IterationState classical_step(const Operator& op, const IterationState& state,
                              const DiscreteConfig& config);

struct StopRule {
  long long max_iters = 1000;
  /// Stop once k ||x_k - x_{k-1}|| drops below this value (after k = 1).
  std::optional<double> early_exit_tol;
};

struct RunSummary {
  long long iterations = 0;
  bool diverged = false;
  bool early_exit = false;
  bool compliant = false;
  double sup_k_dx = 0.0;
  /// Per sample: sum_{p <= k} p ||x_p - x_{p-1}||^2.
  std::vector<double> partial_k_dx2;
  /// Per sample: sum_{p <= k} p lambda_p ||A_{lambda_p + s}(y_p + s f_p)||^2.
  std::vector<double> partial_k_lambda_res2;
  /// Per step: ||x_{k+1} - y_k||, indexed like the sample of x_k.
  std::vector<double> y_gap;
};

struct RunResult {
  Trajectory trajectory{TimeAxis::Discrete};
  RunSummary summary;
};

/// Iterates from k = 1. Sample k holds (k, x_k, x_k - x_{k-1}, lambda_k,
/// ||A_{lambda_k+s}(y_k + s f_k)||); the last sample is x_{max_iters + 1}.
RunResult run(const Operator& op, const DiscreteConfig& config, const StopRule& stop);
RunResult run(const Operator& op, const DiscreteConfig& config);

}  // namespace ripa
