#pragma once

#include "ripa/dynamics.hpp"
#include "ripa/operator.hpp"
#include "ripa/ripa.hpp"
#include "ripa/trajectory.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ripa {

enum class ScenarioMode {
  FirstOrderRaw,
  FirstOrderYosida,
  SecondOrderYosida,
  SecondOrderRaw,
  Ripa,
  RipaPert,
  Classical,
};

const char* to_string(ScenarioMode mode);
bool is_discrete(ScenarioMode mode);

/// Malformed scenario input (bad JSON, missing or ill-typed fields).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// A named experiment, parsed from schema-1 JSON.
struct ScenarioConfig {
  std::string name = "scenario";
  ScenarioMode mode = ScenarioMode::SecondOrderYosida;
  nlohmann::json operator_spec;
  Operator op = Operator::zero(1);

  double alpha = 10.0;
  double epsilon = 1.25;
  double s = 1.0;
  Schedule schedule;
  /// Discrete modes: RipaStandard/RipaPerturbed unless a constant schedule is given.
  DiscreteScheduleKind discrete_schedule = DiscreteScheduleKind::RipaStandard;
  double lambda_bar = 1.0;

  double t0 = 1.0;
  double t_end = 100.0;
  long long max_iters = 1000;
  std::optional<double> early_exit_tol;

  Point x0;
  Point v0;
  Point x_minus1;
  SourceTerm source;
  IntegratorSettings integrator;
  int sample_stride = 1;

  /// Artifact file names, relative to the output directory.
  std::string trajectory_file;
  std::string diagnostics_file;

  /// The JSON the config was parsed from, used for the config hash.
  nlohmann::json raw;

  ContinuousConfig continuous() const;
  FirstOrderConfig first_order() const;
  DiscreteConfig discrete() const;

  /// Compliance of the run with the convergence theorem that covers its mode;
  /// nullopt for the first-order flows, which no such statement covers.
  std::optional<bool> compliant() const;
};

/// Throws ConfigError for malformed input and Error (operator kinds) for
/// operators that cannot be built.
Operator parse_operator(const nlohmann::json& spec);
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig parse_scenario_text(std::string_view text);

/// FNV-1a (64 bit, hex) of the compact JSON dump with sorted keys.
std::string config_hash(const nlohmann::json& j);

struct IntegratorOverrides {
  std::optional<double> rtol;
  std::optional<double> atol;
  /// Switches to fixed-step RK4.
  std::optional<double> dt;
  std::optional<long long> iters;

  void apply(ScenarioConfig& cfg) const;
};

struct ScenarioResult {
  Trajectory trajectory;
  nlohmann::json diagnostics;
  bool diverged = false;
  double final_norm = 0.0;
  /// Distance of the last iterate to the operator's known zero, if any.
  std::optional<double> final_distance;
};

/// Runs the experiment in memory. Errors propagate.
ScenarioResult execute(const ScenarioConfig& cfg);

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::optional<ScenarioResult> result;
  std::vector<std::filesystem::path> artifacts;
};

/// Exit codes: 0 on success (a diverged run is a success), 2 for invalid
/// JSON or configuration, 3 for operator and runtime errors. Artifacts are
/// only written once the run has completed.
RunOutcome run_scenario_text(std::string_view json_text, const std::filesystem::path& out_dir,
                             const IntegratorOverrides& overrides = {});
RunOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Table 1

struct Table1Row {
  std::string key;
  std::string equation;
  double final_distance = 0.0;
  double reference = 0.0;
  std::string band;
  bool diverged = false;
  bool pass = false;
  double wall_seconds = 0.0;
};

struct Table1Result {
  std::vector<Table1Row> rows;
  bool pass() const;
};

/// The five built-in rotation experiments (alpha = 10, eps = 1.25,
/// lambda_bar = 10, x0 = (10, 10), v0 = 0, t in [1, 100]).
std::vector<ScenarioConfig> table1_scenarios(const IntegratorOverrides& overrides = {});
Table1Result table1(const IntegratorOverrides& overrides = {});
void write_table1_csv(std::ostream& os, const Table1Result& t);
void write_table1_text(std::ostream& os, const Table1Result& t);

// ---------------------------------------------------------------------------
// Sweeps

/// Cartesian grid; an axis with no values is left at the base config. A grid
/// without any values has no cells.
struct SweepGrid {
  std::vector<double> alpha;
  std::vector<double> epsilon;
  /// lambda(t) = c t^p (continuous modes only).
  std::vector<double> p;
  /// Source / perturbation c k^{-q} e1.
  std::vector<double> q;

  std::size_t cell_count() const;
};

SweepGrid parse_grid(const nlohmann::json& j);

struct SweepRow {
  std::size_t index = 0;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<bool> compliant;
  bool ok = false;
  bool diverged = false;
  double final_norm = 0.0;
  std::optional<double> final_distance;
  double sup_scaled_speed = 0.0;
  double first_decade_max = 0.0;
  double last_decade_max = 0.0;
  std::string error;
};

/// Cells run on up to `threads` workers; rows come back in grid order
/// (alpha slowest, q fastest). At most 10^4 cells.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const SweepGrid& grid,
                            unsigned threads = 0);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace ripa
