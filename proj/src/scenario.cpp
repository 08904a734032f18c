#include "ripa/scenario.hpp"

#include "ripa/diagnostics.hpp"
#include "ripa/error.hpp"
#include "ripa/saddle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace ripa {

using nlohmann::json;

const char* to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::FirstOrderRaw: return "first_order_raw";
    case ScenarioMode::FirstOrderYosida: return "first_order_yosida";
    case ScenarioMode::SecondOrderYosida: return "second_order_yosida";
    case ScenarioMode::SecondOrderRaw: return "second_order_raw";
    case ScenarioMode::Ripa: return "ripa";
    case ScenarioMode::RipaPert: return "ripa_pert";
    case ScenarioMode::Classical: return "classical";
  }
  return "unknown";
}

bool is_discrete(ScenarioMode mode) {
  return mode == ScenarioMode::Ripa || mode == ScenarioMode::RipaPert ||
         mode == ScenarioMode::Classical;
}

namespace {

// ---- JSON field access ------------------------------------------------------

const json& require_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(where + ": missing field \"" + key + "\"");
  }
  return j.at(key);
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(what + " must be finite");
  return d;
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return as_number(j.at(key), where + "." + key);
}

std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

Point as_point(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be a non-empty array of numbers");
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[static_cast<Eigen::Index>(i)] = as_number(v[i], what + "[" + std::to_string(i) + "]");
  }
  return p;
}

Matrix as_matrix(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
    throw ConfigError(what + " must be a non-empty array of rows");
  }
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw ConfigError(what + " rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          as_number(v[i][k], what + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  return m;
}

long long as_count(const json& v, const std::string& what) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && d >= 0.0 && d < 9.2e18) {
        return static_cast<long long>(d);
      }
    }
    throw ConfigError(what + " must be a nonnegative integer");
  }
  const long long n = v.get<long long>();
  if (n < 0) throw ConfigError(what + " must be a nonnegative integer");
  return n;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown field \"" + it.key() + "\"");
  }
}

// Library errors raised while interpreting the config are configuration
// errors unless they concern the operator itself.
template <class F>
auto config_step(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::DimensionMismatch ||
        e.kind() == ErrorKind::NonPositiveIndex) {
      throw ConfigError(e.what());
    }
    throw;
  }
}

ScenarioMode parse_mode(const std::string& s) {
  static const std::pair<const char*, ScenarioMode> modes[] = {
      {"first_order_raw", ScenarioMode::FirstOrderRaw},
      {"first_order_yosida", ScenarioMode::FirstOrderYosida},
      {"second_order_yosida", ScenarioMode::SecondOrderYosida},
      {"second_order_raw", ScenarioMode::SecondOrderRaw},
      {"ripa", ScenarioMode::Ripa},
      {"ripa_pert", ScenarioMode::RipaPert},
      {"classical", ScenarioMode::Classical},
  };
  for (const auto& [name, mode] : modes) {
    if (s == name) return mode;
  }
  throw ConfigError("unknown mode \"" + s + "\"");
}

ProxRule parse_rule(const json& j, const std::string& where) {
  const std::string rule = as_string(require_field(j, "rule", where), where + ".rule");
  if (rule == "abs") return ProxRule::absolute_value(number_or(j, "weight", 1.0, where));
  if (rule == "box") {
    return ProxRule::box(number_or(j, "lower", -1.0, where), number_or(j, "upper", 1.0, where));
  }
  if (rule == "quadratic") {
    return ProxRule::quadratic(number_or(j, "curvature", 1.0, where),
                               number_or(j, "center", 0.0, where));
  }
  throw ConfigError(where + ": unknown prox rule \"" + rule + "\"");
}

SaddleTerm parse_term(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::string kind = as_string(require_field(j, "kind", where), where + ".kind");
  if (kind == "quadratic") {
    if (j.contains("hessian")) {
      QuadraticTerm q;
      q.hessian = as_matrix(j.at("hessian"), where + ".hessian");
      q.linear = j.contains("linear") ? as_point(j.at("linear"), where + ".linear")
                                      : Point::Zero(q.hessian.rows());
      return q;
    }
    const Point center = as_point(require_field(j, "center", where), where + ".center");
    return QuadraticTerm::centered(number_or(j, "a", 1.0, where), center);
  }
  if (kind == "prox") {
    ProxTerm t{parse_rule(j, where), 1};
    t.dim = static_cast<Eigen::Index>(
        j.contains("dim") ? as_count(j.at("dim"), where + ".dim") : 1);
    return t;
  }
  throw ConfigError(where + ": unknown term kind \"" + kind + "\"");
}

SourceTerm parse_source(const json& j, const std::string& where, Eigen::Index dim) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::string kind = as_string(require_field(j, "kind", where), where + ".kind");
  if (kind == "none") return SourceTerm::none();
  if (kind == "power_decay") {
    Point dir = Point::Zero(dim);
    if (dim > 0) dir[0] = 1.0;
    if (j.contains("direction")) dir = as_point(j.at("direction"), where + ".direction");
    if (dir.size() != dim) throw ConfigError(where + ".direction has the wrong dimension");
    return SourceTerm::power_decay(number_or(j, "c", 1.0, where),
                                   as_number(require_field(j, "q", where), where + ".q"), dir);
  }
  if (kind == "custom") {
    const json& ts = require_field(j, "times", where);
    const json& vs = require_field(j, "values", where);
    if (!ts.is_array() || !vs.is_array()) throw ConfigError(where + " tables must be arrays");
    std::vector<double> times;
    std::vector<Point> values;
    for (std::size_t i = 0; i < ts.size(); ++i) times.push_back(as_number(ts[i], where + ".times"));
    for (std::size_t i = 0; i < vs.size(); ++i) {
      values.push_back(as_point(vs[i], where + ".values"));
      if (values.back().size() != dim) throw ConfigError(where + ".values has the wrong dimension");
    }
    return SourceTerm::custom(std::move(times), std::move(values));
  }
  throw ConfigError(where + ": unknown source kind \"" + kind + "\"");
}

IntegratorSettings parse_integrator(const json& j) {
  if (!j.is_object()) throw ConfigError("integrator must be an object");
  reject_unknown(j, {"method", "rtol", "atol", "dt", "max_step"}, "integrator");
  IntegratorSettings s;
  const std::string method = j.contains("method") ? as_string(j.at("method"), "integrator.method")
                                                  : std::string("rk45");
  if (method == "rk45") {
    s.method = IntegratorMethod::RK45Adaptive;
  } else if (method == "rk4") {
    s.method = IntegratorMethod::RK4Fixed;
  } else {
    throw ConfigError("unknown integrator method \"" + method + "\"");
  }
  s.rtol = number_or(j, "rtol", s.rtol, "integrator");
  s.atol = number_or(j, "atol", s.atol, "integrator");
  s.dt = number_or(j, "dt", s.dt, "integrator");
  s.max_step = number_or(j, "max_step", s.max_step, "integrator");
  return s;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

// ---- operators ----------------------------------------------------------------

Operator parse_operator(const json& spec) {
  if (!spec.is_object()) throw ConfigError("operator must be an object");
  const std::string kind = as_string(require_field(spec, "kind", "operator"), "operator.kind");
  Operator op = Operator::zero(1);
  if (kind == "rotation2d") {
    reject_unknown(spec, {"kind"}, "operator");
    op = Operator::rotation2d();
  } else if (kind == "zero") {
    reject_unknown(spec, {"kind", "dim"}, "operator");
    const long long dim = as_count(require_field(spec, "dim", "operator"), "operator.dim");
    if (dim < 1) throw ConfigError("operator.dim must be positive");
    op = Operator::zero(static_cast<Eigen::Index>(dim));
  } else if (kind == "affine") {
    reject_unknown(spec, {"kind", "matrix", "offset", "known_zero"}, "operator");
    const Matrix m = as_matrix(require_field(spec, "matrix", "operator"), "operator.matrix");
    if (m.rows() != m.cols()) throw ConfigError("operator.matrix must be square");
    const Point q = spec.contains("offset") ? as_point(spec.at("offset"), "operator.offset")
                                            : Point::Zero(m.rows());
    if (q.size() != m.rows()) throw ConfigError("operator.offset has the wrong dimension");
    op = Operator::affine(m, q);
  } else if (kind == "prox") {
    reject_unknown(spec,
                   {"kind", "rule", "dim", "weight", "lower", "upper", "curvature", "center",
                    "known_zero"},
                   "operator");
    const ProxRule rule = config_step([&] { return parse_rule(spec, "operator"); });
    const long long dim =
        spec.contains("dim") ? as_count(spec.at("dim"), "operator.dim") : 1;
    if (dim < 1) throw ConfigError("operator.dim must be positive");
    op = Operator::prox(rule, static_cast<Eigen::Index>(dim));
  } else if (kind == "saddle") {
    reject_unknown(spec, {"kind", "f", "g", "A", "B", "known_zero"}, "operator");
    const SaddleTerm f = parse_term(require_field(spec, "f", "operator"), "operator.f");
    const SaddleTerm g = parse_term(require_field(spec, "g", "operator"), "operator.g");
    const Matrix a = as_matrix(require_field(spec, "A", "operator"), "operator.A");
    const Matrix b = as_matrix(require_field(spec, "B", "operator"), "operator.B");
    op = build_saddle_operator(f, g, a, b);
  } else {
    throw ConfigError("unknown operator kind \"" + kind + "\"");
  }
  if (spec.contains("known_zero")) {
    const Point z = as_point(spec.at("known_zero"), "operator.known_zero");
    if (z.size() != op.dimension()) throw ConfigError("operator.known_zero has the wrong dimension");
    op = op.with_known_zero(z);
  }
  return op;
}

// ---- scenarios ------------------------------------------------------------------

ContinuousConfig ScenarioConfig::continuous() const {
  ContinuousConfig c;
  c.alpha = alpha;
  c.schedule = schedule;
  c.field = mode == ScenarioMode::SecondOrderRaw ? FieldMode::Raw : FieldMode::Yosida;
  c.t0 = t0;
  c.t_end = t_end;
  c.x0 = x0;
  c.v0 = v0;
  c.source = source;
  c.integrator = integrator;
  c.sample_stride = sample_stride;
  return c;
}

FirstOrderConfig ScenarioConfig::first_order() const {
  FirstOrderConfig c;
  c.schedule = schedule;
  c.field = mode == ScenarioMode::FirstOrderRaw ? FieldMode::Raw : FieldMode::Yosida;
  c.t0 = t0;
  c.t_end = t_end;
  c.x0 = x0;
  c.integrator = integrator;
  c.sample_stride = sample_stride;
  return c;
}

DiscreteConfig ScenarioConfig::discrete() const {
  DiscreteConfig c;
  c.alpha = alpha;
  c.s = s;
  c.epsilon = epsilon;
  c.schedule = discrete_schedule;
  c.lambda_bar = lambda_bar;
  c.max_iters = max_iters;
  c.perturbation = source;
  c.x0 = x0;
  c.x_minus1 = x_minus1;
  return c;
}

std::optional<bool> ScenarioConfig::compliant() const {
  switch (mode) {
    case ScenarioMode::FirstOrderRaw:
    case ScenarioMode::FirstOrderYosida:
      return std::nullopt;
    case ScenarioMode::SecondOrderRaw:
      return false;
    case ScenarioMode::SecondOrderYosida: {
      if (!source.satisfies_integrability().value_or(false)) return false;
      // Equivalent epsilon of lambda(t) = c t^2 against this alpha.
      double c = 0.0;
      if (schedule.kind() == ScheduleKind::QuadraticTime) {
        c = (1.0 + schedule.epsilon()) / (schedule.alpha() * schedule.alpha());
      } else if (schedule.kind() == ScheduleKind::PowerLaw && schedule.exponent() == 2.0) {
        c = schedule.coefficient();
      } else {
        return false;
      }
      return quadratic_schedule_compliant(alpha, c * alpha * alpha - 1.0);
    }
    case ScenarioMode::Ripa:
    case ScenarioMode::RipaPert:
    case ScenarioMode::Classical:
      return discrete().theorem_compliant();
  }
  return std::nullopt;
}

ScenarioConfig parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  reject_unknown(j,
                 {"schema", "name", "description", "mode", "operator", "alpha", "epsilon", "s",
                  "schedule", "t0", "t_end", "max_iters", "early_exit_tol", "x0", "v0",
                  "x_minus1", "source", "perturbation", "integrator", "sample_stride", "output",
                  "grid"},
                 "scenario");
  const json& schema = require_field(j, "schema", "scenario");
  if (!schema.is_number_integer() || schema.get<long long>() != 1) {
    throw ConfigError("unsupported schema version (expected 1)");
  }

  ScenarioConfig cfg;
  cfg.raw = j;
  if (j.contains("name")) cfg.name = as_string(j.at("name"), "name");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name must be a non-empty file-name-safe string");
  }
  cfg.mode = parse_mode(as_string(require_field(j, "mode", "scenario"), "mode"));
  cfg.operator_spec = require_field(j, "operator", "scenario");
  cfg.op = config_step([&] { return parse_operator(cfg.operator_spec); });
  const Eigen::Index dim = cfg.op.dimension();

  cfg.alpha = number_or(j, "alpha", cfg.alpha, "scenario");
  cfg.epsilon = number_or(j, "epsilon", cfg.epsilon, "scenario");
  cfg.s = number_or(j, "s", cfg.s, "scenario");
  cfg.t0 = number_or(j, "t0", cfg.t0, "scenario");
  cfg.t_end = number_or(j, "t_end", cfg.t_end, "scenario");
  if (j.contains("max_iters")) cfg.max_iters = as_count(j.at("max_iters"), "max_iters");
  if (j.contains("early_exit_tol")) cfg.early_exit_tol = as_number(j.at("early_exit_tol"), "early_exit_tol");
  if (j.contains("sample_stride")) {
    const long long stride = as_count(j.at("sample_stride"), "sample_stride");
    if (stride < 1 || stride > 1'000'000'000) throw ConfigError("sample_stride must be positive");
    cfg.sample_stride = static_cast<int>(stride);
  }

  cfg.x0 = as_point(require_field(j, "x0", "scenario"), "x0");
  if (cfg.x0.size() != dim) throw ConfigError("x0 has the wrong dimension for the operator");
  cfg.v0 = j.contains("v0") ? as_point(j.at("v0"), "v0") : Point::Zero(dim);
  if (cfg.v0.size() != dim) throw ConfigError("v0 has the wrong dimension for the operator");
  cfg.x_minus1 = j.contains("x_minus1") ? as_point(j.at("x_minus1"), "x_minus1") : cfg.x0;
  if (cfg.x_minus1.size() != dim) throw ConfigError("x_minus1 has the wrong dimension");

  const bool discrete = is_discrete(cfg.mode);
  const char* source_key = discrete ? "perturbation" : "source";
  const char* other_key = discrete ? "source" : "perturbation";
  if (j.contains(other_key)) {
    throw ConfigError(std::string("\"") + other_key + "\" does not apply to mode " + to_string(cfg.mode));
  }
  if (j.contains(source_key)) {
    cfg.source = config_step([&] { return parse_source(j.at(source_key), source_key, dim); });
  }

  // Schedules.
  if (discrete) {
    cfg.discrete_schedule = cfg.mode == ScenarioMode::RipaPert ? DiscreteScheduleKind::RipaPerturbed
                            : cfg.mode == ScenarioMode::Classical
                                ? DiscreteScheduleKind::ClassicalUnregularized
                                : DiscreteScheduleKind::RipaStandard;
    if (j.contains("schedule")) {
      const json& sj = j.at("schedule");
      const std::string kind = as_string(require_field(sj, "kind", "schedule"), "schedule.kind");
      if (kind == "constant" && cfg.mode == ScenarioMode::Ripa) {
        cfg.discrete_schedule = DiscreteScheduleKind::ConstantLambda;
        cfg.lambda_bar = as_number(require_field(sj, "lambda", "schedule"), "schedule.lambda");
      } else if (kind != "ripa") {
        throw ConfigError("schedule \"" + kind + "\" does not apply to mode " + to_string(cfg.mode));
      }
    }
  } else {
    const bool yosida = cfg.mode == ScenarioMode::FirstOrderYosida ||
                        cfg.mode == ScenarioMode::SecondOrderYosida;
    if (j.contains("schedule")) {
      if (!yosida) throw ConfigError("raw modes take no schedule");
      const json& sj = j.at("schedule");
      if (!sj.is_object()) throw ConfigError("schedule must be an object");
      const std::string kind = as_string(require_field(sj, "kind", "schedule"), "schedule.kind");
      cfg.schedule = config_step([&] {
        if (kind == "constant") {
          return Schedule::constant(as_number(require_field(sj, "lambda", "schedule"), "schedule.lambda"));
        }
        if (kind == "quadratic_time") {
          return Schedule::quadratic_time(number_or(sj, "alpha", cfg.alpha, "schedule"),
                                          number_or(sj, "epsilon", cfg.epsilon, "schedule"));
        }
        if (kind == "power_law") {
          return Schedule::power_law(number_or(sj, "c", 1.0, "schedule"),
                                     as_number(require_field(sj, "p", "schedule"), "schedule.p"));
        }
        throw ConfigError("unknown schedule kind \"" + kind + "\"");
      });
    } else if (yosida) {
      cfg.schedule = config_step([&] { return Schedule::quadratic_time(cfg.alpha, cfg.epsilon); });
    }
    if (cfg.mode == ScenarioMode::FirstOrderRaw || cfg.mode == ScenarioMode::FirstOrderYosida) {
      if (cfg.source.kind() != SourceKind::None) throw ConfigError("first-order flows take no source");
    }
  }

  if (j.contains("integrator")) cfg.integrator = parse_integrator(j.at("integrator"));

  cfg.trajectory_file = cfg.name + ".csv";
  cfg.diagnostics_file = cfg.name + ".json";
  if (j.contains("output")) {
    const json& o = j.at("output");
    if (!o.is_object()) throw ConfigError("output must be an object");
    reject_unknown(o, {"trajectory", "diagnostics"}, "output");
    if (o.contains("trajectory")) cfg.trajectory_file = as_string(o.at("trajectory"), "output.trajectory");
    if (o.contains("diagnostics")) cfg.diagnostics_file = as_string(o.at("diagnostics"), "output.diagnostics");
  }

  config_step([&] {
    if (discrete) {
      cfg.discrete().validate(dim);
    } else if (cfg.mode == ScenarioMode::FirstOrderRaw || cfg.mode == ScenarioMode::FirstOrderYosida) {
      cfg.first_order().validate(dim);
    } else {
      cfg.continuous().validate(dim);
    }
    return 0;
  });
  return cfg;
}

ScenarioConfig parse_scenario_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

std::string config_hash(const json& j) { return fnv1a_hex(j.dump()); }

void IntegratorOverrides::apply(ScenarioConfig& cfg) const {
  json& integ = cfg.raw["integrator"];
  if (!integ.is_object()) integ = json::object();
  if (rtol) {
    if (!(*rtol > 0.0)) throw ConfigError("--rtol must be positive");
    cfg.integrator.rtol = *rtol;
    integ["rtol"] = *rtol;
  }
  if (atol) {
    if (!(*atol > 0.0)) throw ConfigError("--atol must be positive");
    cfg.integrator.atol = *atol;
    integ["atol"] = *atol;
  }
  if (dt) {
    if (!(*dt > 0.0)) throw ConfigError("--dt must be positive");
    cfg.integrator.method = IntegratorMethod::RK4Fixed;
    cfg.integrator.dt = *dt;
    integ["method"] = "rk4";
    integ["dt"] = *dt;
  }
  if (integ.empty()) cfg.raw.erase("integrator");
  if (iters) {
    if (*iters < 0) throw ConfigError("--iters must be nonnegative");
    cfg.max_iters = *iters;
    cfg.raw["max_iters"] = *iters;
  }
}

// ---- execution --------------------------------------------------------------------

namespace {

json lyapunov_json(const LyapunovReport& rep, double tolerance, bool relative) {
  json j;
  j["raw_violations"] = rep.raw_violation_count();
  j["max_increase"] = rep.max_increase();
  j["tolerance"] = tolerance;
  j["tolerance_kind"] = relative ? "relative" : "absolute";
  j["violations"] = relative ? rep.count_above_relative(tolerance) : rep.count_above(tolerance);
  j["unmonitored_increases"] = rep.unmonitored_increases.size();
  j["monitor_from"] = rep.monitor_from;
  return j;
}

}  // namespace

ScenarioResult execute(const ScenarioConfig& cfg) {
  ScenarioResult r;
  json diag;
  std::optional<LyapunovReport> lyap;
  double lyap_tol = 0.0;
  bool lyap_relative = false;
  const auto& z = cfg.op.known_zero();

  if (is_discrete(cfg.mode)) {
    const DiscreteConfig dc = cfg.discrete();
    RunResult rr = run(cfg.op, dc, StopRule{cfg.max_iters, cfg.early_exit_tol});
    r.trajectory = std::move(rr.trajectory);
    diag["iterations"] = rr.summary.iterations;
    diag["early_exit"] = rr.summary.early_exit;
    diag["sup_k_dx"] = rr.summary.sup_k_dx;
    if (z && cfg.mode != ScenarioMode::Classical &&
        dc.schedule != DiscreteScheduleKind::ConstantLambda) {
      lyap = lyapunov_report(r.trajectory, *z, lyapunov_params(dc));
      lyap_tol = 1e-9;
      lyap_relative = true;
    }
  } else if (cfg.mode == ScenarioMode::FirstOrderRaw || cfg.mode == ScenarioMode::FirstOrderYosida) {
    r.trajectory = simulate_first_order(cfg.op, cfg.first_order());
  } else {
    r.trajectory = simulate_second_order(cfg.op, cfg.continuous());
    if (z && cfg.mode == ScenarioMode::SecondOrderYosida && cfg.source.kind() == SourceKind::None &&
        cfg.schedule.kind() == ScheduleKind::QuadraticTime && !r.trajectory.empty()) {
      const double c = (1.0 + cfg.schedule.epsilon()) / (cfg.schedule.alpha() * cfg.schedule.alpha());
      lyap = lyapunov_report(r.trajectory, *z,
                             ContinuousLyapunovParams{cfg.alpha, c * cfg.alpha * cfg.alpha - 1.0});
      lyap_tol = 1e-6 * std::abs(lyap->phi.front());
    }
  }

  const std::string hash = config_hash(cfg.raw);
  r.trajectory.metadata().config_hash = hash;
  const RunMetadata& meta = r.trajectory.metadata();
  r.diverged = meta.diverged;
  if (!r.trajectory.empty()) {
    r.final_norm = r.trajectory.back().x.norm();
    if (z) r.final_distance = (r.trajectory.back().x - *z).norm();
  }

  const RateStats rates = rate_stats(r.trajectory);
  const auto speed_sums = speed_partial_sums(r.trajectory);
  const auto residual_sums = residual_partial_sums(r.trajectory);

  diag["name"] = cfg.name;
  diag["mode"] = to_string(cfg.mode);
  diag["config_hash"] = hash;
  diag["compliant"] = optional_json(cfg.compliant());
  diag["diverged"] = meta.diverged;
  diag["truncated"] = meta.truncated;
  diag["wall_seconds"] = meta.wall_seconds;
  diag["samples"] = r.trajectory.size();
  if (!r.trajectory.empty()) {
    diag["final"] = {{"t", r.trajectory.back().t},
                     {"norm", r.final_norm},
                     {"distance", optional_json(r.final_distance)}};
  }
  diag["rates"] = {{"sup_scaled_speed", rates.sup_scaled_speed},
                   {"first_decade_max", rates.first_decade_max},
                   {"last_decade_max", rates.last_decade_max}};
  diag["partial_sums"] = {{"speed", speed_sums.empty() ? 0.0 : speed_sums.back()},
                          {"residual", residual_sums.empty() ? 0.0 : residual_sums.back()}};
  if (lyap) diag["lyapunov"] = lyapunov_json(*lyap, lyap_tol, lyap_relative);
  r.diagnostics = std::move(diag);
  return r;
}

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonPositiveIndex:
      return dynamic_cast<const ConfigError*>(&e) ? 2 : 3;
    default:
      return 3;
  }
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  RunOutcome out;
  try {
    ScenarioResult r = execute(cfg);
    std::ostringstream csv;
    r.trajectory.write_csv(csv);
    const std::string diag = r.diagnostics.dump(2) + "\n";
    std::filesystem::create_directories(out_dir);
    const auto traj_path = out_dir / cfg.trajectory_file;
    const auto diag_path = out_dir / cfg.diagnostics_file;
    write_atomically(traj_path, csv.str());
    write_atomically(diag_path, diag);
    out.artifacts = {traj_path, diag_path};
    out.message = cfg.name + ": " + (r.diverged ? "diverged" : "ok");
    out.result = std::move(r);
    out.exit_code = 0;
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e);
    out.message = e.what();
  } catch (const std::exception& e) {
    out.exit_code = 3;
    out.message = e.what();
  }
  return out;
}

RunOutcome run_scenario_text(std::string_view json_text, const std::filesystem::path& out_dir,
                             const IntegratorOverrides& overrides) {
  ScenarioConfig cfg;
  try {
    cfg = parse_scenario_text(json_text);
    overrides.apply(cfg);
  } catch (const Error& e) {
    RunOutcome out;
    out.exit_code = exit_code_for(e);
    out.message = e.what();
    return out;
  }
  return run_scenario(cfg, out_dir);
}

// ---- Table 1 ------------------------------------------------------------------------

namespace {

struct Table1Spec {
  const char* key;
  const char* equation;
  const char* mode;
  json schedule;
};

const std::vector<Table1Spec>& table1_specs() {
  static const std::vector<Table1Spec> specs = {
      {"E1", "x' + A(x) = 0", "first_order_raw", nullptr},
      {"E2", "x'' + (alpha/t) x' + A(x) = 0", "second_order_raw", nullptr},
      {"E3", "x' + A_lambda(t)(x) = 0, lambda(t) = (1+eps) t^2/alpha^2", "first_order_yosida",
       json{{"kind", "quadratic_time"}}},
      {"E4", "x' + A_lambda(x) = 0, lambda = 10", "first_order_yosida",
       json{{"kind", "constant"}, {"lambda", 10.0}}},
      {"E5", "x'' + (alpha/t) x' + A_lambda(t)(x) = 0", "second_order_yosida",
       json{{"kind", "quadratic_time"}}},
  };
  return specs;
}

}  // namespace

std::vector<ScenarioConfig> table1_scenarios(const IntegratorOverrides& overrides) {
  std::vector<ScenarioConfig> out;
  for (const Table1Spec& spec : table1_specs()) {
    json j = {{"schema", 1},
              {"name", spec.key},
              {"mode", spec.mode},
              {"operator", {{"kind", "rotation2d"}}},
              {"alpha", 10.0},
              {"epsilon", 1.25},
              {"t0", 1.0},
              {"t_end", 100.0},
              {"x0", {10.0, 10.0}}};
    if (!spec.schedule.is_null()) j["schedule"] = spec.schedule;
    if (std::string(spec.mode).rfind("second", 0) == 0) j["v0"] = {0.0, 0.0};
    ScenarioConfig cfg = parse_scenario(j);
    overrides.apply(cfg);
    out.push_back(std::move(cfg));
  }
  return out;
}

bool Table1Result::pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const Table1Row& r) { return r.pass; });
}

Table1Result table1(const IntegratorOverrides& overrides) {
  const double root200 = std::sqrt(200.0);
  const double e4_closed = root200 * std::exp(-(10.0 / 101.0) * 99.0);
  const auto scenarios = table1_scenarios(overrides);
  Table1Result t;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const ScenarioConfig& cfg = scenarios[i];
    Table1Row row;
    row.key = cfg.name;
    row.equation = table1_specs()[i].equation;
    const ScenarioResult r = execute(cfg);
    row.final_distance = r.final_norm;
    row.diverged = r.diverged;
    row.wall_seconds = r.trajectory.metadata().wall_seconds;
    auto within = [&](double ref, double rel) {
      row.reference = ref;
      return std::abs(row.final_distance - ref) <= rel * ref;
    };
    if (row.key == "E1") {
      row.band = "0.1%";
      row.pass = within(root200, 1e-3);
    } else if (row.key == "E2") {
      row.band = ">= 1e20, diverged";
      row.reference = 1e20;
      row.pass = row.final_distance >= 1e20 && row.diverged;
    } else if (row.key == "E3") {
      row.band = "10%";
      row.pass = within(0.0135184, 0.1);
    } else if (row.key == "E4") {
      row.band = "1%";
      row.pass = within(e4_closed, 1e-2);
    } else {
      row.band = "10%";
      row.pass = within(0.000323, 0.1);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_table1_csv(std::ostream& os, const Table1Result& t) {
  os << "key,equation,final_distance,reference,band,diverged,pass\n";
  for (const Table1Row& r : t.rows) {
    os << r.key << ",\"" << r.equation << "\"," << format_double(r.final_distance) << ','
       << format_double(r.reference) << ",\"" << r.band << "\"," << (r.diverged ? "true" : "false")
       << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

void write_table1_text(std::ostream& os, const Table1Result& t) {
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-58s %14s %14s %-18s %s\n", "key", "equation",
                "distance", "reference", "band", "result");
  os << line;
  for (const Table1Row& r : t.rows) {
    std::snprintf(line, sizeof line, "%-4s %-58s %14.7g %14.7g %-18s %s%s\n", r.key.c_str(),
                  r.equation.c_str(), r.final_distance, r.reference, r.band.c_str(),
                  r.pass ? "PASS" : "FAIL", r.diverged ? " (diverged)" : "");
    os << line;
  }
  os << (t.pass() ? "all rows within tolerance\n" : "one or more rows outside tolerance\n");
}

// ---- sweeps -------------------------------------------------------------------------

std::size_t SweepGrid::cell_count() const {
  if (alpha.empty() && epsilon.empty() && p.empty() && q.empty()) return 0;
  std::size_t n = 1;
  for (const auto* axis : {&alpha, &epsilon, &p, &q}) {
    if (!axis->empty()) n *= axis->size();
  }
  return n;
}

SweepGrid parse_grid(const json& j) {
  if (!j.is_object()) throw ConfigError("grid must be an object");
  reject_unknown(j, {"alpha", "epsilon", "p", "q"}, "grid");
  SweepGrid g;
  auto axis = [&](const char* key, std::vector<double>& dst) {
    if (!j.contains(key)) return;
    const json& a = j.at(key);
    if (!a.is_array()) throw ConfigError(std::string("grid.") + key + " must be an array");
    for (const json& v : a) dst.push_back(as_number(v, std::string("grid.") + key));
  };
  axis("alpha", g.alpha);
  axis("epsilon", g.epsilon);
  axis("p", g.p);
  axis("q", g.q);
  return g;
}

namespace {

struct Cell {
  std::optional<double> alpha, epsilon, p, q;
};

std::vector<Cell> enumerate(const SweepGrid& g) {
  std::vector<Cell> cells;
  if (g.cell_count() == 0) return cells;
  auto values = [](const std::vector<double>& v) {
    std::vector<std::optional<double>> out;
    if (v.empty()) out.emplace_back();
    for (double x : v) out.emplace_back(x);
    return out;
  };
  for (const auto& a : values(g.alpha)) {
    for (const auto& e : values(g.epsilon)) {
      for (const auto& p : values(g.p)) {
        for (const auto& q : values(g.q)) cells.push_back({a, e, p, q});
      }
    }
  }
  return cells;
}

SweepRow run_cell(const ScenarioConfig& base, const Cell& cell, std::size_t index) {
  SweepRow row;
  row.index = index;
  row.p = cell.p;
  row.q = cell.q;
  try {
    ScenarioConfig cfg = base;
    if (cell.alpha) {
      cfg.alpha = *cell.alpha;
      cfg.raw["alpha"] = *cell.alpha;
    }
    if (cell.epsilon) {
      cfg.epsilon = *cell.epsilon;
      cfg.raw["epsilon"] = *cell.epsilon;
    }
    row.alpha = cfg.alpha;
    row.epsilon = cfg.epsilon;
    if ((cell.alpha || cell.epsilon) && cfg.schedule.kind() == ScheduleKind::QuadraticTime &&
        !is_discrete(cfg.mode)) {
      cfg.schedule = Schedule::quadratic_time(cfg.alpha, cfg.epsilon);
      cfg.raw["schedule"] = {{"kind", "quadratic_time"}, {"alpha", cfg.alpha}, {"epsilon", cfg.epsilon}};
    }
    if (cell.p) {
      if (is_discrete(cfg.mode) || cfg.mode == ScenarioMode::FirstOrderRaw ||
          cfg.mode == ScenarioMode::SecondOrderRaw) {
        throw ConfigError("p applies only to regularized continuous modes");
      }
      const double c = cfg.schedule.kind() == ScheduleKind::PowerLaw ? cfg.schedule.coefficient() : 1.0;
      cfg.schedule = Schedule::power_law(c, *cell.p);
      cfg.raw["schedule"] = {{"kind", "power_law"}, {"c", c}, {"p", *cell.p}};
    }
    if (cell.q) {
      if (cfg.mode == ScenarioMode::FirstOrderRaw || cfg.mode == ScenarioMode::FirstOrderYosida) {
        throw ConfigError("q applies only to modes with a source term");
      }
      double c = 1.0;
      Point dir = Point::Zero(cfg.op.dimension());
      dir[0] = 1.0;
      if (cfg.source.kind() == SourceKind::PowerDecay) {
        c = cfg.source.coefficient();
        dir = cfg.source.direction();
      }
      cfg.source = SourceTerm::power_decay(c, *cell.q, dir);
      std::vector<double> d(dir.data(), dir.data() + dir.size());
      cfg.raw[is_discrete(cfg.mode) ? "perturbation" : "source"] = {
          {"kind", "power_decay"}, {"c", c}, {"q", *cell.q}, {"direction", d}};
    }
    row.compliant = cfg.compliant();
    const ScenarioResult r = execute(cfg);
    row.ok = true;
    row.diverged = r.diverged;
    row.final_norm = r.final_norm;
    row.final_distance = r.final_distance;
    const RateStats rates = rate_stats(r.trajectory);
    row.sup_scaled_speed = rates.sup_scaled_speed;
    row.first_decade_max = rates.first_decade_max;
    row.last_decade_max = rates.last_decade_max;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  if (!cell.alpha) row.alpha = base.alpha;
  if (!cell.epsilon) row.epsilon = base.epsilon;
  return row;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& base, const SweepGrid& grid, unsigned threads) {
  if (grid.cell_count() > 10'000) throw ConfigError("sweep grid exceeds 10^4 cells");
  const std::vector<Cell> cells = enumerate(grid);
  std::vector<SweepRow> rows(cells.size());
  if (cells.empty()) return rows;
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(base, cells[i], i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "index,alpha,epsilon,p,q,compliant,status,diverged,final_norm,final_distance,"
        "sup_scaled_speed,first_decade_max,last_decade_max,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const SweepRow& r : rows) {
    os << r.index << ',' << format_double(r.alpha) << ',' << format_double(r.epsilon) << ','
       << opt(r.p) << ',' << opt(r.q) << ','
       << (r.compliant ? (*r.compliant ? "true" : "false") : "") << ','
       << (r.ok ? "ok" : "error") << ',' << (r.diverged ? "true" : "false") << ',';
    if (r.ok) {
      os << format_double(r.final_norm) << ',' << opt(r.final_distance) << ','
         << format_double(r.sup_scaled_speed) << ',' << format_double(r.first_decade_max) << ','
         << format_double(r.last_decade_max) << ',';
    } else {
      os << ",,,,,";
    }
    os << (r.error.empty() ? "" : csv_quote(r.error)) << '\n';
  }
}

}  // namespace ripa
