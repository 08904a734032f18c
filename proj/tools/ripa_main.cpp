// ripa: run scenarios, reproduce the rotation benchmark table, sweep
// parameters, emit eigenvalue curves and audit operators.

#include "ripa/audit.hpp"
#include "ripa/diagnostics.hpp"
#include "ripa/error.hpp"
#include "ripa/scenario.hpp"
#include "ripa/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "out";
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<double> dt;
  std::optional<long long> iters;

  ripa::IntegratorOverrides overrides() const { return {rtol, atol, dt, iters}; }
};

void add_integrator_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--rtol", f.rtol, "relative tolerance of the adaptive integrator");
  cmd->add_option("--atol", f.atol, "absolute tolerance of the adaptive integrator");
  cmd->add_option("--dt", f.dt, "use fixed-step RK4 with this step");
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::ostringstream ss;
  ss << is.rdbuf();
  text = ss.str();
  return true;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

int cmd_run(const CommonFlags& f) {
  std::string text;
  if (!read_file(f.config, text)) {
    std::cerr << "error: cannot read " << f.config << "\n";
    return 2;
  }
  const ripa::RunOutcome out = ripa::run_scenario_text(text, f.out, f.overrides());
  if (out.exit_code != 0) {
    std::cerr << "error: " << out.message << "\n";
    return out.exit_code;
  }
  std::cout << out.message << "\n";
  if (out.result) {
    std::cout << "final |x| = " << ripa::format_double(out.result->final_norm) << "\n";
  }
  for (const auto& p : out.artifacts) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

int cmd_table1(const CommonFlags& f) {
  try {
    const ripa::Table1Result t = ripa::table1(f.overrides());
    std::ostringstream csv;
    ripa::write_table1_csv(csv, t);
    write_file(fs::path(f.out) / "table1.csv", csv.str());
    ripa::write_table1_text(std::cout, t);
    return t.pass() ? 0 : 1;
  } catch (const ripa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dynamic_cast<const ripa::ConfigError*>(&e) ? 2 : 3;
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

struct SweepFlags {
  std::string grid_file;
  std::string alpha, epsilon, p, q;
  unsigned threads = 0;
};

int cmd_sweep(const CommonFlags& f, const SweepFlags& sf) {
  std::string text;
  if (!read_file(f.config, text)) {
    std::cerr << "error: cannot read " << f.config << "\n";
    return 2;
  }
  ripa::ScenarioConfig base;
  ripa::SweepGrid grid;
  try {
    base = ripa::parse_scenario_text(text);
    f.overrides().apply(base);
    if (base.raw.contains("grid")) grid = ripa::parse_grid(base.raw.at("grid"));
    if (!sf.grid_file.empty()) {
      std::string gtext;
      if (!read_file(sf.grid_file, gtext)) throw ripa::ConfigError("cannot read " + sf.grid_file);
      grid = ripa::parse_grid(json::parse(gtext));
    }
    if (!sf.alpha.empty()) grid.alpha = parse_list(sf.alpha);
    if (!sf.epsilon.empty()) grid.epsilon = parse_list(sf.epsilon);
    if (!sf.p.empty()) grid.p = parse_list(sf.p);
    if (!sf.q.empty()) grid.q = parse_list(sf.q);
  } catch (const ripa::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ripa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const auto rows = ripa::sweep(base, grid, sf.threads);
    std::ostringstream csv;
    ripa::write_sweep_csv(csv, rows);
    const fs::path path = fs::path(f.out) / (base.name + "_sweep.csv");
    write_file(path, csv.str());
    std::cout << rows.size() << " cells, wrote " << path.string() << "\n";
    return 0;
  } catch (const ripa::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

struct SpectraFlags {
  double alpha = 10.0;
  std::string schedule = "quadratic_time";
  double epsilon = 1.25;
  double c = 1.0;
  double p = 2.0;
  double lambda = 10.0;
  double t0 = 1.0;
  double t_end = 100.0;
  std::size_t points = 200;
};

int cmd_spectra(const CommonFlags& f, const SpectraFlags& sp) {
  try {
    ripa::Schedule schedule;
    if (sp.schedule == "quadratic_time") {
      schedule = ripa::Schedule::quadratic_time(sp.alpha, sp.epsilon);
    } else if (sp.schedule == "power_law") {
      schedule = ripa::Schedule::power_law(sp.c, sp.p);
    } else if (sp.schedule == "constant") {
      schedule = ripa::Schedule::constant(sp.lambda);
    } else {
      std::cerr << "error: unknown schedule " << sp.schedule << "\n";
      return 2;
    }
    if (!(sp.t0 > 0.0) || !(sp.t_end > sp.t0) || sp.points < 2) {
      std::cerr << "error: need 0 < t0 < t_end and at least two points\n";
      return 2;
    }
    std::ostringstream csv;
    ripa::write_spectra_csv(csv, sp.alpha, schedule, ripa::log_grid(sp.t0, sp.t_end, sp.points));
    const fs::path path = fs::path(f.out) / "spectra.csv";
    write_file(path, csv.str());
    std::cout << "wrote " << path.string() << "\n";
    if (sp.schedule == "power_law") {
      const auto cls = ripa::classify_rate(sp.p, sp.alpha, {sp.t0, sp.t_end}, sp.c);
      std::cout << "lambda(t) = " << sp.c << " t^" << sp.p << ": " << ripa::to_string(cls.verdict);
      if (cls.exponents) {
        std::cout << ", exponents (" << cls.exponents->first << ", " << cls.exponents->second << ")";
      }
      if (cls.compliant) std::cout << (*cls.compliant ? ", compliant" : ", non-compliant");
      if (cls.tail_integral) std::cout << ", tail integral " << *cls.tail_integral;
      std::cout << "\n";
    }
    return 0;
  } catch (const ripa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_audit(const CommonFlags& f, std::uint64_t seed, std::size_t samples) {
  std::vector<ripa::CatalogEntry> ops;
  try {
    if (!f.config.empty()) {
      std::string text;
      if (!read_file(f.config, text)) throw ripa::ConfigError("cannot read " + f.config);
      json j = json::parse(text);
      const json& spec = j.contains("operator") ? j.at("operator") : j;
      ops.push_back({"config", ripa::parse_operator(spec)});
    } else {
      ops = ripa::operator_catalog(seed);
    }
  } catch (const ripa::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ripa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  json report;
  report["seed"] = seed;
  report["samples"] = samples;
  bool all = true;
  for (const auto& entry : ops) {
    json jo;
    for (const auto& r : ripa::audit_operator(entry.op, samples, seed)) {
      if (!r.applicable) continue;
      jo[ripa::to_string(r.property)] = {
          {"worst", r.worst}, {"tolerance", r.tolerance}, {"pass", r.passed()}};
      std::printf("%-16s %-20s worst %11.3e  tol %8.1e  %s\n", entry.name.c_str(),
                  ripa::to_string(r.property), r.worst, r.tolerance, r.passed() ? "PASS" : "FAIL");
      all = all && r.passed();
    }
    report["operators"][entry.name] = jo;
  }
  const fs::path path = fs::path(f.out) / "audit.json";
  write_file(path, report.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized inertial proximal dynamics and algorithms"};
  app.require_subcommand(1);

  CommonFlags flags;
  SweepFlags sweep_flags;
  SpectraFlags spectra_flags;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;

  auto* run = app.add_subcommand("run", "run one JSON scenario");
  run->add_option("--config", flags.config, "scenario file")->required();
  run->add_option("--out", flags.out, "output directory");
  run->add_option("--iters", flags.iters, "iteration budget of discrete modes");
  add_integrator_flags(run, flags);

  auto* tab = app.add_subcommand("table1", "reproduce the five rotation benchmark rows");
  tab->add_option("--out", flags.out, "output directory");
  add_integrator_flags(tab, flags);

  auto* sw = app.add_subcommand("sweep", "parameter grid over alpha, epsilon, p, q");
  sw->add_option("--config", flags.config, "base scenario file")->required();
  sw->add_option("--out", flags.out, "output directory");
  sw->add_option("--grid", sweep_flags.grid_file, "grid JSON file");
  sw->add_option("--alpha", sweep_flags.alpha, "comma-separated values");
  sw->add_option("--epsilon", sweep_flags.epsilon, "comma-separated values");
  sw->add_option("--p", sweep_flags.p, "comma-separated values");
  sw->add_option("--q", sweep_flags.q, "comma-separated values");
  sw->add_option("--threads", sweep_flags.threads, "worker threads (0: hardware)");
  sw->add_option("--iters", flags.iters, "iteration budget of discrete modes");
  add_integrator_flags(sw, flags);

  auto* spc = app.add_subcommand("spectra", "eigenvalues of the rotation example along a schedule");
  spc->add_option("--out", flags.out, "output directory");
  spc->add_option("--alpha", spectra_flags.alpha);
  spc->add_option("--schedule", spectra_flags.schedule, "quadratic_time | power_law | constant");
  spc->add_option("--epsilon", spectra_flags.epsilon);
  spc->add_option("--c", spectra_flags.c, "power-law coefficient");
  spc->add_option("--p", spectra_flags.p, "power-law exponent");
  spc->add_option("--lambda", spectra_flags.lambda, "constant index");
  spc->add_option("--t0", spectra_flags.t0);
  spc->add_option("--t-end", spectra_flags.t_end);
  spc->add_option("--points", spectra_flags.points);

  auto* aud = app.add_subcommand("audit", "randomized checks of the operator inequalities");
  aud->add_option("--config", flags.config, "scenario or operator file (default: catalog)");
  aud->add_option("--out", flags.out, "output directory");
  aud->add_option("--seed", seed, "sampling seed");
  aud->add_option("--samples", samples, "samples per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(flags);
  if (*tab) return cmd_table1(flags);
  if (*sw) return cmd_sweep(flags, sweep_flags);
  if (*spc) return cmd_spectra(flags, spectra_flags);
  if (*aud) return cmd_audit(flags, seed, samples);
  return 2;
}
