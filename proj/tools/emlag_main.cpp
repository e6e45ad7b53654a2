// emlag - derive, simulate and analyze three-phase machine models from
// magnetic Lagrangians with complex currents.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "emlag/format.hpp"
#include "emlag/io.hpp"
#include "emlag/observability.hpp"
#include "emlag/validation.hpp"

namespace fs = std::filesystem;
using namespace emlag;

namespace {

struct GlobalOpts {
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  int samples = 20;
  bool quiet = false;
};

fs::path out_path(const GlobalOpts& g, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p;
  fs::create_directories(g.output_dir);
  return fs::path(g.output_dir) / p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

int cmd_simulate(const GlobalOpts& g, const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const Trajectory traj = simulate(cfg.model, cfg.initial, cfg.drive, cfg.t_end, cfg.dt);
  const fs::path csv = out_path(g, cfg.trajectory_path);
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + csv.string());
    write_trajectory_csv(out, traj);
  }
  if (!g.quiet)
    std::cout << "wrote " << traj.size() << " samples to " << csv.string() << "\n";
  if (!traj.complete()) {
    std::cerr << "simulation truncated: " << traj.message << "\n";
    return 3;
  }
  return 0;
}

int cmd_observability(const GlobalOpts& g, const std::string& machine_path,
                      bool param_draws) {
  const Model model = load_machine_file(machine_path);
  const Prop1Summary summary = verify_prop1(model, g.samples, g.seed, param_draws);
  const std::string report = prop1_report_text(summary);
  write_file(out_path(g, "observability_report.txt"), report);
  write_file(out_path(g, "observability_samples.csv"), prop1_samples_csv(summary));
  if (!g.quiet) std::cout << report;
  if (!summary.all_rank_deficient) {
    std::cerr << "proposition violation: an observable zero-frequency sample was found\n";
    return 4;
  }
  return 0;
}

int cmd_validate(const GlobalOpts& g, const std::string& machine_path, int points,
                 double perturb) {
  const Model model = load_machine_file(machine_path);
  ValidateOptions opts;
  opts.points = points;
  opts.seed = g.seed;
  opts.oracle_perturbation = perturb;
  const std::vector<SuiteResult> results = run_validation_suites(model, opts);
  bool all_passed = true;
  for (const SuiteResult& r : results) {
    all_passed = all_passed && r.passed;
    if (!g.quiet || !r.passed)
      std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
  }
  if (!all_passed) {
    std::cerr << "validation failed\n";
    return 5;
  }
  return 0;
}

int cmd_energy_audit(const GlobalOpts& g, const std::string& config_path, double bound_opt) {
  const RunConfig cfg = load_run_config(config_path);
  const double bound = bound_opt > 0.0 ? bound_opt : cfg.drift_bound;
  const Trajectory traj = simulate(cfg.model, cfg.initial, cfg.drive, cfg.t_end, cfg.dt);
  if (!traj.complete()) {
    std::cerr << "simulation truncated: " << traj.message << "\n";
    return 3;
  }
  const PowerBalanceAudit audit = power_balance_audit(cfg.model, traj, cfg.drive);
  const fs::path csv = out_path(g, cfg.residual_path);
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + csv.string());
    write_residual_csv(out, audit);
  }
  std::ostringstream os;
  os << "power balance audit over " << fmt17(traj.times.back()) << " s, "
     << traj.size() << " samples\n"
     << "max pointwise residual: " << fmt17(audit.max_residual) << " W\n"
     << "peak input power: " << fmt17(audit.peak_input_power) << " W\n"
     << "integrated drift: " << fmt17(audit.integrated_drift) << " J\n"
     << "relative drift: " << fmt17(audit.relative_drift) << " (bound " << fmt17(bound)
     << ")\n";
  if (!g.quiet) std::cout << os.str();
  if (audit.relative_drift > bound) {
    std::cerr << "energy drift " << fmt17(audit.relative_drift) << " exceeds bound "
              << fmt17(bound) << "\n";
    return 6;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"electrical-machine models from magnetic Lagrangians with complex currents"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--output-dir", g.output_dir, "directory for generated files");
  app.add_option("--seed", g.seed, "seed for randomized sweeps");
  app.add_option("--samples", g.samples, "sample count for randomized sweeps");
  app.add_flag("--quiet", g.quiet, "suppress stdout reports");

  std::string sim_config, obs_machine, val_machine, audit_config;
  bool no_param_draws = false;
  int val_points = 1000;
  double perturb = 0.0, audit_bound = 0.0;

  CLI::App* sim = app.add_subcommand("simulate", "integrate a run configuration");
  sim->add_option("config", sim_config, "run configuration file")->required();

  CLI::App* obs = app.add_subcommand("observability",
                                     "zero-stator-frequency observability sweep");
  obs->add_option("machine", obs_machine, "machine definition file")->required();
  obs->add_flag("--no-param-draws", no_param_draws,
                "keep the machine parameters fixed across samples");

  CLI::App* val = app.add_subcommand("validate", "run the model self-check suites");
  val->add_option("machine", val_machine, "machine definition file")->required();
  val->add_option("--points", val_points, "random points per suite");
  val->add_option("--perturb-oracle", perturb,
                  "fault injection: scale the analytic oracles by (1+x)");

  CLI::App* aud = app.add_subcommand("energy-audit", "simulate and audit the power balance");
  aud->add_option("config", audit_config, "run configuration file")->required();
  aud->add_option("--bound", audit_bound, "relative drift bound (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(g, sim_config);
    if (obs->parsed()) return cmd_observability(g, obs_machine, !no_param_draws);
    if (val->parsed()) return cmd_validate(g, val_machine, val_points, perturb);
    if (aud->parsed()) return cmd_energy_audit(g, audit_config, audit_bound);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
