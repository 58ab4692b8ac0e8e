// bms: run, sweep and inspect the benchmark scenarios.
#include "bms/bench/config.hpp"
#include "bms/bench/emit.hpp"
#include "bms/bench/runner.hpp"
#include "bms/error.hpp"
#include "bms/fem_mesh.hpp"
#include "bms/stability.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace bms;
using namespace bms::bench;

struct Common {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> trials;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario INI file")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", c.scenario, "preset when no config is given")
      ->check(CLI::IsMember({"hydraulic", "oscillator", "oscillator-network", "diffusion-field", "fast-field"}));
  cmd->add_option("--seed", c.seed, "override scenario.seed");
  cmd->add_option("--threads", c.threads, "worker threads for trials (0: all cores)");
  cmd->add_option("--trials", c.trials, "override scenario.trials");
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig cfg = !c.config.empty()     ? load_config_file(c.config)
                       : !c.scenario.empty() ? scenario_preset(parse_scenario_kind(c.scenario))
                                             : throw ConfigError("give --config FILE or --scenario NAME");
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.trials) cfg.trials = *c.trials;
  cfg.validate();
  return cfg;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  emit_text(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-horizon estimation with binary sensors: benchmark scenarios"};
  app.require_subcommand(1);

  Common run_c, sweep_c, obs_c, led_c, tim_c;
  std::string run_out = "out", sweep_out, sweep_axis, sweep_grid, tim_out, tim_grid = "5,20,50,100";
  bool run_timing = false;

  auto* run = app.add_subcommand("run", "run a scenario and write rmse.csv, summary.txt, ledger.txt");
  add_common(run, run_c);
  run->add_option("--out", run_out, "output directory");
  run->add_flag("--timing", run_timing, "record per-window wall time");

  auto* sw = app.add_subcommand("sweep", "one run per grid value, CSV table");
  add_common(sw, sweep_c);
  sw->add_option("--axis", sweep_axis, "N, tau, r or gamma")->check(CLI::IsMember({"N", "tau", "r", "gamma"}));
  sw->add_option("--grid", sweep_grid, "a:b:step or v1,v2,...");
  sw->add_option("--out", sweep_out, "CSV file or directory (stdout if omitted)");

  auto* obs = app.add_subcommand("observability", "observability measure over the simulated windows");
  add_common(obs, obs_c);

  auto* led = app.add_subcommand("ledger", "stability constants for the scenario");
  add_common(led, led_c);

  auto* tim = app.add_subcommand("timing", "solve time per window for each deterministic estimator and N");
  add_common(tim, tim_c);
  tim->add_option("--grid", tim_grid, "horizons");
  tim->add_option("--out", tim_out, "CSV file (stdout if omitted)");

  std::string mesh_preset = "coarse", mesh_out;
  double mesh_h = 0.0;
  auto* mesh = app.add_subcommand("mesh", "write an L-shape mesh");
  mesh->add_option("--preset", mesh_preset)->check(CLI::IsMember({"coarse", "fine"}));
  mesh->add_option("--cell", mesh_h, "target cell size instead of a preset");
  mesh->add_option("--out", mesh_out, "mesh file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*run) {
      ScenarioConfig cfg = resolve(run_c);
      cfg.timing = cfg.timing || run_timing;
      const RunResult r = run_scenario(cfg);
      emit(r, run_out);
      std::ostringstream s;
      write_summary(r, s);
      std::cout << s.str();
    } else if (*sw) {
      ScenarioConfig cfg = resolve(sweep_c);
      const std::string axis = !sweep_axis.empty() ? sweep_axis : cfg.sweep_axis;
      const std::string grid = !sweep_grid.empty() ? sweep_grid : cfg.sweep_grid;
      if (axis.empty() || grid.empty()) throw ConfigError("sweep: need --axis and --grid (or sweep.axis / sweep.grid)");
      const auto pts = sweep(cfg, axis, parse_grid(grid));
      std::ostringstream s;
      write_sweep_csv(axis, pts, s);
      std::string path = sweep_out;
      if (!path.empty() && (std::filesystem::is_directory(path) || path.back() == '/'))
        path = (std::filesystem::path(path) / "sweep.csv").string();
      write_or_print(path, s.str());
    } else if (*obs) {
      const ScenarioConfig cfg = resolve(obs_c);
      if (is_field(cfg.kind)) throw ConfigError("observability: state-space scenarios only");
      const RunResult r = run_scenario(cfg, RunOptions{false, false});
      std::cout << "scenario = " << to_string(cfg.kind) << "\nhorizon = " << cfg.horizon
                << "\ntrials = " << cfg.trials << "\ndelta_min = " << r.delta_min << "\ndelta_mean = " << r.delta_mean
                << "\nphi_bar = " << r.phi_bar << '\n';
    } else if (*led) {
      const ScenarioConfig cfg = resolve(led_c);
      if (is_field(cfg.kind)) throw ConfigError("ledger: state-space scenarios only");
      const RunResult r = run_scenario(cfg, RunOptions{false, false});
      std::ostringstream s;
      write_ledger(*r.ledger, s);
      if (r.delta_min > 0.0) {
        const StateSpaceSetup setup = build_state_space(cfg);
        MheWeights base = setup.weights;
        base.P = Matrix::Identity(setup.sys.n(), setup.sys.n());
        BoundedSets b;
        b.rho_X = r.rho_X;
        b.rho_W = cfg.process_noise * std::sqrt(static_cast<double>(setup.sys.n()));
        b.rho_V.assign(setup.sensors.size(), cfg.noise_bound);
        s << "epsilon_max = " << tune_epsilon(setup.sys, base, b, r.delta_min, cfg.horizon, r.phi_bar) << '\n';
      }
      std::cout << s.str();
    } else if (*tim) {
      const ScenarioConfig cfg = resolve(tim_c);
      if (is_field(cfg.kind)) throw ConfigError("timing: state-space scenarios only");
      std::vector<int> horizons;
      for (double v : parse_grid(tim_grid)) horizons.push_back(static_cast<int>(v));
      const auto rows = timing_report(cfg, horizons, {EstimatorKind::lsmhe, EstimatorKind::pwmhe});
      std::ostringstream s;
      write_timing(rows, s);
      write_or_print(tim_out, s.str());
    } else if (*mesh) {
      const fem::TriMesh m = mesh_h > 0.0 ? fem::generate_lshape_mesh(mesh_h)
                                          : fem::generate_lshape_mesh(mesh_preset == "fine" ? fem::MeshResolution::fine()
                                                                                            : fem::MeshResolution::coarse());
      std::ostringstream s;
      fem::write_mesh(m, s);
      write_or_print(mesh_out, s.str());
    }
  } catch (const ConfigError& e) {
    std::cerr << "bms: " << e.what() << '\n';
    return 3;
  } catch (const ConvergenceFailure& e) {
    std::cerr << "bms: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "bms: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
