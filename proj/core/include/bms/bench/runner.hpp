#pragma once

#include "bms/bench/config.hpp"
#include "bms/bench/scenario.hpp"
#include "bms/stability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bms::bench {

struct RunOptions {
  bool estimate = true;      // false: simulate and measure observability only
  bool keep_trials = false;  // keep per-trial squared errors
};

struct RunResult {
  ScenarioConfig config;
  // One entry per reported step t >= N; the error at t compares the estimate
  // of x_{t-N+1} made at t with the truth.
  std::vector<int> steps;
  std::vector<double> rmse;
  std::vector<double> rmse_normalized;
  std::vector<double> wall_ms;  // mean per-window solve time, 0 unless timing

  double delta_min = 0.0;   // min over every window of every trial
  double delta_mean = 0.0;  // mean over trials of the per-trial min
  double phi_bar = 0.0;     // max noise gain over the windows seen
  double rho_X = 0.0;       // max true-state norm seen
  std::optional<StabilityLedger> ledger;
  long windows = 0;
  long failures = 0;

  // keep_trials only: [trial][step] squared error and squared true norm, and
  // ||x_{t-N} - xhat_{t-N|t}||_P^2 per window (deterministic kinds).
  std::vector<std::vector<double>> trial_sq_errors;
  std::vector<std::vector<double>> trial_sq_truth;
  std::vector<std::vector<double>> trial_p_errors;

  // Mean RMSE over reported positions [from, to).
  double mean_rmse(std::size_t from, std::size_t to) const;
  // Mean RMSE over the second half of the reported steps.
  double steady_rmse() const;
};

// Throws ConvergenceFailure when more than 1% of the windows hit the
// iteration cap.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

ScenarioConfig apply_axis(const ScenarioConfig& cfg, const std::string& axis, double value);

struct SweepPoint {
  double value = 0.0;
  double delta_min = 0.0;
  double delta_mean = 0.0;
  double mean_rmse = 0.0;    // over every reported step
  double steady_rmse = 0.0;  // second half
  double final_rmse = 0.0;
  double final_normalized = 0.0;
  double a1 = 0.0;
  std::optional<double> e_inf;
  long failures = 0;
};

// One run per grid value with the same seed (common random numbers).
std::vector<SweepPoint> sweep(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& grid,
                              const RunOptions& options = {});

// Steady-state RMSE against the sensor variance r over `trials` trials.
std::vector<SweepPoint> noise_assisted_sweep(const ScenarioConfig& cfg, const std::vector<double>& r_grid,
                                             int trials);

struct TimingRow {
  std::string estimator;
  int N = 0;
  double seconds_per_iteration = 0.0;
  long windows = 0;
};

// Mean solve time per window of each estimator on trial 0, for every horizon.
std::vector<TimingRow> timing_report(const ScenarioConfig& cfg, const std::vector<int>& horizons,
                                     const std::vector<EstimatorKind>& estimators);

}  // namespace bms::bench
