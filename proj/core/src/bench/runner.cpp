#include "bms/bench/runner.hpp"

#include "bms/error.hpp"
#include "bms/fast_mhmap.hpp"
#include "bms/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bms::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct TrialOutput {
  std::vector<double> sq_err, sq_truth, wall_ms, p_err;
  std::vector<int> steps;
  double delta_min = std::numeric_limits<double>::infinity();
  double phi = 0.0;
  double rho_x = 0.0;
  double rho_u = 0.0;
  long windows = 0;
  long failures = 0;
};

DetEstimator det_kind(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::lsmhe: return DetEstimator::lsmhe;
    case EstimatorKind::pwmhe: return DetEstimator::pwmhe;
    case EstimatorKind::pwmhe_constrained: return DetEstimator::pwmhe_constrained;
    default: throw ConfigError("run: " + to_string(k) + " is not a deterministic estimator");
  }
}

TrialOutput state_space_trial(const ScenarioConfig& cfg, const StateSpaceSetup& setup,
                              const std::vector<Matrix>& powers, int index, const RunOptions& options) {
  const Trajectory tr = simulate_trial(cfg, setup, index);
  const int N = cfg.horizon;
  const int T = cfg.steps;
  TrialOutput out;
  for (const Vector& x : tr.x) out.rho_x = std::max(out.rho_x, x.norm());
  for (const Vector& u : tr.u) out.rho_u = std::max(out.rho_u, u.norm());

  for (int t = N; t <= T; ++t) {
    const std::vector<Labels> w(tr.y.begin() + (t - N), tr.y.begin() + (t + 1));
    const SwitchSets sets = detect_switchings(w);
    out.delta_min = std::min(out.delta_min, observability_measure(observability_matrix(powers, setup.sys.C, sets)));
    out.phi = std::max(out.phi, noise_gain(powers, setup.sys.C, sets, N));
  }
  if (!options.estimate) return out;

  DetFilterOptions fo;
  fo.kind = det_kind(cfg.estimator);
  fo.tolerate_failures = true;
  DetMheFilter filter(setup.sys, setup.sensors, setup.weights, N, tr.prior, fo);
  filter.begin(tr.y[0]);
  for (int t = 1; t <= T; ++t) {
    const auto start = Clock::now();
    const auto est = filter.advance(tr.u[static_cast<std::size_t>(t - 1)], tr.y[static_cast<std::size_t>(t)]);
    const double ms = cfg.timing ? elapsed_ms(start) : 0.0;
    if (!est) continue;
    const Vector& xt = tr.x[static_cast<std::size_t>(t - N + 1)];
    out.steps.push_back(t);
    out.sq_err.push_back((xt - est->states[1]).squaredNorm());
    out.sq_truth.push_back(xt.squaredNorm());
    out.wall_ms.push_back(ms);
    const Vector e0 = tr.x[static_cast<std::size_t>(t - N)] - est->states[0];
    out.p_err.push_back(e0.dot(setup.weights.P * e0));
    ++out.windows;
  }
  out.failures = filter.failures();
  return out;
}

void record_field(TrialOutput& out, const FieldSetup& field, int step, const Vector& truth, const Vector& estimate,
                  double ms) {
  const Vector tf = field.truth_field(truth);
  const double count = static_cast<double>(tf.size());
  out.steps.push_back(step);
  out.sq_err.push_back((tf - field.filter_field(estimate)).squaredNorm() / count);
  out.sq_truth.push_back(tf.squaredNorm() / count);
  out.wall_ms.push_back(ms);
  ++out.windows;
}

TrialOutput diffusion_trial(const ScenarioConfig& cfg, const FieldSetup& field, int index) {
  const auto truth = field_truth(cfg, field, index);
  const auto labels = field_labels(cfg, field, truth, index);
  const int N = cfg.horizon;
  const auto s = static_cast<std::size_t>(field.stride);
  MapOptions mo;
  mo.tolerate_failures = true;
  MapFilter filter(field.filter_system(), field.filter_sensors(cfg.noise_variance), field.priors(cfg), N, mo);
  const Vector one = Vector::Ones(1);
  TrialOutput out;
  filter.begin(labels[0]);
  for (int t = 1; t <= cfg.steps; ++t) {
    const auto start = Clock::now();
    const auto est = filter.advance(one, labels[static_cast<std::size_t>(t) * s]);
    const double ms = cfg.timing ? elapsed_ms(start) : 0.0;
    if (!est) continue;
    record_field(out, field, t, truth[static_cast<std::size_t>(t - N + 1) * s], est->states[1], ms);
  }
  out.failures = filter.failures();
  return out;
}

TrialOutput fast_trial(const ScenarioConfig& cfg, const FieldSetup& field, int index) {
  const auto truth = field_truth(cfg, field, index);
  const auto labels = field_labels(cfg, field, truth, index);
  const int N = cfg.horizon;
  const int m = field.filter_model.m();
  const auto p = field.filter_rows.size();

  std::vector<BinarySensor> sensors;  // local filters see the full concentration
  for (std::size_t i = 0; i < p; ++i) {
    BinarySensor bs;
    bs.row = field.filter_rows[i].C;
    bs.threshold = field.thresholds[i];
    bs.noise_variance = cfg.noise_variance;
    sensors.push_back(std::move(bs));
  }
  fast::FastFilterOptions fo;
  fo.local = fast::LocalModel::make(cfg.local_order, cfg.truth_dt, cfg.local_q, cfg.local_arrival);
  fo.local_horizon = cfg.local_horizon;
  fo.horizon = N;
  fo.aggregation = cfg.aggregation;
  if (cfg.xi > 0.0) fo.Xi.assign(p, cfg.xi);
  fo.threads = 1;
  const double arrival = cfg.arrival > 0.0 ? cfg.arrival : cfg.prior_p;
  fast::GlobalWeights gw{arrival * Matrix::Identity(m, m), cfg.prior_g * Matrix::Identity(m, m)};
  fast::FastMhMapFilter filter(field.filter_model, field.filter_rows, sensors, field.filter_ops.gamma_bc, gw,
                               Vector::Constant(m, cfg.initial_guess), fo);

  TrialOutput out;
  const int stride = field.stride;
  double window_ms = 0.0;
  for (int s = 0; s <= cfg.steps * stride; ++s) {
    auto start = Clock::now();
    filter.local_update(labels[static_cast<std::size_t>(s)]);
    if (cfg.timing) window_ms += elapsed_ms(start);
    if (s == 0 || s % stride != 0) continue;
    start = Clock::now();
    const auto est = filter.fuse_tick();
    if (cfg.timing) window_ms += elapsed_ms(start);
    const double ms = window_ms;
    window_ms = 0.0;
    if (!est) continue;
    const int j = s / stride - 1;  // fusion tick j sits at truth step (j + 1) stride
    record_field(out, field, j, truth[static_cast<std::size_t>((j - N + 2) * stride)], est->states[1], ms);
  }
  return out;
}

}  // namespace

double RunResult::mean_rmse(std::size_t from, std::size_t to) const {
  to = std::min(to, rmse.size());
  if (from >= to) return 0.0;
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += rmse[i];
  return s / static_cast<double>(to - from);
}

double RunResult::steady_rmse() const { return mean_rmse(rmse.size() / 2, rmse.size()); }

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const int L = cfg.trials;
  std::vector<TrialOutput> trials(static_cast<std::size_t>(L));
  const bool field_kind = is_field(cfg.kind);

  StateSpaceSetup setup;
  std::vector<Matrix> powers;
  FieldSetup field;
  if (field_kind) {
    field = build_field(cfg);
  } else {
    setup = build_state_space(cfg);
    powers = matrix_powers(setup.sys.A, cfg.horizon);
  }

  parallel_for(L, cfg.threads, [&](int l) {
    auto& slot = trials[static_cast<std::size_t>(l)];
    if (!field_kind) {
      slot = state_space_trial(cfg, setup, powers, l, options);
    } else if (options.estimate) {
      slot = cfg.kind == ScenarioKind::fast_field ? fast_trial(cfg, field, l) : diffusion_trial(cfg, field, l);
    }
  });

  RunResult res;
  res.config = cfg;
  const std::size_t len = trials.front().sq_err.size();
  for (const auto& tr : trials)
    if (tr.sq_err.size() != len) throw Error("run: trials produced different numbers of estimates");
  res.steps = trials.front().steps;
  res.rmse.assign(len, 0.0);
  res.rmse_normalized.assign(len, 0.0);
  res.wall_ms.assign(len, 0.0);
  std::vector<double> truth_sum(len, 0.0);
  double rho_u = 0.0;
  res.delta_min = field_kind ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& tr : trials) {
    for (std::size_t k = 0; k < len; ++k) {
      res.rmse[k] += tr.sq_err[k];
      truth_sum[k] += tr.sq_truth[k];
      res.wall_ms[k] += tr.wall_ms[k];
    }
    if (!field_kind) {
      res.delta_min = std::min(res.delta_min, tr.delta_min);
      res.delta_mean += tr.delta_min;
    }
    res.phi_bar = std::max(res.phi_bar, tr.phi);
    res.rho_X = std::max(res.rho_X, tr.rho_x);
    rho_u = std::max(rho_u, tr.rho_u);
    res.windows += tr.windows;
    res.failures += tr.failures;
  }
  if (!field_kind) res.delta_mean /= static_cast<double>(L);
  for (std::size_t k = 0; k < len; ++k) {
    res.rmse_normalized[k] = truth_sum[k] > 0.0 ? std::sqrt(res.rmse[k] / truth_sum[k]) : 0.0;
    res.rmse[k] = std::sqrt(res.rmse[k] / static_cast<double>(L));
    res.wall_ms[k] /= static_cast<double>(L);
  }

  if (!field_kind) {
    BoundedSets b;
    b.rho_X = res.rho_X;
    b.rho_U = rho_u;
    b.rho_W = cfg.process_noise * std::sqrt(static_cast<double>(setup.sys.n()));
    b.rho_V.assign(setup.sensors.size(), cfg.noise_bound);
    res.ledger = stability_ledger(setup.sys, setup.weights, b, res.delta_min, cfg.horizon, res.phi_bar);
  }

  if (options.keep_trials) {
    for (auto& tr : trials) {
      res.trial_sq_errors.push_back(std::move(tr.sq_err));
      res.trial_sq_truth.push_back(std::move(tr.sq_truth));
      res.trial_p_errors.push_back(std::move(tr.p_err));
    }
  }
  if (options.estimate && static_cast<double>(res.failures) > 0.01 * static_cast<double>(res.windows))
    throw ConvergenceFailure("run: " + std::to_string(res.failures) + " of " + std::to_string(res.windows) +
                                 " windows hit the iteration cap",
                             Vector(), static_cast<double>(res.failures) / static_cast<double>(res.windows));
  return res;
}

ScenarioConfig apply_axis(const ScenarioConfig& cfg, const std::string& axis, double value) {
  ScenarioConfig c = cfg;
  if (axis == "N") {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError("sweep: N values must be positive integers");
    c.horizon = static_cast<int>(value);
  } else if (axis == "tau") {
    c.thresholds.assign(c.thresholds.size(), value);
  } else if (axis == "r") {
    if (!(value > 0.0)) throw ConfigError("sweep: r values must be positive");
    if (is_field(c.kind))
      c.noise_variance = value;
    else
      c.weight_r = value;
  } else if (axis == "gamma") {
    if (c.kind != ScenarioKind::oscillator_network) throw ConfigError("sweep: gamma applies to the network only");
    c.coupling = value;
  } else {
    throw ConfigError("sweep: unknown axis '" + axis + "' (N, tau, r, gamma)");
  }
  c.validate();
  return c;
}

std::vector<SweepPoint> sweep(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& grid,
                              const RunOptions& options) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  std::vector<SweepPoint> out;
  for (double v : grid) {
    const RunResult r = run_scenario(apply_axis(cfg, axis, v), options);
    SweepPoint pt;
    pt.value = v;
    pt.delta_min = r.delta_min;
    pt.delta_mean = r.delta_mean;
    pt.mean_rmse = r.mean_rmse(0, r.rmse.size());
    pt.steady_rmse = r.steady_rmse();
    if (!r.rmse.empty()) {
      pt.final_rmse = r.rmse.back();
      pt.final_normalized = r.rmse_normalized.back();
    }
    if (r.ledger) {
      pt.a1 = r.ledger->a1;
      pt.e_inf = r.ledger->e_inf;
    }
    pt.failures = r.failures;
    out.push_back(pt);
  }
  return out;
}

std::vector<SweepPoint> noise_assisted_sweep(const ScenarioConfig& cfg, const std::vector<double>& r_grid,
                                             int trials) {
  if (r_grid.size() < 3) throw ConfigError("noise sweep: need at least 3 values of r");
  for (double r : r_grid)
    if (!(r > 0.0)) throw ConfigError("noise sweep: r values must be positive");
  ScenarioConfig c = cfg;
  c.trials = trials;
  return sweep(c, "r", r_grid);
}

std::vector<TimingRow> timing_report(const ScenarioConfig& cfg, const std::vector<int>& horizons,
                                     const std::vector<EstimatorKind>& estimators) {
  std::vector<TimingRow> rows;
  for (EstimatorKind e : estimators) {
    for (int N : horizons) {
      ScenarioConfig c = cfg;
      c.estimator = e;
      c.horizon = N;
      c.trials = 1;
      c.threads = 1;
      c.timing = true;
      c.antithetic = false;
      c.validate();
      const RunResult r = run_scenario(c);
      TimingRow row;
      row.estimator = to_string(e);
      row.N = N;
      row.windows = r.windows;
      double total = 0.0;
      for (double ms : r.wall_ms) total += ms;
      row.seconds_per_iteration = r.wall_ms.empty() ? 0.0 : total / 1000.0 / static_cast<double>(r.wall_ms.size());
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace bms::bench
