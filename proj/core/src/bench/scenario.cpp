#include "bms/bench/scenario.hpp"

#include "bms/error.hpp"
#include "bms/rng.hpp"

#include <cmath>
#include <numbers>

namespace bms::bench {

namespace {

Vector uniform_vector(Rng& rng, Eigen::Index n, double bound) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = bound > 0.0 ? rng.uniform(-bound, bound) : 0.0;
  return v;
}

Vector oscillator_mode(double phase) {
  const double w = oscillator_frequency();
  const double amp = (std::sqrt(5.0) - 1.0) / 2.0;  // x1 / x2 on the slow mode
  Vector x(4);
  x << amp * std::cos(phase), -amp * w * std::sin(phase), std::cos(phase), -w * std::sin(phase);
  return x;
}

Vector oscillator_nominal() {
  Vector x(4);
  x << 0.618, 0.0, 1.0, 0.0;
  return x;
}

}  // namespace

LinearSystem hydraulic_system(const ScenarioConfig& cfg) {
  const double c1 = cfg.tank_c1, c2 = cfg.tank_c2, r1 = cfg.tank_r1, r2 = cfg.tank_r2, lf = cfg.tank_lf;
  ContinuousModel cm;
  cm.Ac = Matrix(3, 3);
  cm.Ac << 0.0, 0.0, -1.0 / c1,  //
      0.0, -1.0 / (r2 * c2), 1.0 / c2,  //
      1.0 / lf, -1.0 / lf, -r1 / lf;
  cm.Bc = Matrix::Zero(3, 1);
  cm.Bc(0, 0) = 1.0 / c1;
  cm.Ts = cfg.ts;
  LinearSystem sys = discretize(cm);
  sys.C = Matrix::Zero(1, 3);
  sys.C(0, 1) = c2 / cfg.tank_s;
  return sys;
}

LinearSystem oscillator_system(double ts) {
  ContinuousModel cm;
  cm.Ac = Matrix(4, 4);
  cm.Ac << 0, 1, 0, 0,  //
      -20, 0, 10, 0,    //
      0, 0, 0, 1,       //
      10, 0, -10, 0;
  cm.Bc = Matrix::Zero(4, 1);
  cm.Ts = ts;
  LinearSystem sys = discretize(cm);
  sys.C = Matrix::Zero(1, 4);
  sys.C(0, 2) = 1.0;
  return sys;
}

double oscillator_frequency() { return std::sqrt(15.0 - std::sqrt(125.0)); }

StateSpaceSetup build_state_space(const ScenarioConfig& cfg) {
  StateSpaceSetup s;
  switch (cfg.kind) {
    case ScenarioKind::hydraulic:
      s.sys = hydraulic_system(cfg);
      s.nominal_x0 = Vector::Constant(3, 5.0);
      break;
    case ScenarioKind::oscillator:
      s.sys = oscillator_system(cfg.ts);
      s.nominal_x0 = oscillator_nominal();
      break;
    case ScenarioKind::oscillator_network: {
      const LinearSystem single = oscillator_system(cfg.ts);
      s.sys = build_oscillator_network(single.A, ring_laplacian(cfg.network_size), cfg.coupling);
      s.nominal_x0 = Vector(4 * cfg.network_size);
      for (int q = 0; q < cfg.network_size; ++q) s.nominal_x0.segment(4 * q, 4) = oscillator_nominal();
      break;
    }
    default:
      throw ConfigError("scenario: " + to_string(cfg.kind) + " is not a state-space scenario");
  }
  const int p = s.sys.p();
  std::vector<double> tau = cfg.thresholds;
  if (tau.size() == 1) tau.assign(static_cast<std::size_t>(p), tau.front());
  if (static_cast<int>(tau.size()) != p) throw ConfigError("scenario: need one threshold per sensor");
  s.sensors = make_sensors(s.sys.C, tau, cfg.noise_bound, 1.0);
  const int n = s.sys.n();
  s.weights.P = cfg.weight_p * Matrix::Identity(n, n);
  s.weights.Q = cfg.weight_q * Matrix::Identity(n, n);
  s.weights.R = Vector::Constant(p, cfg.weight_r);
  return s;
}

Trajectory simulate_trial(const ScenarioConfig& cfg, const StateSpaceSetup& setup, int index) {
  const bool mirror = cfg.antithetic && (index % 2 == 1);
  const int stream = cfg.antithetic ? index / 2 : index;
  Rng rng(child_seed(cfg.seed, static_cast<std::uint64_t>(stream)));
  const LinearSystem& sys = setup.sys;
  const Eigen::Index n = sys.n();
  const double sign = mirror ? -1.0 : 1.0;

  Trajectory tr;
  Vector x;
  switch (cfg.kind) {
    case ScenarioKind::hydraulic:
      x = Vector(n);
      for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(0.0, 10.0);
      tr.prior = setup.nominal_x0;
      break;
    case ScenarioKind::oscillator: {
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      x = sign * oscillator_mode(phase);
      tr.prior = uniform_vector(rng, n, cfg.initial_spread);
      break;
    }
    case ScenarioKind::oscillator_network:
      x = setup.nominal_x0 + uniform_vector(rng, n, cfg.initial_spread);
      tr.prior = setup.nominal_x0;
      break;
    default:
      throw ConfigError("scenario: not a state-space scenario");
  }

  const int T = cfg.steps;
  tr.x.reserve(static_cast<std::size_t>(T) + 1);
  tr.u.reserve(static_cast<std::size_t>(T));
  tr.y.reserve(static_cast<std::size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    const Vector v = sign * uniform_vector(rng, sys.p(), cfg.noise_bound);
    tr.y.push_back(sense(setup.sensors, x, v).y);
    tr.x.push_back(x);
    if (t == T) break;
    Vector u = Vector::Zero(sys.m());
    if (cfg.kind == ScenarioKind::hydraulic)
      u(0) = 0.75 * std::sin(2.0 * std::numbers::pi * 0.5 * t * cfg.ts) + 1.0;
    const Vector w = sign * uniform_vector(rng, n, cfg.process_noise);
    x = step(sys, x, u, w);
    tr.u.push_back(std::move(u));
  }
  return tr;
}

fem::TriMesh preset_mesh(const std::string& name) {
  if (name == "coarse") return fem::generate_lshape_mesh(fem::MeshResolution::coarse());
  if (name == "fine") return fem::generate_lshape_mesh(fem::MeshResolution::fine());
  throw ConfigError("scenario: unknown mesh preset '" + name + "'");
}

std::vector<fem::Point> random_points(std::uint64_t seed, int count) {
  Rng rng(seed);
  const double side = 2.0 * fem::lshape_arm();
  std::vector<fem::Point> pts;
  pts.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(pts.size()) < count) {
    const fem::Point p(rng.uniform(0.0, side), rng.uniform(0.0, side));
    if (fem::in_lshape(p, -1e-9)) pts.push_back(p);
  }
  return pts;
}

FieldSetup build_field(const ScenarioConfig& cfg) {
  FieldSetup f;
  f.truth_mesh = preset_mesh(cfg.truth_mesh);
  f.filter_mesh = cfg.mesh_file.empty() ? preset_mesh(cfg.filter_mesh) : fem::load_mesh(cfg.mesh_file);
  f.truth_ops = fem::assemble(f.truth_mesh, cfg.diffusivity, cfg.boundary_value);
  f.filter_ops = fem::assemble(f.filter_mesh, cfg.diffusivity, cfg.boundary_value);
  f.truth_model = fem::discretize_field(f.truth_ops, cfg.truth_dt);
  f.filter_model = fem::discretize_field(f.filter_ops, cfg.filter_dt);
  f.stride = static_cast<int>(std::lround(cfg.filter_dt / cfg.truth_dt));

  f.sensor_points = random_points(cfg.constellation_seed, cfg.sensor_count);
  Rng tau_rng(child_seed(cfg.constellation_seed, 1));
  for (int i = 0; i < cfg.sensor_count; ++i) f.thresholds.push_back(tau_rng.uniform(0.05, 29.95));
  f.truth_rows = fem::sensor_rows(f.truth_mesh, f.sensor_points);
  f.filter_rows = fem::sensor_rows(f.filter_mesh, f.sensor_points);

  f.probes = random_points(child_seed(cfg.constellation_seed, 2), cfg.probe_count);
  f.truth_probes = fem::sensor_rows(f.truth_mesh, f.probes);
  f.filter_probes = fem::sensor_rows(f.filter_mesh, f.probes);
  return f;
}

std::vector<BinarySensor> FieldSetup::filter_sensors(double variance) const {
  std::vector<BinarySensor> out;
  for (std::size_t i = 0; i < filter_rows.size(); ++i) {
    BinarySensor s;
    s.row = filter_rows[i].C;
    s.threshold = thresholds[i] - filter_rows[i].D.dot(filter_ops.gamma_bc);
    s.noise_variance = variance;
    out.push_back(std::move(s));
  }
  return out;
}

LinearSystem FieldSetup::filter_system() const {
  Matrix C(static_cast<Eigen::Index>(filter_rows.size()), filter_model.m());
  for (std::size_t i = 0; i < filter_rows.size(); ++i) C.row(static_cast<Eigen::Index>(i)) = filter_rows[i].C;
  return filter_model.system(C);
}

GaussianPriors FieldSetup::priors(const ScenarioConfig& cfg) const {
  const int m = filter_model.m();
  GaussianPriors pr;
  pr.x0_mean = Vector::Constant(m, cfg.initial_guess);
  pr.P = cfg.prior_p * Matrix::Identity(m, m);
  pr.G = cfg.prior_g * Matrix::Identity(m, m);
  if (cfg.arrival > 0.0) pr.Psi = cfg.arrival * Matrix::Identity(m, m);
  return pr;
}

Vector FieldSetup::truth_field(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(truth_probes.size()));
  for (std::size_t k = 0; k < truth_probes.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = truth_probes[k].C.dot(x) + truth_probes[k].D.dot(truth_ops.gamma_bc);
  return out;
}

Vector FieldSetup::filter_field(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(filter_probes.size()));
  for (std::size_t k = 0; k < filter_probes.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = filter_probes[k].C.dot(x) + filter_probes[k].D.dot(filter_ops.gamma_bc);
  return out;
}

std::vector<Vector> field_truth(const ScenarioConfig& cfg, const FieldSetup& field, int trial) {
  const Vector x0 = Vector::Zero(field.truth_model.m());
  const int steps = cfg.steps * field.stride;
  if (cfg.field_process_noise > 0.0) {
    Rng rng(child_seed(child_seed(cfg.seed, static_cast<std::uint64_t>(trial)), 1));
    return fem::simulate_ground_truth(field.truth_model, x0, steps, cfg.field_process_noise, &rng);
  }
  return fem::simulate_ground_truth(field.truth_model, x0, steps);
}

std::vector<Labels> field_labels(const ScenarioConfig& cfg, const FieldSetup& field, const std::vector<Vector>& truth,
                                 int trial) {
  Rng rng(child_seed(child_seed(cfg.seed, static_cast<std::uint64_t>(trial)), 2));
  const double sd = std::sqrt(cfg.noise_variance);
  const auto p = static_cast<Eigen::Index>(field.truth_rows.size());
  std::vector<Labels> out;
  out.reserve(truth.size());
  for (const Vector& x : truth) {
    Labels y(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const auto& row = field.truth_rows[static_cast<std::size_t>(i)];
      const double z = row.C.dot(x) + row.D.dot(field.truth_ops.gamma_bc) + sd * rng.gaussian();
      y(i) = z >= field.thresholds[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace bms::bench
