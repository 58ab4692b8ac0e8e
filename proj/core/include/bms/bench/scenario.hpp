#pragma once

#include "bms/bench/config.hpp"
#include "bms/fem_field.hpp"
#include "bms/fem_mesh.hpp"
#include "bms/lti_model.hpp"
#include "bms/mhe_det.hpp"
#include "bms/mhe_map.hpp"

#include <cstdint>
#include <vector>

namespace bms::bench {

// Hydraulic, oscillator and network kinds.
struct StateSpaceSetup {
  LinearSystem sys;
  std::vector<BinarySensor> sensors;
  MheWeights weights;
  Vector nominal_x0;  // centre of the truth / prior draws
};

LinearSystem hydraulic_system(const ScenarioConfig& cfg);
LinearSystem oscillator_system(double ts);
double oscillator_frequency();  // slow mode of the 2-mass chain, rad/s
StateSpaceSetup build_state_space(const ScenarioConfig& cfg);

// One simulated realization: x_0..x_T, u_0..u_{T-1}, labels y_0..y_T (+1/-1),
// and the prior handed to the estimator.
struct Trajectory {
  std::vector<Vector> x;
  std::vector<Vector> u;
  std::vector<Labels> y;
  Vector prior;
};

// Trial `index` of a run. With cfg.antithetic, trials 2j and 2j+1 share their
// random numbers and the odd one uses phase + pi and negated sensor noise.
Trajectory simulate_trial(const ScenarioConfig& cfg, const StateSpaceSetup& setup, int index);

// Field kinds: fine truth, coarse filter, a fixed sensor constellation and
// probe points shared by both meshes.
struct FieldSetup {
  fem::TriMesh truth_mesh, filter_mesh;
  fem::FemOperators truth_ops, filter_ops;
  fem::FieldModel truth_model;   // at truth_dt
  fem::FieldModel filter_model;  // at filter_dt
  std::vector<fem::Point> sensor_points;
  std::vector<double> thresholds;
  std::vector<fem::SensorRow> truth_rows, filter_rows;
  std::vector<fem::Point> probes;
  std::vector<fem::SensorRow> truth_probes, filter_probes;
  int stride = 1;  // truth steps per filter tick

  // Filter-side sensors: coarse rows, thresholds shifted by the Dirichlet offset.
  std::vector<BinarySensor> filter_sensors(double variance) const;
  LinearSystem filter_system() const;
  GaussianPriors priors(const ScenarioConfig& cfg) const;
  // Probe values of a truth / filter state, boundary contribution included.
  Vector truth_field(const Vector& x) const;
  Vector filter_field(const Vector& x) const;
};

fem::TriMesh preset_mesh(const std::string& name);
FieldSetup build_field(const ScenarioConfig& cfg);

// Uniform points inside the L-shape by rejection.
std::vector<fem::Point> random_points(std::uint64_t seed, int count);

// Truth field x_0..x_{ticks * stride} (zero initial field).
std::vector<Vector> field_truth(const ScenarioConfig& cfg, const FieldSetup& field, int trial);
// Binary labels (0/1) of every truth sample; noise variance cfg.noise_variance
// times a standard normal drawn from the trial's stream.
std::vector<Labels> field_labels(const ScenarioConfig& cfg, const FieldSetup& field, const std::vector<Vector>& truth,
                                 int trial);

}  // namespace bms::bench
