#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bms::bench {

// Flat INI text: "[section]" headers, "key = value" lines, '#' or ';'
// comments. Keys are stored as "section.key".
class IniFile {
 public:
  static IniFile parse(std::istream& in, const std::string& origin = "<config>");
  static IniFile load(const std::string& path);

  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class ScenarioKind { hydraulic, oscillator, oscillator_network, diffusion_field, fast_field };
enum class EstimatorKind { lsmhe, pwmhe, pwmhe_constrained, mhmap, fast_mhmap };

std::string to_string(ScenarioKind k);
std::string to_string(EstimatorKind k);
ScenarioKind parse_scenario_kind(const std::string& s);
EstimatorKind parse_estimator_kind(const std::string& s);
bool is_field(ScenarioKind k);
bool is_deterministic(EstimatorKind k);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::oscillator;
  EstimatorKind estimator = EstimatorKind::pwmhe;
  int horizon = 100;  // N
  int steps = 500;
  int trials = 100;
  std::uint64_t seed = 1;
  int threads = 0;
  bool timing = false;
  bool antithetic = true;  // oscillator: pair trials (phase, noise) with (phase + pi, -noise)

  // deterministic weights: P = p I, Q = q I, R^i = r
  double weight_p = 1e-5;
  double weight_q = 1.0;
  double weight_r = 1.0;

  // probabilistic priors: P = prior_p I, G = prior_g I, Psi = P unless arrival > 0
  double prior_p = 1e3;
  double prior_g = 1e2;
  double arrival = 0.0;

  std::vector<double> thresholds{0.5};
  double noise_bound = 0.05;    // deterministic sensor noise, uniform on [-b, b]
  double noise_variance = 1.0;  // probabilistic sensor noise
  double process_noise = 0.0;   // uniform bound per component (deterministic kinds)
  double initial_spread = 5.0;  // oscillator prior U[-s, s]^n; network truth nominal + U[-s, s]^n

  // hydraulic
  double tank_c1 = 0.05, tank_c2 = 0.01, tank_r1 = 2.0, tank_r2 = 15.0, tank_lf = 2.0, tank_s = 1.0;
  double ts = 0.1;

  // network
  int network_size = 6;
  double coupling = 0.02;

  // field
  int sensor_count = 20;
  std::uint64_t constellation_seed = 7;
  double diffusivity = 0.01;
  double boundary_value = 30.0;
  double truth_dt = 1.0;
  double filter_dt = 10.0;
  std::string truth_mesh = "fine";
  std::string filter_mesh = "coarse";
  std::string mesh_file;  // optional filter mesh override
  double initial_guess = 5.0;
  double field_process_noise = 0.0;  // Gaussian sd per truth step
  int probe_count = 304;

  // fast filter
  int local_order = 0;
  int local_horizon = 10;
  double local_q = 0.5;
  double local_arrival = 1e-2;
  int aggregation = 10;
  double xi = 0.0;  // 0: 1 / r_i

  // sweep
  std::string sweep_axis;
  std::string sweep_grid;

  void validate() const;  // throws ConfigError
};

ScenarioConfig scenario_preset(ScenarioKind kind);
// Preset of the file's scenario.kind, overridden by every other key. Unknown
// keys are a ConfigError.
ScenarioConfig load_config(const IniFile& ini);
ScenarioConfig load_config_file(const std::string& path);
std::string to_ini(const ScenarioConfig& cfg);

// "a:b:step" (inclusive, tolerant to rounding) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& text);

}  // namespace bms::bench
