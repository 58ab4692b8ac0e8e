#include "bms/bench/config.hpp"

#include "bms/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace bms::bench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (trim(v.substr(used)).empty()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma separated list");
  return out;
}

std::string fmt(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define BMS_REAL(k, member) \
  Field{k, [](ScenarioConfig& c, const std::string& v) { c.member = to_double(k, v); }, \
        [](const ScenarioConfig& c) { return fmt(c.member); }}
#define BMS_INT(k, member) \
  Field{k, [](ScenarioConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>(to_integer(k, v)); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }}
#define BMS_BOOL(k, member) \
  Field{k, [](ScenarioConfig& c, const std::string& v) { c.member = to_bool(k, v); }, \
        [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define BMS_TEXT(k, member) \
  Field{k, [](ScenarioConfig& c, const std::string& v) { c.member = v; }, \
        [](const ScenarioConfig& c) { return c.member; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"scenario.kind", [](ScenarioConfig& c, const std::string& v) { c.kind = parse_scenario_kind(v); },
            [](const ScenarioConfig& c) { return to_string(c.kind); }},
      Field{"scenario.estimator",
            [](ScenarioConfig& c, const std::string& v) { c.estimator = parse_estimator_kind(v); },
            [](const ScenarioConfig& c) { return to_string(c.estimator); }},
      BMS_INT("scenario.horizon", horizon),
      BMS_INT("scenario.steps", steps),
      BMS_INT("scenario.trials", trials),
      BMS_INT("scenario.seed", seed),
      BMS_INT("scenario.threads", threads),
      BMS_BOOL("scenario.timing", timing),
      BMS_BOOL("scenario.antithetic", antithetic),
      BMS_REAL("scenario.ts", ts),
      BMS_REAL("weights.p", weight_p),
      BMS_REAL("weights.q", weight_q),
      BMS_REAL("weights.r", weight_r),
      BMS_REAL("priors.p", prior_p),
      BMS_REAL("priors.g", prior_g),
      BMS_REAL("priors.arrival", arrival),
      Field{"sensors.thresholds",
            [](ScenarioConfig& c, const std::string& v) { c.thresholds = to_list("sensors.thresholds", v); },
            [](const ScenarioConfig& c) { return fmt_list(c.thresholds); }},
      BMS_REAL("sensors.noise_bound", noise_bound),
      BMS_REAL("sensors.noise_variance", noise_variance),
      BMS_INT("sensors.count", sensor_count),
      BMS_INT("sensors.constellation_seed", constellation_seed),
      BMS_REAL("model.process_noise", process_noise),
      BMS_REAL("model.initial_spread", initial_spread),
      BMS_REAL("hydraulic.c1", tank_c1),
      BMS_REAL("hydraulic.c2", tank_c2),
      BMS_REAL("hydraulic.r1", tank_r1),
      BMS_REAL("hydraulic.r2", tank_r2),
      BMS_REAL("hydraulic.lf", tank_lf),
      BMS_REAL("hydraulic.s", tank_s),
      BMS_INT("network.size", network_size),
      BMS_REAL("network.gamma", coupling),
      BMS_REAL("field.diffusivity", diffusivity),
      BMS_REAL("field.boundary_value", boundary_value),
      BMS_REAL("field.truth_dt", truth_dt),
      BMS_REAL("field.filter_dt", filter_dt),
      BMS_TEXT("field.truth_mesh", truth_mesh),
      BMS_TEXT("field.filter_mesh", filter_mesh),
      BMS_TEXT("field.mesh_file", mesh_file),
      BMS_REAL("field.initial_guess", initial_guess),
      BMS_REAL("field.process_noise", field_process_noise),
      BMS_INT("field.probes", probe_count),
      BMS_INT("fast.order", local_order),
      BMS_INT("fast.local_horizon", local_horizon),
      BMS_REAL("fast.local_q", local_q),
      BMS_REAL("fast.local_arrival", local_arrival),
      BMS_INT("fast.aggregation", aggregation),
      BMS_REAL("fast.xi", xi),
      BMS_TEXT("sweep.axis", sweep_axis),
      BMS_TEXT("sweep.grid", sweep_grid),
  };
  return table;
}

#undef BMS_REAL
#undef BMS_INT
#undef BMS_BOOL
#undef BMS_TEXT

}  // namespace

IniFile IniFile::parse(std::istream& in, const std::string& origin) {
  IniFile ini;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    ini.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  return parse(f, path);
}

std::optional<std::string> IniFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::hydraulic: return "hydraulic";
    case ScenarioKind::oscillator: return "oscillator";
    case ScenarioKind::oscillator_network: return "oscillator-network";
    case ScenarioKind::diffusion_field: return "diffusion-field";
    case ScenarioKind::fast_field: return "fast-field";
  }
  return "?";
}

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::lsmhe: return "lsmhe";
    case EstimatorKind::pwmhe: return "pwmhe";
    case EstimatorKind::pwmhe_constrained: return "pwmhe-constrained";
    case EstimatorKind::mhmap: return "mhmap";
    case EstimatorKind::fast_mhmap: return "fast-mhmap";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& s) {
  for (auto k : {ScenarioKind::hydraulic, ScenarioKind::oscillator, ScenarioKind::oscillator_network,
                 ScenarioKind::diffusion_field, ScenarioKind::fast_field})
    if (to_string(k) == s) return k;
  throw ConfigError("config: unknown scenario kind '" + s + "'");
}

EstimatorKind parse_estimator_kind(const std::string& s) {
  for (auto k : {EstimatorKind::lsmhe, EstimatorKind::pwmhe, EstimatorKind::pwmhe_constrained, EstimatorKind::mhmap,
                 EstimatorKind::fast_mhmap})
    if (to_string(k) == s) return k;
  throw ConfigError("config: unknown estimator '" + s + "'");
}

bool is_field(ScenarioKind k) { return k == ScenarioKind::diffusion_field || k == ScenarioKind::fast_field; }

bool is_deterministic(EstimatorKind k) {
  return k == EstimatorKind::lsmhe || k == EstimatorKind::pwmhe || k == EstimatorKind::pwmhe_constrained;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (horizon < 1) fail("horizon must be at least 1");
  if (steps <= horizon) fail("steps must exceed the horizon");
  if (trials < 1) fail("trials must be at least 1");
  if (antithetic && kind != ScenarioKind::oscillator) fail("antithetic pairing applies to the oscillator only");
  if (is_field(kind)) {
    if (is_deterministic(estimator)) fail("field scenarios need the mhmap or fast-mhmap estimator");
    if (kind == ScenarioKind::diffusion_field && estimator != EstimatorKind::mhmap)
      fail("diffusion-field runs the mhmap estimator");
    if (sensor_count < 1) fail("sensors.count must be positive");
    if (!(noise_variance > 0.0)) fail("sensors.noise_variance must be positive");
    if (!(diffusivity > 0.0) || !(truth_dt > 0.0) || !(filter_dt > 0.0)) fail("field rates must be positive");
    const double ratio = filter_dt / truth_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) fail("filter_dt must be a multiple of truth_dt");
    if (!(prior_p > 0.0) || !(prior_g > 0.0)) fail("priors must be positive");
    for (const auto& m : {truth_mesh, filter_mesh})
      if (m != "coarse" && m != "fine") fail("meshes are 'coarse' or 'fine'");
    if (probe_count < 1) fail("field.probes must be positive");
    if (estimator == EstimatorKind::fast_mhmap) {
      if (local_order != 0 && local_order != 1) fail("fast.order must be 0 or 1");
      if (local_horizon < 1 || local_horizon > aggregation) fail("fast.local_horizon must be in [1, aggregation]");
      if (std::abs(ratio - aggregation) > 1e-9) fail("fast.aggregation must equal filter_dt / truth_dt");
      if (!(local_q > 0.0) || !(local_arrival > 0.0) || xi < 0.0) fail("fast filter weights must be positive");
    }
  } else {
    if (!is_deterministic(estimator)) fail("state-space scenarios run lsmhe, pwmhe or pwmhe-constrained");
    if (!(weight_p > 0.0) || !(weight_q > 0.0) || !(weight_r > 0.0)) fail("weights must be positive");
    if (noise_bound < 0.0 || process_noise < 0.0) fail("noise bounds must be nonnegative");
    if (!(ts > 0.0)) fail("scenario.ts must be positive");
    const std::size_t p = kind == ScenarioKind::oscillator_network ? static_cast<std::size_t>(network_size) : 1;
    if (thresholds.size() != 1 && thresholds.size() != p) fail("need one threshold or one per sensor");
    if (kind == ScenarioKind::oscillator_network && (network_size < 1 || coupling < 0.0))
      fail("network size must be positive and gamma nonnegative");
  }
}

ScenarioConfig scenario_preset(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  switch (kind) {
    case ScenarioKind::hydraulic:
      c.estimator = EstimatorKind::pwmhe;
      c.horizon = 5;
      c.steps = 800;
      c.trials = 20;
      c.ts = 0.01;
      c.thresholds = {0.17};
      c.noise_bound = 1e-2;
      c.process_noise = 1e-2;
      c.weight_p = 1e6;
      c.weight_q = 1e-8;
      c.weight_r = 1e6;
      c.antithetic = false;
      break;
    case ScenarioKind::oscillator:
      break;
    case ScenarioKind::oscillator_network:
      c.horizon = 50;
      c.steps = 350;
      c.trials = 10;
      c.thresholds = {0.5, 0.2, -0.5, -0.8, -0.2, 0.3};
      c.antithetic = false;
      break;
    case ScenarioKind::diffusion_field:
      c.estimator = EstimatorKind::mhmap;
      c.horizon = 5;
      c.steps = 120;
      c.trials = 20;
      c.noise_variance = 1.0;
      c.antithetic = false;
      break;
    case ScenarioKind::fast_field:
      c.estimator = EstimatorKind::fast_mhmap;
      c.horizon = 5;
      c.steps = 120;
      c.trials = 5;
      c.sensor_count = 10;
      c.noise_variance = 1.0;
      c.antithetic = false;
      break;
  }
  return c;
}

ScenarioConfig load_config(const IniFile& ini) {
  ScenarioKind kind = ScenarioKind::oscillator;
  if (auto k = ini.get("scenario.kind")) kind = parse_scenario_kind(*k);
  ScenarioConfig c = scenario_preset(kind);
  for (const auto& [key, value] : ini.values()) {
    bool known = false;
    for (const Field& f : fields())
      if (f.key == key) {
        f.set(c, value);
        known = true;
        break;
      }
    if (!known) throw ConfigError("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ScenarioConfig load_config_file(const std::string& path) { return load_config(IniFile::load(path)); }

std::string to_ini(const ScenarioConfig& cfg) {
  std::string out, section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("grid: empty value");
  if (s.find(':') == std::string::npos) return to_list("grid", s);
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(to_double("grid", trim(item)));
  if (parts.size() != 3) throw ConfigError("grid: expected a:b:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || b < a) throw ConfigError("grid: need a <= b and step > 0");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    double v = a + static_cast<double>(i) * step;
    if (std::abs(v) < 1e-12 * step) v = 0.0;
    out.push_back(v);
  }
  return out;
}

}  // namespace bms::bench
