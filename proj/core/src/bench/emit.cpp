#include "bms/bench/emit.hpp"

#include "bms/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bms::bench {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_rmse_csv(const RunResult& r, std::ostream& out) {
  out << "step,rmse,rmse_normalized,wall_ms\n";
  for (std::size_t k = 0; k < r.rmse.size(); ++k)
    out << r.steps[k] << ',' << num(r.rmse[k]) << ',' << num(r.rmse_normalized[k]) << ',' << num(r.wall_ms[k])
        << '\n';
}

void write_summary(const RunResult& r, std::ostream& out) {
  const auto& c = r.config;
  out << "scenario = " << to_string(c.kind) << '\n'
      << "estimator = " << to_string(c.estimator) << '\n'
      << "horizon = " << c.horizon << '\n'
      << "steps = " << c.steps << '\n'
      << "trials = " << c.trials << '\n'
      << "seed = " << c.seed << '\n'
      << "windows = " << r.windows << '\n'
      << "failures = " << r.failures << '\n';
  if (!r.rmse.empty()) {
    out << "rmse_initial = " << num(r.rmse.front()) << '\n'
        << "rmse_final = " << num(r.rmse.back()) << '\n'
        << "rmse_normalized_initial = " << num(r.rmse_normalized.front()) << '\n'
        << "rmse_normalized_final = " << num(r.rmse_normalized.back()) << '\n'
        << "rmse_mean = " << num(r.mean_rmse(0, r.rmse.size())) << '\n'
        << "rmse_steady = " << num(r.steady_rmse()) << '\n';
  }
  if (!is_field(c.kind)) {
    out << "delta_min = " << num(r.delta_min) << '\n'
        << "delta_mean = " << num(r.delta_mean) << '\n'
        << "phi_bar = " << num(r.phi_bar) << '\n';
  }
  if (r.ledger) {
    out << "a1 = " << num(r.ledger->a1) << '\n' << "a2 = " << num(r.ledger->a2) << '\n';
    out << "e_inf = " << (r.ledger->e_inf ? num(*r.ledger->e_inf) : std::string("unavailable")) << '\n';
  }
}

void write_ledger(const StabilityLedger& L, std::ostream& out) {
  const std::pair<const char*, double> rows[] = {
      {"a1", L.a1}, {"a2", L.a2}, {"b1", L.b1}, {"b2", L.b2}, {"c1", L.c1}, {"c2", L.c2},
      {"c3", L.c3}, {"c4", L.c4}, {"d1", L.d1}, {"d2", L.d2}, {"L_bar", L.L_bar}, {"C_bar", L.C_bar},
      {"phi_bar", L.phi_bar}, {"delta", L.delta}, {"norm_A", L.norm_A}, {"R_max", L.R_max}, {"R_min", L.R_min},
      {"lambda_P_max", L.lambda_P_max}, {"lambda_P_min", L.lambda_P_min}, {"lambda_Q_max", L.lambda_Q_max},
      {"lambda_Q_min", L.lambda_Q_min}};
  for (const auto& [k, v] : rows) out << k << " = " << num(v) << '\n';
  out << "e_inf = " << (L.e_inf ? num(*L.e_inf) : std::string("unavailable")) << '\n';
}

void write_sweep_csv(const std::string& axis, const std::vector<SweepPoint>& points, std::ostream& out) {
  out << axis << ",delta_min,delta_mean,rmse_mean,rmse_steady,rmse_final,rmse_normalized_final,a1,e_inf,failures\n";
  for (const auto& p : points)
    out << num(p.value) << ',' << num(p.delta_min) << ',' << num(p.delta_mean) << ',' << num(p.mean_rmse) << ','
        << num(p.steady_rmse) << ',' << num(p.final_rmse) << ',' << num(p.final_normalized) << ',' << num(p.a1)
        << ',' << (p.e_inf ? num(*p.e_inf) : std::string()) << ',' << p.failures << '\n';
}

void write_timing(const std::vector<TimingRow>& rows, std::ostream& out) {
  out << "estimator,N,seconds_per_iteration,windows\n";
  for (const auto& r : rows) out << r.estimator << ',' << r.N << ',' << num(r.seconds_per_iteration) << ',' << r.windows << '\n';
}

void emit_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("emit: cannot open " + path + ": " + std::strerror(errno));
  f << text;
  f.close();
  if (!f) throw Error("emit: write failed for " + path + ": " + std::strerror(errno));
}

void emit(const RunResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("emit: cannot create " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);
  std::ostringstream csv, summary;
  write_rmse_csv(result, csv);
  write_summary(result, summary);
  emit_text((dir / "rmse.csv").string(), csv.str());
  emit_text((dir / "summary.txt").string(), summary.str());
  if (result.ledger) {
    std::ostringstream ledger;
    write_ledger(*result.ledger, ledger);
    emit_text((dir / "ledger.txt").string(), ledger.str());
  }
}

}  // namespace bms::bench
