#pragma once

#include "bms/bench/runner.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bms::bench {

// "step,rmse,rmse_normalized,wall_ms" then one row per reported step.
void write_rmse_csv(const RunResult& result, std::ostream& out);
// "key = value" lines.
void write_summary(const RunResult& result, std::ostream& out);
void write_ledger(const StabilityLedger& ledger, std::ostream& out);
void write_sweep_csv(const std::string& axis, const std::vector<SweepPoint>& points, std::ostream& out);
void write_timing(const std::vector<TimingRow>& rows, std::ostream& out);

// rmse.csv, summary.txt and (deterministic kinds) ledger.txt under out_dir,
// which is created if needed. I/O failures throw Error with the OS message.
void emit(const RunResult& result, const std::string& out_dir);
void emit_text(const std::string& path, const std::string& text);

}  // namespace bms::bench
