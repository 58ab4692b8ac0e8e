#pragma once

// One place for the numeric tolerances used across the library and tests.
namespace bms::tol {

inline constexpr double kSolve = 1e-10;     // linear solves, residual checks
inline constexpr double kOptimize = 1e-8;   // gradient / KKT stopping
inline constexpr double kProperty = 1e-6;   // property tests, finite differences

// Margin used to turn the strict sign constraints into non-strict rows.
inline constexpr double kConstraintMargin = 1e-9;

}  // namespace bms::tol
