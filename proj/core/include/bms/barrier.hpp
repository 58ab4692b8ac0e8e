#pragma once

#include "bms/optimize.hpp"

#include <functional>
#include <optional>

namespace bms {

struct BarrierOptions {
  double initial_mu = 1.0;
  double mu_factor = 0.1;        // mu <- mu * factor after each centering
  double gap_tolerance = 1e-10;  // stop once (constraints) * mu falls below this
  int max_outer = 60;
  int max_newton = 100;
};

struct BarrierResult {
  Vector x;
  Vector multipliers;         // mu / slack at the final centering
  double kkt_residual = 0.0;  // ||grad f + G' lambda||_inf
  double duality_gap = 0.0;   // constraints * mu
  SolveReport report;         // iterations = total Newton steps
};

using HessianFn = std::function<Matrix(const Vector& x)>;

// Minimizes a convex f subject to G x <= h with a log barrier and damped
// Newton centering steps. `hessian` may be a generalized Hessian for C^1
// piecewise-quadratic f. Without a strictly feasible x0 a phase-1 problem is
// solved first.
BarrierResult barrier_minimize(const Objective& f, const HessianFn& hessian, const Matrix& G, const Vector& h,
                               const std::optional<Vector>& x0 = std::nullopt,
                               const BarrierOptions& options = {});

// 1/2 x'Hx + f'x  s.t.  G x <= h
BarrierResult barrier_qp(const Matrix& H, const Vector& f, const Matrix& G, const Vector& h,
                         const std::optional<Vector>& x0 = std::nullopt, const BarrierOptions& options = {});

// Strictly feasible point for G x < h near `hint`; throws InfeasibleProblem
// when the phase-1 optimum is nonnegative.
Vector phase_one(const Matrix& G, const Vector& h, const Vector& hint);

// Rows for lower <= x <= upper in the G x <= h form.
std::pair<Matrix, Vector> box_rows(const Vector& lower, const Vector& upper);

}  // namespace bms
