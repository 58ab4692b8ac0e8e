#pragma once

#include "bms/linalg.hpp"
#include "bms/tolerances.hpp"

#include <functional>
#include <string>

namespace bms {

enum class SolveStatus { converged, iteration_cap, conditioning };
std::string to_string(SolveStatus s);

struct SolveReport {
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;  // infinity norm of the final (projected) gradient
  double tolerance = 0.0;      // threshold that gradient_norm was tested against
  SolveStatus status = SolveStatus::converged;
  double wall_seconds = 0.0;
};

// Returns f(x) and writes the gradient into *grad when grad is non-null.
using Objective = std::function<double(const Vector& x, Vector* grad)>;
using Projection = std::function<Vector(const Vector& x)>;
// Given the current iterate, returns v -> H(x)^{-1} v for some SPD model H.
using InverseCurvature = std::function<Vector(const Vector& v)>;
using CurvatureModel = std::function<InverseCurvature(const Vector& x)>;

struct QuasiNewtonOptions {
  double tolerance = tol::kOptimize;  // absolute, on the gradient inf-norm
  double relative_tolerance = 0.0;    // added: rel * ||g0||_inf
  int max_iterations = 500;
  int memory = 8;                     // L-BFGS pairs; 0 with a curvature model is plain Newton
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  SolveReport report;
};

// Limited-memory quasi-Newton with Armijo backtracking (step halving).
// `projection`, when given, maps onto a closed convex set and every iterate is
// feasible. `curvature`, when given, replaces the scaled identity as the
// initial inverse Hessian of the two-loop recursion.
MinimizeResult quasi_newton_min(const Objective& f, Vector x0, const QuasiNewtonOptions& options = {},
                                const Projection& projection = {}, const CurvatureModel& curvature = {});

// Same, but throws ConvergenceFailure unless the report says converged.
MinimizeResult quasi_newton_min_or_throw(const Objective& f, Vector x0, const QuasiNewtonOptions& options = {},
                                         const Projection& projection = {},
                                         const CurvatureModel& curvature = {});

Projection box_projection(Vector lower, Vector upper);

}  // namespace bms
