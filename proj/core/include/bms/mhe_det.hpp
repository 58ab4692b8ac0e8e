#pragma once

#include "bms/block_tridiagonal.hpp"
#include "bms/lti_model.hpp"
#include "bms/optimize.hpp"
#include "bms/window_filter.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace bms {

struct MheWeights {
  Matrix P;  // arrival weight
  Matrix Q;  // dynamics weight
  Vector R;  // one per sensor

  void validate(int n, int p) const;  // throws WeightError
};

// J(Y) = Y'MY - 2Y'D + r over Y = [x_{t-N}; ...; x_t].
struct QuadraticForm {
  BlockTridiagonal M;
  Vector D;
  double r = 0.0;

  int n() const { return M.block_size(); }
  int N() const { return M.blocks() - 1; }
  double evaluate(const Vector& Y) const;
  Vector gradient(const Vector& Y) const;  // 2(MY - D)
};

// With include_switchings = false the sensor terms are dropped and the form is
// the pure prediction + dynamics quadratic.
QuadraticForm assemble_lsmhe(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                             const MheWindow& window, const MheWeights& weights, bool include_switchings = true);
WindowEstimate solve_lsmhe(const QuadraticForm& qf);

// Piecewise-quadratic cost: the sensor term is active only where the expected
// output disagrees in sign with y.
double pwmhe_cost_grad(const LinearSystem& sys, const std::vector<BinarySensor>& sensors, const MheWindow& window,
                       const MheWeights& weights, const Vector& X, Vector* grad);
// Generalized Hessian (exact on each quadratic piece).
BlockTridiagonal pwmhe_hessian(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                               const MheWindow& window, const MheWeights& weights, const Vector& X);

// Gamma X <= gamma - margin; rows ordered sensor-major, time-minor over the
// N+1 samples of the window.
struct ConstraintPolyhedron {
  Matrix Gamma;
  Vector gamma;
  double margin = 0.0;

  Vector rhs() const { return gamma.array() - margin; }
  bool contains(const Vector& X, double slack = 0.0) const;
};
ConstraintPolyhedron build_constraints(const MheWindow& window, const std::vector<BinarySensor>& sensors);

struct StateBox {
  Vector lower;  // per state component, applied to every sample
  Vector upper;
};

struct PwmheOptions {
  // memory 0: pure (damped) Newton on the generalized Hessian
  QuasiNewtonOptions qn{tol::kOptimize, 0.0, 500, 0, 1e-4, 60};
  bool newton = true;  // false gives plain L-BFGS with 8 pairs
};

WindowEstimate solve_pwmhe(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                           const MheWindow& window, const MheWeights& weights,
                           const std::optional<StateBox>& box = std::nullopt,
                           const ConstraintPolyhedron* constraints = nullptr,
                           const std::optional<Vector>& warm_start = std::nullopt, const PwmheOptions& options = {});

// LSMHE quadratic under the sign polyhedron, via the barrier QP.
WindowEstimate solve_lsmhe_constrained(const QuadraticForm& qf, const ConstraintPolyhedron& constraints,
                                       const std::optional<Vector>& warm_start = std::nullopt);

// x_bar_{t-N+1} = A xhat_{t-N|t} + B u_{t-N}
Vector predict(const LinearSystem& sys, const Vector& xhat_first, const Vector& u);

enum class DetEstimator { lsmhe, pwmhe, pwmhe_constrained, lsmhe_constrained };

struct DetFilterOptions {
  DetEstimator kind = DetEstimator::pwmhe;
  std::optional<StateBox> box;
  PwmheOptions pwmhe;
  bool warm_start = true;
  // keep the last iterate of a window that hits the iteration cap and count it
  bool tolerate_failures = false;
};

class DetMheFilter : public WindowFilter {
 public:
  DetMheFilter(LinearSystem sys, std::vector<BinarySensor> sensors, MheWeights weights, int N, Vector prior,
               DetFilterOptions options = {});

  void begin(const Labels& y0) override;
  std::optional<WindowEstimate> advance(const Vector& u_prev, const Labels& y) override;
  int horizon() const override { return N_; }

  const MheWindow& last_window() const { return window_; }
  const Vector& prediction() const { return prediction_; }
  long failures() const { return failures_; }

 private:
  WindowEstimate solve(const MheWindow& w);

  LinearSystem sys_;
  std::vector<BinarySensor> sensors_;
  MheWeights weights_;
  int N_;
  DetFilterOptions options_;
  Vector prediction_;
  WindowBuffer buffer_;
  std::optional<Vector> warm_;
  MheWindow window_;
  long failures_ = 0;
};

}  // namespace bms
