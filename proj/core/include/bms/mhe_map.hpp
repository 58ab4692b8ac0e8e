#pragma once

#include "bms/block_tridiagonal.hpp"
#include "bms/lti_model.hpp"
#include "bms/optimize.hpp"
#include "bms/window_filter.hpp"

#include <optional>

namespace bms {

// Gaussian model data for the MAP estimator. The per-sensor variances r_i are
// carried by BinarySensor::noise_variance.
struct GaussianPriors {
  Vector x0_mean;  // x_bar_0
  Matrix P;        // inverse covariance of x_0
  Matrix G;        // inverse covariance of w
  Matrix Psi;      // arrival-cost weight; empty means P

  const Matrix& arrival() const { return Psi.size() ? Psi : P; }
  void validate(int n) const;  // throws WeightError
};

// p(y | x) for y in {0,1}: P(C x + v >= tau) with v ~ N(0, r).
double sensor_probability(const BinarySensor& sensor, const Vector& x, int y);
// log p(y | x); adds its gradient into *grad when given.
double sensor_loglik(const BinarySensor& sensor, const Vector& x, int y, Vector* grad = nullptr);
// -d^2/dx^2 log p(y | x) = kappa * C'C / r; returns kappa in [0, 1].
double sensor_curvature(const BinarySensor& sensor, const Vector& x, int y);

// ||x_0 - x_bar||_Psi^2 + sum ||x_{k+1} - A x_k - B u_k||_G^2 - sum_{k,i} log p(y_k^i | x_k)
// over X = [x_{t-N}; ...; x_t]; window outputs in {0,1}.
double map_cost_grad(const LinearSystem& sys, const std::vector<BinarySensor>& sensors, const GaussianPriors& priors,
                     const MheWindow& window, const Vector& X, Vector* grad);
BlockTridiagonal map_hessian(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                             const GaussianPriors& priors, const MheWindow& window, const Vector& X);

struct MapOptions {
  // memory 0: damped Newton on the exact Hessian
  QuasiNewtonOptions qn{tol::kOptimize, 0.0, 500, 0, 1e-4, 60};
  bool newton = true;
  // MapFilter only: keep the last iterate of a capped window and count it
  bool tolerate_failures = false;
};

WindowEstimate solve_mh_map(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                            const GaussianPriors& priors, const MheWindow& window,
                            const std::optional<Vector>& warm_start = std::nullopt, const MapOptions& options = {});

// x_bar for the next window is the second estimate of this one.
class MapFilter : public WindowFilter {
 public:
  MapFilter(LinearSystem sys, std::vector<BinarySensor> sensors, GaussianPriors priors, int N,
            MapOptions options = {});

  void begin(const Labels& y0) override;
  std::optional<WindowEstimate> advance(const Vector& u_prev, const Labels& y) override;
  int horizon() const override { return N_; }
  const Vector& prediction() const { return prediction_; }
  long failures() const { return failures_; }

 private:
  LinearSystem sys_;
  std::vector<BinarySensor> sensors_;
  GaussianPriors priors_;
  int N_;
  MapOptions options_;
  Vector prediction_;
  WindowBuffer buffer_;
  std::optional<Vector> warm_;
  long failures_ = 0;
};

}  // namespace bms
