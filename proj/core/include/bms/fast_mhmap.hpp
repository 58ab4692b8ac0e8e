#pragma once

#include "bms/block_tridiagonal.hpp"
#include "bms/fem_field.hpp"
#include "bms/fem_mesh.hpp"
#include "bms/mhe_map.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace bms::fast {

// Per-sensor surrogate dynamics for the local concentration: K = 0 keeps it
// nearly constant, K = 1 adds its rate (state [sigma, d sigma / dt]).
struct LocalModel {
  int K = 0;
  double Ts = 1.0;
  Matrix A_tilde;
  Vector C_tilde;
  Matrix G_tilde;    // inverse covariance of the local disturbance
  Matrix Psi_tilde;  // arrival weight

  // G = 1 / q (K = 0), or the inverse of the white-acceleration covariance
  // q [[Ts^3/3, Ts^2/2], [Ts^2/2, Ts]] (K = 1).
  static LocalModel make(int K, double Ts, double q, double arrival_weight);
  int dim() const { return K + 1; }
  LinearSystem system() const;
  void validate() const;
};

struct LocalEstimate {
  std::vector<Vector> chi;    // chi_{t-N|t} .. chi_{t|t}
  std::vector<double> sigma;  // C_tilde chi_k
  SolveReport report;
  int variables = 0;          // (K + 1)(N + 1)
};

// One window of the local MAP problem for a single sensor; outputs in {0,1}.
LocalEstimate local_map_step(const LocalModel& local, const BinarySensor& sensor, const std::vector<Labels>& outputs,
                             const Vector& prediction, const std::optional<Vector>& warm_start = std::nullopt);

// Pseudo-measurements for the N+1 instants of a global window.
struct PseudoMeasurementSet {
  std::vector<Vector> sigma;  // sigma[k](i)
  Vector Xi;                  // per-sensor weight; 0 drops the sensor
};

struct GlobalWeights {
  Matrix Psi;  // arrival
  Matrix Q;    // dynamics
};

// Closed-form minimizer of the step-2 quadratic
//   ||x_0 - x_bar||_Psi^2 + sum ||x_{k+1} - A x_k - b||_Q^2
//   + sum_{k,i} Xi_i (sigma_k^i - C^i x_k - D^i gamma)^2
// with one block-tridiagonal factorization per call. Precomputes the
// window-independent products once.
class GlobalFuser {
 public:
  GlobalFuser(const fem::FieldModel& model, const std::vector<fem::SensorRow>& rows, const Vector& gamma_bc,
              GlobalWeights weights);

  WindowEstimate fuse(const PseudoMeasurementSet& pseudo, const Vector& prediction) const;
  // Same quadratic as fuse(), for cross-checks.
  double cost_grad(const PseudoMeasurementSet& pseudo, const Vector& prediction, const Vector& X, Vector* grad) const;
  long factorizations() const { return factorizations_; }
  int m() const { return static_cast<int>(A_.rows()); }

 private:
  Matrix A_;
  Vector b_;
  Matrix C_;       // p x m
  Vector offset_;  // D^i gamma per sensor
  GlobalWeights w_;
  Matrix QA_, AtQA_;
  Vector Qb_, AtQb_;
  mutable long factorizations_ = 0;
};

WindowEstimate global_fuse(const fem::FieldModel& model, const std::vector<fem::SensorRow>& rows,
                           const Vector& gamma_bc, const PseudoMeasurementSet& pseudo, const Vector& prediction,
                           const GlobalWeights& weights);

struct FastFilterOptions {
  LocalModel local = LocalModel::make(0, 1.0, 0.5, 1e-2);
  int local_horizon = 10;
  int horizon = 5;
  int aggregation = 10;    // local samples averaged per fusion tick
  std::vector<double> Xi;  // empty: 1 / r_i
  int threads = 1;
};

// Step 1 runs at the sensor rate (local_update per sample); step 2 runs at
// each fusion tick on the averaged pseudo-measurements.
class FastMhMapFilter {
 public:
  FastMhMapFilter(const fem::FieldModel& model, std::vector<fem::SensorRow> rows, std::vector<BinarySensor> sensors,
                  Vector gamma_bc, GlobalWeights weights, Vector prior, FastFilterOptions options = {});

  void local_update(const Labels& y);  // y in {0,1}, one entry per sensor
  std::optional<WindowEstimate> fuse_tick();

  long local_solver_calls() const { return local_calls_; }
  long factorizations() const { return fuser_.factorizations(); }
  const Vector& prediction() const { return prediction_; }

 private:
  std::vector<BinarySensor> sensors_;
  FastFilterOptions options_;
  GlobalFuser fuser_;
  Vector Xi_;
  Vector prediction_;
  std::vector<MapFilter> locals_;
  std::vector<bool> started_;
  std::vector<std::deque<double>> recent_;  // latest local sigma_t|t per sensor
  std::deque<Vector> sigma_window_;
  long local_calls_ = 0;
};

}  // namespace bms::fast
