#pragma once

#include "bms/lti_model.hpp"
#include "bms/mhe_det.hpp"

#include <optional>

namespace bms {

struct StabilityLedger {
  double a1 = 0, a2 = 0;
  double b1 = 0, b2 = 0;
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  double d1 = 0, d2 = 0;
  std::optional<double> e_inf;  // sqrt(a2 / (1 - a1)) when a1 < 1
  double L_bar = 0;             // max_i ||C^i||
  double C_bar = 0;
  double phi_bar = 0;
  double delta = 0;
  double norm_A = 0;            // spectral norm by power iteration
  double R_max = 0, R_min = 0;
  double lambda_P_max = 0, lambda_P_min = 0, lambda_Q_max = 0, lambda_Q_min = 0;

  bool available() const { return e_inf.has_value(); }
  // Right-hand side of ||e_{t-N}||_P^2 <= a1 ||e_{t-N-1}||_P^2 + a2.
  double bound(double previous_sq) const { return a1 * previous_sq + a2; }
};

StabilityLedger stability_ledger(const LinearSystem& sys, const MheWeights& weights, const BoundedSets& bounds,
                                 double delta, int N, double phi_bar);

// Largest spectral norm over sensors of the matrix mapping the window's
// process-noise sequence onto the outputs at the switching instants.
double noise_gain(const std::vector<Matrix>& powers, const Matrix& C, const SwitchSets& sets, int N);

// Largest 10^e with a1 < 1 when P = 10^e * P_bar. Throws NoObservability for
// delta <= 0.
double tune_epsilon(const LinearSystem& sys, const MheWeights& weights_base, const BoundedSets& bounds, double delta,
                    int N, double phi_bar);

}  // namespace bms
