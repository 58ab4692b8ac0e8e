#include "bms/stability.hpp"

#include "bms/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace bms {

StabilityLedger stability_ledger(const LinearSystem& sys, const MheWeights& weights, const BoundedSets& bounds,
                                 double delta, int N, double phi_bar) {
  require(delta >= 0.0, "stability_ledger: delta must be nonnegative");
  require(phi_bar >= 0.0, "stability_ledger: phi_bar must be nonnegative");
  require(N >= 1, "stability_ledger: N must be at least 1");
  bounds.validate();
  const int p = sys.p();
  weights.validate(sys.n(), p);

  StabilityLedger L;
  L.delta = delta;
  L.phi_bar = phi_bar;
  for (Eigen::Index i = 0; i < sys.C.rows(); ++i) L.L_bar = std::max(L.L_bar, sys.C.row(i).norm());
  L.C_bar = L.L_bar;
  L.R_max = weights.R.maxCoeff();
  L.R_min = weights.R.minCoeff();
  L.lambda_P_max = max_eigenvalue(weights.P);
  L.lambda_P_min = min_eigenvalue(weights.P);
  L.lambda_Q_max = max_eigenvalue(weights.Q);
  L.lambda_Q_min = min_eigenvalue(weights.Q);
  L.norm_A = spectral_norm(sys.A, 200, 1e-12);

  const double pd = static_cast<double>(p);
  const double Nd = static_cast<double>(N);
  L.d1 = 2.0 * pd * phi_bar * phi_bar;
  L.d2 = phi_bar > 0.0 ? 3.0 * L.L_bar * L.L_bar / (phi_bar * phi_bar)
                       : std::numeric_limits<double>::infinity();
  // d1 (d2 + R) without the 0 * inf when phi_bar = 0
  const double d1d2R = 6.0 * pd * L.L_bar * L.L_bar + L.d1 * L.R_max;
  L.b1 = (L.lambda_P_max / L.lambda_P_min) * (4.0 + d1d2R / L.lambda_Q_min);
  L.b2 = 0.5 + delta * delta * L.R_min / (4.0 * L.lambda_P_max);
  L.a1 = L.b1 * L.norm_A * L.norm_A / L.b2;

  const double C2 = L.C_bar * L.C_bar;
  const double L2 = L.L_bar * L.L_bar;
  L.c1 = L.c2 = pd * (Nd + 1.0) * (4.0 * L.R_max * C2 + 3.0 * L2);
  const double k = L.b1 / (2.0 * L.lambda_P_max) - 1.0;
  L.c3 = L.b1 + Nd * L.lambda_Q_max * k + pd * L.R_max * (4.0 * (Nd + 1.0) * C2 + phi_bar * phi_bar);
  L.c4 = pd * (Nd + 1.0) * L.R_max * k + pd * L.R_max * (4.0 * Nd + 5.0);

  const double rho_est = bounds.rho_X_estimator < 0.0 ? bounds.rho_X : bounds.rho_X_estimator;
  const Matrix AmI = sys.A - Matrix::Identity(sys.n(), sys.n());
  const double nAmI = spectral_norm(AmI, 200, 1e-12);
  const double nB = sys.B.size() ? spectral_norm(sys.B, 200, 1e-12) : 0.0;
  const double rv = bounds.rho_V_max();
  L.a2 = (L.c1 * nAmI * nAmI * rho_est * rho_est + L.c2 * nB * nB * bounds.rho_U * bounds.rho_U +
          L.c3 * bounds.rho_W * bounds.rho_W + L.c4 * rv * rv) /
         L.b2;
  if (L.a1 < 1.0 && L.a2 >= 0.0) L.e_inf = std::sqrt(L.a2 / (1.0 - L.a1));
  return L;
}

double noise_gain(const std::vector<Matrix>& powers, const Matrix& C, const SwitchSets& sets, int N) {
  const Eigen::Index n = powers.front().rows();
  double best = 0.0;
  for (std::size_t i = 0; i < sets.instants.size(); ++i) {
    const auto& inst = sets.instants[i];
    if (inst.empty()) continue;
    // row for instant k: x_{k-1} offset o = k-1, depends on w_0..w_{o-1}
    Matrix D = Matrix::Zero(static_cast<Eigen::Index>(inst.size()), n * (N + 1));
    for (std::size_t r = 0; r < inst.size(); ++r) {
      const int o = inst[r] - 1;
      for (int j = 0; j < o; ++j)
        D.block(static_cast<Eigen::Index>(r), j * n, 1, n) =
            C.row(static_cast<Eigen::Index>(i)) * powers[static_cast<std::size_t>(o - 1 - j)];
    }
    if (D.cwiseAbs().maxCoeff() == 0.0) continue;
    Eigen::JacobiSVD<Matrix> svd(D);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

double tune_epsilon(const LinearSystem& sys, const MheWeights& weights_base, const BoundedSets& bounds, double delta,
                    int N, double phi_bar) {
  if (!(delta > 0.0)) throw NoObservability("tune_epsilon: observability measure is zero");
  auto a1_at = [&](int e) {
    MheWeights w = weights_base;
    w.P = std::pow(10.0, e) * weights_base.P;
    return stability_ledger(sys, w, bounds, delta, N, phi_bar).a1;
  };
  int lo = -200, hi = 200;  // a1(10^lo) < 1 <= a1(10^hi) expected
  if (a1_at(hi) < 1.0) return std::pow(10.0, hi);
  if (!(a1_at(lo) < 1.0)) throw NoObservability("tune_epsilon: no epsilon gives a1 < 1");
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (a1_at(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::pow(10.0, lo);
}

}  // namespace bms
