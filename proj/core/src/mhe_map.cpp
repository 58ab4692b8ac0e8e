#include "bms/mhe_map.hpp"

#include "bms/error.hpp"
#include "bms/normal_tail.hpp"

#include <cmath>
#include <memory>

namespace bms {

void GaussianPriors::validate(int n) const {
  if (x0_mean.size() != n) throw WeightError("prior mean has the wrong size");
  if (P.rows() != n || !is_spd(P)) throw WeightError("P must be symmetric positive definite");
  if (G.rows() != n || !is_spd(G)) throw WeightError("G must be symmetric positive definite");
  if (Psi.size() && (Psi.rows() != n || !is_spd(Psi))) throw WeightError("Psi must be symmetric positive definite");
}

namespace {

// u such that log p(y | x) = log Q(u), and du/dx = sign * C / sqrt(r).
struct Standardized {
  double u;
  double sign;
  double inv_sd;
};

Standardized standardize(const BinarySensor& s, const Vector& x, int y) {
  const double inv_sd = 1.0 / std::sqrt(s.noise_variance);
  const double z = (s.threshold - s.row.dot(x)) * inv_sd;
  // y = 1: P(v >= tau - Cx) = Q(z);  y = 0: 1 - Q(z) = Q(-z)
  return y > 0 ? Standardized{z, -1.0, inv_sd} : Standardized{-z, 1.0, inv_sd};
}

}  // namespace

double sensor_probability(const BinarySensor& sensor, const Vector& x, int y) {
  const Standardized st = standardize(sensor, x, y);
  return normal_tail(st.u);
}

double sensor_loglik(const BinarySensor& sensor, const Vector& x, int y, Vector* grad) {
  const Standardized st = standardize(sensor, x, y);
  if (grad) *grad += (-inverse_mills(st.u) * st.sign * st.inv_sd) * sensor.row;
  return log_tail(st.u);
}

double sensor_curvature(const BinarySensor& sensor, const Vector& x, int y) {
  return log_tail_curvature(standardize(sensor, x, y).u);
}

double map_cost_grad(const LinearSystem& sys, const std::vector<BinarySensor>& sensors, const GaussianPriors& priors,
                     const MheWindow& window, const Vector& X, Vector* grad) {
  const int n = sys.n();
  const int N = window.N;
  require(X.size() == (N + 1) * n, "map cost: stacked state has the wrong size");
  if (grad) grad->setZero((N + 1) * n);

  const Matrix& Psi = priors.arrival();
  const Vector e0 = X.head(n) - window.prediction;
  const Vector Pe0 = Psi * e0;
  double cost = e0.dot(Pe0);
  if (grad) grad->head(n) += 2.0 * Pe0;

  for (int k = 0; k < N; ++k) {
    const Vector r = X.segment((k + 1) * n, n) - sys.A * X.segment(k * n, n) -
                     sys.B * window.inputs[static_cast<std::size_t>(k)];
    const Vector Gr = priors.G * r;
    cost += r.dot(Gr);
    if (grad) {
      grad->segment((k + 1) * n, n) += 2.0 * Gr;
      grad->segment(k * n, n) -= 2.0 * sys.A.transpose() * Gr;
    }
  }
  Vector gk(n);
  for (int k = 0; k <= N; ++k) {
    const Labels& y = window.outputs[static_cast<std::size_t>(k)];
    const Vector xk = X.segment(k * n, n);
    gk.setZero();
    for (std::size_t i = 0; i < sensors.size(); ++i)
      cost -= sensor_loglik(sensors[i], xk, y(static_cast<Eigen::Index>(i)), grad ? &gk : nullptr);
    if (grad) grad->segment(k * n, n) -= gk;
  }
  return cost;
}

BlockTridiagonal map_hessian(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                             const GaussianPriors& priors, const MheWindow& window, const Vector& X) {
  const int n = sys.n();
  const int N = window.N;
  const Matrix GA = priors.G * sys.A;
  const Matrix AtGA = sys.A.transpose() * GA;
  BlockTridiagonal H(N + 1, n);
  H.diag(0) = 2.0 * priors.arrival();
  for (int k = 0; k < N; ++k) {
    H.diag(k) += 2.0 * AtGA;
    H.diag(k + 1) += 2.0 * priors.G;
    H.lower(k) = -2.0 * GA;
  }
  for (int k = 0; k <= N; ++k) {
    const Labels& y = window.outputs[static_cast<std::size_t>(k)];
    const Vector xk = X.segment(k * n, n);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const BinarySensor& s = sensors[i];
      const double kappa = sensor_curvature(s, xk, y(static_cast<Eigen::Index>(i)));
      if (kappa > 0.0) H.diag(k) += (kappa / s.noise_variance) * s.row * s.row.transpose();
    }
  }
  return H;
}

WindowEstimate solve_mh_map(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                            const GaussianPriors& priors, const MheWindow& window,
                            const std::optional<Vector>& warm_start, const MapOptions& options) {
  const int n = sys.n();
  const int N = window.N;
  window.validate(n, sys.m(), static_cast<int>(sensors.size()));
  priors.validate(n);
  for (const auto& s : sensors) s.validate(n);

  Vector x0;
  if (warm_start) {
    x0 = *warm_start;
  } else {
    x0.resize((N + 1) * n);
    x0.head(n) = window.prediction;
    for (int k = 0; k < N; ++k)
      x0.segment((k + 1) * n, n) = sys.A * x0.segment(k * n, n) + sys.B * window.inputs[static_cast<std::size_t>(k)];
  }
  require(x0.size() == (N + 1) * n, "solve_mh_map: warm start has the wrong size");

  Objective f = [&](const Vector& X, Vector* g) { return map_cost_grad(sys, sensors, priors, window, X, g); };
  CurvatureModel curvature;
  QuasiNewtonOptions qn = options.qn;
  if (options.newton) {
    curvature = [&](const Vector& X) -> InverseCurvature {
      auto chol = std::make_shared<BlockTridiagonalCholesky>(map_hessian(sys, sensors, priors, window, X));
      return [chol](const Vector& v) { return chol->solve(v); };
    };
  } else if (qn.memory == 0) {
    qn.memory = 8;
  }
  MinimizeResult r = quasi_newton_min_or_throw(f, x0, qn, {}, curvature);
  WindowEstimate e = WindowEstimate::from_stacked(r.x, n);
  e.cost = r.value;
  e.report = r.report;
  return e;
}

MapFilter::MapFilter(LinearSystem sys, std::vector<BinarySensor> sensors, GaussianPriors priors, int N,
                     MapOptions options)
    : sys_(std::move(sys)),
      sensors_(std::move(sensors)),
      priors_(std::move(priors)),
      N_(N),
      options_(std::move(options)),
      prediction_(priors_.x0_mean),
      buffer_(N) {
  require(N_ >= 1, "filter: N must be at least 1");
  priors_.validate(sys_.n());
}

void MapFilter::begin(const Labels& y0) {
  buffer_.reset(y0);
  warm_.reset();
  prediction_ = priors_.x0_mean;
}

std::optional<WindowEstimate> MapFilter::advance(const Vector& u_prev, const Labels& y) {
  if (!buffer_.push(u_prev, y)) return std::nullopt;
  const MheWindow w = MheWindow::make(buffer_.inputs(), buffer_.outputs(), prediction_);
  WindowEstimate est;
  try {
    est = solve_mh_map(sys_, sensors_, priors_, w, warm_, options_);
  } catch (const ConvergenceFailure& e) {
    if (!options_.tolerate_failures || e.last_iterate().size() != (N_ + 1) * sys_.n()) throw;
    est = WindowEstimate::from_stacked(e.last_iterate(), sys_.n());
    est.report.status = SolveStatus::iteration_cap;
    est.report.gradient_norm = e.residual();
    ++failures_;
  }
  prediction_ = est.states[1];
  warm_ = shifted_warm_start(sys_, est, buffer_.last_input());
  buffer_.pop();
  return est;
}

}  // namespace bms
