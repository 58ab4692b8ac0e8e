#include "bms/mhe_det.hpp"

#include "bms/barrier.hpp"
#include "bms/error.hpp"

#include <chrono>
#include <cmath>
#include <memory>

namespace bms {

void MheWeights::validate(int n, int p) const {
  if (P.rows() != n || P.cols() != n || !is_spd(P)) throw WeightError("P must be a symmetric positive definite n x n matrix");
  if (Q.rows() != n || Q.cols() != n || !is_spd(Q)) throw WeightError("Q must be a symmetric positive definite n x n matrix");
  if (R.size() != p) throw WeightError("R needs one weight per sensor");
  if ((R.array() <= 0.0).any() || !R.allFinite()) throw WeightError("sensor weights R^i must be positive");
}

double QuadraticForm::evaluate(const Vector& Y) const { return Y.dot(M.multiply(Y)) - 2.0 * Y.dot(D) + r; }

Vector QuadraticForm::gradient(const Vector& Y) const { return 2.0 * (M.multiply(Y) - D); }

namespace {

void check_inputs(const LinearSystem& sys, const std::vector<BinarySensor>& sensors, const MheWindow& window,
                  const MheWeights& weights) {
  const int p = static_cast<int>(sensors.size());
  window.validate(sys.n(), sys.m(), p);
  weights.validate(sys.n(), p);
  for (const auto& s : sensors) s.validate(sys.n());
}

// Prediction propagated through the window without noise.
Vector propagate(const LinearSystem& sys, const MheWindow& w) {
  const int n = sys.n();
  Vector Y((w.N + 1) * n);
  Y.head(n) = w.prediction;
  for (int k = 0; k < w.N; ++k)
    Y.segment((k + 1) * n, n) = sys.A * Y.segment(k * n, n) + sys.B * w.inputs[static_cast<std::size_t>(k)];
  return Y;
}

}  // namespace

QuadraticForm assemble_lsmhe(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                             const MheWindow& window, const MheWeights& weights, bool include_switchings) {
  check_inputs(sys, sensors, window, weights);
  const int n = sys.n();
  const int N = window.N;
  const Matrix& A = sys.A;
  const Matrix QA = weights.Q * A;
  const Matrix AtQA = A.transpose() * QA;

  QuadraticForm qf;
  qf.M = BlockTridiagonal(N + 1, n);
  qf.D = Vector::Zero((N + 1) * n);
  qf.r = window.prediction.dot(weights.P * window.prediction);

  qf.M.diag(0) = weights.P;
  qf.D.head(n) = weights.P * window.prediction;
  Vector bu(n), qbu(n);
  for (int k = 0; k < N; ++k) {
    bu.noalias() = sys.B * window.inputs[static_cast<std::size_t>(k)];
    qbu.noalias() = weights.Q * bu;
    qf.M.diag(k) += AtQA;
    qf.M.diag(k + 1) += weights.Q;
    qf.M.lower(k) = -QA;
    qf.D.segment(k * n, n).noalias() -= A.transpose() * qbu;
    qf.D.segment((k + 1) * n, n) += qbu;
    qf.r += bu.dot(qbu);
  }
  if (include_switchings) {
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const BinarySensor& s = sensors[i];
      const double Ri = weights.R(static_cast<Eigen::Index>(i));
      for (int k : window.switch_sets.instants[i]) {
        const int h = k - 1;
        qf.M.diag(h) += Ri * s.row * s.row.transpose();
        qf.D.segment(h * n, n) += Ri * s.threshold * s.row;
        qf.r += Ri * s.threshold * s.threshold;
      }
    }
  }
  return qf;
}

WindowEstimate solve_lsmhe(const QuadraticForm& qf) {
  const auto start = std::chrono::steady_clock::now();
  BlockTridiagonalCholesky chol(qf.M);
  const Vector Y = chol.solve(qf.D);
  WindowEstimate e = WindowEstimate::from_stacked(Y, qf.n());
  e.cost = qf.r - qf.D.dot(Y);
  e.report.iterations = 1;
  e.report.evaluations = 1;
  e.report.gradient_norm = qf.gradient(Y).cwiseAbs().maxCoeff();
  e.report.tolerance = tol::kSolve * std::max(1.0, qf.D.cwiseAbs().maxCoeff());
  e.report.status = SolveStatus::converged;
  e.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

double pwmhe_cost_grad(const LinearSystem& sys, const std::vector<BinarySensor>& sensors, const MheWindow& window,
                       const MheWeights& weights, const Vector& X, Vector* grad) {
  const int n = sys.n();
  const int N = window.N;
  require(X.size() == (N + 1) * n, "pwmhe: stacked state has the wrong size");
  if (grad) grad->setZero((N + 1) * n);

  const Vector e0 = X.head(n) - window.prediction;
  const Vector Pe0 = weights.P * e0;
  double cost = e0.dot(Pe0);
  if (grad) grad->head(n) += 2.0 * Pe0;

  for (int k = 0; k < N; ++k) {
    const Vector r = X.segment((k + 1) * n, n) - sys.A * X.segment(k * n, n) -
                     sys.B * window.inputs[static_cast<std::size_t>(k)];
    const Vector Qr = weights.Q * r;
    cost += r.dot(Qr);
    if (grad) {
      grad->segment((k + 1) * n, n) += 2.0 * Qr;
      grad->segment(k * n, n) -= 2.0 * sys.A.transpose() * Qr;
    }
  }
  for (int k = 0; k <= N; ++k) {
    const Labels& y = window.outputs[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const BinarySensor& s = sensors[i];
      const double d = s.row.dot(X.segment(k * n, n)) - s.threshold;
      const int yi = y(static_cast<Eigen::Index>(i)) > 0 ? 1 : -1;
      if (d * yi < 0.0) {
        const double Ri = weights.R(static_cast<Eigen::Index>(i));
        cost += Ri * d * d;
        if (grad) grad->segment(k * n, n) += 2.0 * Ri * d * s.row;
      }
    }
  }
  return cost;
}

BlockTridiagonal pwmhe_hessian(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                               const MheWindow& window, const MheWeights& weights, const Vector& X) {
  const int n = sys.n();
  const int N = window.N;
  const Matrix QA = weights.Q * sys.A;
  const Matrix AtQA = sys.A.transpose() * QA;
  BlockTridiagonal H(N + 1, n);
  H.diag(0) = 2.0 * weights.P;
  for (int k = 0; k < N; ++k) {
    H.diag(k) += 2.0 * AtQA;
    H.diag(k + 1) += 2.0 * weights.Q;
    H.lower(k) = -2.0 * QA;
  }
  for (int k = 0; k <= N; ++k) {
    const Labels& y = window.outputs[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const BinarySensor& s = sensors[i];
      const double d = s.row.dot(X.segment(k * n, n)) - s.threshold;
      const int yi = y(static_cast<Eigen::Index>(i)) > 0 ? 1 : -1;
      // seam points take the active piece
      if (d * yi <= 0.0) H.diag(k) += 2.0 * weights.R(static_cast<Eigen::Index>(i)) * s.row * s.row.transpose();
    }
  }
  return H;
}

bool ConstraintPolyhedron::contains(const Vector& X, double slack) const {
  if (Gamma.rows() == 0) return true;
  return ((Gamma * X - rhs()).array() <= slack).all();
}

ConstraintPolyhedron build_constraints(const MheWindow& window, const std::vector<BinarySensor>& sensors) {
  require(!sensors.empty(), "build_constraints: no sensors");
  const auto n = sensors.front().row.size();
  const int N = window.N;
  const auto p = static_cast<Eigen::Index>(sensors.size());
  ConstraintPolyhedron poly;
  poly.Gamma = Matrix::Zero(p * (N + 1), n * (N + 1));
  poly.gamma = Vector::Zero(p * (N + 1));
  poly.margin = tol::kConstraintMargin;
  for (Eigen::Index i = 0; i < p; ++i) {
    const BinarySensor& s = sensors[static_cast<std::size_t>(i)];
    for (int k = 0; k <= N; ++k) {
      const Eigen::Index row = i * (N + 1) + k;
      const double phi = -(window.outputs[static_cast<std::size_t>(k)](i) > 0 ? 1.0 : -1.0);
      poly.Gamma.block(row, k * n, 1, n) = phi * s.row.transpose();
      poly.gamma(row) = phi * s.threshold + s.noise_bound;
    }
  }
  return poly;
}

WindowEstimate solve_pwmhe(const LinearSystem& sys, const std::vector<BinarySensor>& sensors,
                           const MheWindow& window, const MheWeights& weights, const std::optional<StateBox>& box,
                           const ConstraintPolyhedron* constraints, const std::optional<Vector>& warm_start,
                           const PwmheOptions& options) {
  check_inputs(sys, sensors, window, weights);
  const int n = sys.n();
  const int N = window.N;
  Vector x0 = warm_start ? *warm_start : propagate(sys, window);
  require(x0.size() == (N + 1) * n, "solve_pwmhe: warm start has the wrong size");

  Objective f = [&](const Vector& X, Vector* g) { return pwmhe_cost_grad(sys, sensors, window, weights, X, g); };

  std::optional<std::pair<Vector, Vector>> bounds;
  if (box) {
    require(box->lower.size() == n && box->upper.size() == n, "solve_pwmhe: box has the wrong size");
    bounds.emplace(box->lower.replicate(N + 1, 1), box->upper.replicate(N + 1, 1));
  }

  if (constraints) {
    Matrix G = constraints->Gamma;
    Vector h = constraints->rhs();
    if (bounds) {
      auto [Gb, hb] = box_rows(bounds->first, bounds->second);
      Matrix Gs(G.rows() + Gb.rows(), G.cols());
      Gs << G, Gb;
      Vector hs(h.size() + hb.size());
      hs << h, hb;
      G = std::move(Gs);
      h = std::move(hs);
    }
    HessianFn hess = [&](const Vector& X) { return pwmhe_hessian(sys, sensors, window, weights, X).dense(); };
    BarrierResult br = barrier_minimize(f, hess, G, h, x0);
    WindowEstimate e = WindowEstimate::from_stacked(br.x, n);
    e.cost = f(br.x, nullptr);
    e.report = br.report;
    if (br.report.status != SolveStatus::converged)
      throw ConvergenceFailure("constrained PWMHE: barrier iteration cap reached", br.x, br.kkt_residual);
    return e;
  }

  Projection proj;
  if (bounds) proj = box_projection(bounds->first, bounds->second);
  CurvatureModel curvature;
  QuasiNewtonOptions qn = options.qn;
  if (options.newton) {
    curvature = [&](const Vector& X) -> InverseCurvature {
      auto chol = std::make_shared<BlockTridiagonalCholesky>(pwmhe_hessian(sys, sensors, window, weights, X));
      return [chol](const Vector& v) { return chol->solve(v); };
    };
  } else if (qn.memory == 0) {
    qn.memory = 8;
  }
  MinimizeResult r = quasi_newton_min_or_throw(f, x0, qn, proj, curvature);
  WindowEstimate e = WindowEstimate::from_stacked(r.x, n);
  e.cost = r.value;
  e.report = r.report;
  return e;
}

WindowEstimate solve_lsmhe_constrained(const QuadraticForm& qf, const ConstraintPolyhedron& constraints,
                                       const std::optional<Vector>& warm_start) {
  const Matrix H = 2.0 * qf.M.dense();
  const Vector f = -2.0 * qf.D;
  BarrierResult br = barrier_qp(H, f, constraints.Gamma, constraints.rhs(), warm_start);
  if (br.report.status != SolveStatus::converged)
    throw ConvergenceFailure("constrained LSMHE: barrier iteration cap reached", br.x, br.kkt_residual);
  WindowEstimate e = WindowEstimate::from_stacked(br.x, qf.n());
  e.cost = qf.evaluate(br.x);
  e.report = br.report;
  return e;
}

Vector predict(const LinearSystem& sys, const Vector& xhat_first, const Vector& u) {
  return step(sys, xhat_first, u, Vector::Zero(sys.n()));
}

DetMheFilter::DetMheFilter(LinearSystem sys, std::vector<BinarySensor> sensors, MheWeights weights, int N,
                           Vector prior, DetFilterOptions options)
    : sys_(std::move(sys)),
      sensors_(std::move(sensors)),
      weights_(std::move(weights)),
      N_(N),
      options_(std::move(options)),
      prediction_(std::move(prior)),
      buffer_(N) {
  require(N_ >= 1, "filter: N must be at least 1");
  require(prediction_.size() == sys_.n(), "filter: prior has the wrong size");
  weights_.validate(sys_.n(), static_cast<int>(sensors_.size()));
}

void DetMheFilter::begin(const Labels& y0) {
  buffer_.reset(y0);
  warm_.reset();
}

std::optional<WindowEstimate> DetMheFilter::advance(const Vector& u_prev, const Labels& y) {
  if (!buffer_.push(u_prev, y)) return std::nullopt;
  window_ = MheWindow::make(buffer_.inputs(), buffer_.outputs(), prediction_);
  WindowEstimate est;
  try {
    est = solve(window_);
  } catch (const ConvergenceFailure& e) {
    if (!options_.tolerate_failures || e.last_iterate().size() != (N_ + 1) * sys_.n()) throw;
    est = WindowEstimate::from_stacked(e.last_iterate(), sys_.n());
    est.report.status = SolveStatus::iteration_cap;
    est.report.gradient_norm = e.residual();
    ++failures_;
  }
  prediction_ = predict(sys_, est.states.front(), buffer_.first_input());
  if (options_.warm_start) warm_ = shifted_warm_start(sys_, est, buffer_.last_input());
  buffer_.pop();
  return est;
}

WindowEstimate DetMheFilter::solve(const MheWindow& w) {
  switch (options_.kind) {
    case DetEstimator::lsmhe:
      return solve_lsmhe(assemble_lsmhe(sys_, sensors_, w, weights_));
    case DetEstimator::lsmhe_constrained: {
      const ConstraintPolyhedron poly = build_constraints(w, sensors_);
      return solve_lsmhe_constrained(assemble_lsmhe(sys_, sensors_, w, weights_), poly, warm_);
    }
    case DetEstimator::pwmhe:
      return solve_pwmhe(sys_, sensors_, w, weights_, options_.box, nullptr, warm_, options_.pwmhe);
    case DetEstimator::pwmhe_constrained: {
      const ConstraintPolyhedron poly = build_constraints(w, sensors_);
      return solve_pwmhe(sys_, sensors_, w, weights_, options_.box, &poly, warm_, options_.pwmhe);
    }
  }
  throw ContractViolation("filter: unknown estimator kind");
}

}  // namespace bms
