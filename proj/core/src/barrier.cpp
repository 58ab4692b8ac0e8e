#include "bms/barrier.hpp"

#include "bms/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace bms {

namespace {

// Damped Newton solve of the centering problem f + mu * barrier.
// Returns Newton steps taken.
int center(const Objective& f, const HessianFn& hessian, const Matrix& G, const Vector& h, double mu,
           Vector& x, int max_newton) {
  const Eigen::Index m = G.rows();
  auto phi = [&](const Vector& z, Vector* grad) -> double {
    Vector g;
    double v = f(z, grad ? &g : nullptr);
    if (!std::isfinite(v)) throw CallableError("barrier: objective returned a non-finite value");
    if (m > 0) {
      const Vector s = h - G * z;
      if ((s.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
      v -= mu * s.array().log().sum();
      if (grad) g += G.transpose() * (mu * s.cwiseInverse());
    }
    if (grad) *grad = std::move(g);
    return v;
  };

  int steps = 0;
  Vector g;
  double value = phi(x, &g);
  for (; steps < max_newton; ++steps) {
    Matrix H = hessian(x);
    if (m > 0) {
      const Vector s = h - G * x;
      const Vector w = mu * s.array().square().inverse();
      H.noalias() += G.transpose() * w.asDiagonal() * G;
    }
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) {
      // Generalized Hessians can be singular on flat pieces; regularize lightly.
      const double ridge = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      llt.compute(H + ridge * Matrix::Identity(H.rows(), H.cols()));
      if (llt.info() != Eigen::Success)
        throw ConditioningError("barrier: Newton system is not positive definite", -1,
                                std::numeric_limits<double>::infinity());
    }
    const Vector dx = -llt.solve(g);
    const double decrement = -g.dot(dx);
    if (!(decrement > 1e-20 * std::max(1.0, std::abs(value)))) break;

    double step = 1.0;
    if (m > 0) {
      const Vector s = h - G * x;
      const Vector gd = G * dx;
      for (Eigen::Index i = 0; i < m; ++i)
        if (gd(i) > 0.0) step = std::min(step, 0.99 * s(i) / gd(i));
    }
    // Below this the barrier value cannot resolve the decrease, so the
    // step is judged by the gradient instead.
    const bool flat = decrement < 1e-12 * std::max(1.0, std::abs(value));
    const double gnorm = g.cwiseAbs().maxCoeff();
    bool moved = false;
    for (int bt = 0; bt < 80; ++bt, step *= 0.5) {
      Vector xn = x + step * dx;
      Vector gn;
      const double vn = phi(xn, &gn);
      if (!std::isfinite(vn)) continue;
      if (vn <= value - 0.25 * step * decrement || (flat && gn.cwiseAbs().maxCoeff() < gnorm)) {
        x = std::move(xn);
        g = std::move(gn);
        value = vn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return steps;
}

}  // namespace

BarrierResult barrier_minimize(const Objective& f, const HessianFn& hessian, const Matrix& G, const Vector& h,
                               const std::optional<Vector>& x0, const BarrierOptions& opt) {
  require(G.rows() == h.size(), "barrier: G and h row counts differ");
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index m = G.rows();

  Vector x;
  if (x0 && (m == 0 || ((h - G * *x0).array() > 0.0).all())) {
    x = *x0;
  } else {
    require(x0.has_value() || G.cols() > 0, "barrier: cannot infer the problem dimension");
    const Vector hint = x0 ? *x0 : Vector::Zero(G.cols());
    x = m > 0 ? phase_one(G, h, hint) : hint;
  }
  require(m == 0 || x.size() == G.cols(), "barrier: x0 and G column counts differ");

  BarrierResult out;
  double mu = m > 0 ? opt.initial_mu : 0.0;
  int outer = 0;
  for (; outer < opt.max_outer; ++outer) {
    out.report.iterations += center(f, hessian, G, h, mu, x, opt.max_newton);
    if (m == 0 || static_cast<double>(m) * mu <= opt.gap_tolerance) break;
    mu *= opt.mu_factor;
  }

  Vector grad;
  f(x, &grad);
  out.multipliers = Vector::Zero(m);
  if (m > 0) out.multipliers = mu * (h - G * x).cwiseInverse();
  auto residual = [&](const Vector& lambda) {
    const Vector r = grad + G.transpose() * lambda;
    return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  };
  out.kkt_residual = residual(out.multipliers);
  if (m > 0) {
    // mu / s loses digits once active slacks approach round-off; refit the
    // active multipliers by least squares and keep them if they are valid.
    const Vector s = h - G * x;
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < m; ++i)
      if (s(i) < std::sqrt(mu)) active.push_back(i);
    if (!active.empty()) {
      Matrix GA(static_cast<Eigen::Index>(active.size()), G.cols());
      for (std::size_t j = 0; j < active.size(); ++j) GA.row(static_cast<Eigen::Index>(j)) = G.row(active[j]);
      Vector fixed = out.multipliers;
      for (auto i : active) fixed(i) = 0.0;
      const Vector rhs = -(grad + G.transpose() * fixed);
      const Vector lA = GA.transpose().completeOrthogonalDecomposition().solve(rhs);
      if ((lA.array() >= 0.0).all()) {
        Vector polished = fixed;
        for (std::size_t j = 0; j < active.size(); ++j) polished(active[j]) = lA(static_cast<Eigen::Index>(j));
        const double r = residual(polished);
        if (r < out.kkt_residual) {
          out.multipliers = std::move(polished);
          out.kkt_residual = r;
        }
      }
    }
  }
  out.duality_gap = static_cast<double>(m) * mu;
  out.report.gradient_norm = out.kkt_residual;
  out.report.tolerance = tol::kOptimize;
  out.report.status = outer < opt.max_outer ? SolveStatus::converged : SolveStatus::iteration_cap;
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.x = std::move(x);
  return out;
}

BarrierResult barrier_qp(const Matrix& H, const Vector& f, const Matrix& G, const Vector& h,
                         const std::optional<Vector>& x0, const BarrierOptions& options) {
  require(H.rows() == H.cols() && H.rows() == f.size(), "barrier_qp: H and f sizes differ");
  require(G.rows() == 0 || G.cols() == H.cols(), "barrier_qp: G has the wrong column count");
  Objective obj = [&](const Vector& x, Vector* g) {
    const Vector hx = H * x;
    if (g) *g = hx + f;
    return 0.5 * x.dot(hx) + f.dot(x);
  };
  HessianFn hess = [&](const Vector&) { return H; };
  Matrix Gc = G.rows() == 0 ? Matrix(0, H.cols()) : G;
  return barrier_minimize(obj, hess, Gc, h, x0 ? x0 : std::optional<Vector>(Vector::Zero(H.cols())), options);
}

Vector phase_one(const Matrix& G, const Vector& h, const Vector& hint) {
  const Eigen::Index n = G.cols();
  const Eigen::Index m = G.rows();
  require(hint.size() == n, "phase_one: hint has the wrong size");
  constexpr double rho = 1e-8;

  // variables (x, s): G x - s <= h, -s <= 1
  Matrix Ga = Matrix::Zero(m + 1, n + 1);
  Ga.topLeftCorner(m, n) = G;
  Ga.col(n).head(m).setConstant(-1.0);
  Ga(m, n) = -1.0;
  Vector ha(m + 1);
  ha.head(m) = h;
  ha(m) = 1.0;

  Vector z(n + 1);
  z.head(n) = hint;
  z(n) = std::max(0.0, (G * hint - h).maxCoeff()) + 1.0;

  Objective obj = [&](const Vector& v, Vector* g) {
    const Vector d = v.head(n) - hint;
    if (g) {
      g->resize(n + 1);
      g->head(n) = rho * d;
      (*g)(n) = 1.0;
    }
    return v(n) + 0.5 * rho * d.squaredNorm();
  };
  HessianFn hess = [&](const Vector&) {
    Matrix H = Matrix::Zero(n + 1, n + 1);
    H.topLeftCorner(n, n).diagonal().setConstant(rho);
    return H;
  };
  BarrierOptions opt;
  opt.gap_tolerance = 1e-12;
  BarrierResult r = barrier_minimize(obj, hess, Ga, ha, z, opt);
  const double s = r.x(n);
  const Vector x = r.x.head(n);
  if (!(s < 0.0) || ((h - G * x).array() <= 0.0).any())
    throw InfeasibleProblem("phase-1 optimum " + std::to_string(s) + " is nonnegative: constraints infeasible", s);
  return x;
}

std::pair<Matrix, Vector> box_rows(const Vector& lower, const Vector& upper) {
  require(lower.size() == upper.size(), "box_rows: bound sizes differ");
  const Eigen::Index n = lower.size();
  Matrix G(2 * n, n);
  G << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Vector h(2 * n);
  h << upper, -lower;
  return {G, h};
}

}  // namespace bms
