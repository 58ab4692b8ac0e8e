#pragma once

// Reference computations written independently of the library: plain loops,
// dense matrices, brute force. Tests compare library results against these.

#include "bms/linalg.hpp"
#include "bms/lti_model.hpp"
#include "bms/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using bms::Labels;
using bms::Matrix;
using bms::Vector;

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

// log P(Z > s) by quadrature. For s > 0 the factor exp(-s^2/2) is pulled
// out and exp(-s t - t^2/2) integrated over t in [0, 40], so the result keeps
// relative accuracy deep in the tail.
inline double log_normal_tail(double s) {
  const double log_root = 0.5 * std::log(2.0 * std::numbers::pi);
  if (s > 0.0) {
    const double I = integrate([s](double t) { return std::exp(-s * t - 0.5 * t * t); }, 0.0, 40.0);
    return -0.5 * s * s + std::log(I) - log_root;
  }
  const auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  return std::log1p(-integrate(pdf, -s, 40.0));
}

inline double normal_tail(double s) { return std::exp(log_normal_tail(s)); }

// Column-wise central differences of a vector function.
inline Matrix jacobian_fd(const std::function<Vector(const Vector&)>& g, const Vector& x, double h) {
  const Vector g0 = g(x);
  Matrix J(g0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (g(xp) - g(xm)) / (2.0 * h);
  }
  return J;
}

inline Vector gradient_fd(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Second differences of f.
inline Matrix hessian_fd(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  const auto n = x.size();
  Matrix H(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      double v;
      if (i == j) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        v = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
      } else {
        Vector pp = x, pm = x, mp = x, mm = x;
        pp(i) += h, pp(j) += h;
        pm(i) += h, pm(j) -= h;
        mp(i) -= h, mp(j) += h;
        mm(i) -= h, mm(j) -= h;
        v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
      }
      H(i, j) = H(j, i) = v;
    }
  return H;
}

// Exact Hessian and linear term of a quadratic f(x) = x'Hx/2 + g'x + c from
// values at 0, e_i and e_i + e_j.
struct QuadraticFit {
  Matrix H;
  Vector g;
  double c;
};
inline QuadraticFit fit_quadratic(const std::function<double(const Vector&)>& f, int n) {
  QuadraticFit q{Matrix(n, n), Vector(n), f(Vector::Zero(n))};
  Vector fi(n), fmi(n);
  for (int i = 0; i < n; ++i) {
    fi(i) = f(Vector::Unit(n, i));
    fmi(i) = f(-Vector::Unit(n, i));
  }
  for (int i = 0; i < n; ++i) {
    q.H(i, i) = fi(i) + fmi(i) - 2.0 * q.c;
    q.g(i) = 0.5 * (fi(i) - fmi(i));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double fij = f(Vector::Unit(n, i) + Vector::Unit(n, j));
      q.H(i, j) = q.H(j, i) = fij - fi(i) - fi(j) + q.c;
    }
  return q;
}

// Stacked window X = [x_0; ...; x_N].
inline Vector block(const Vector& X, int k, int n) { return X.segment(k * n, n); }

inline double arrival_and_dynamics(const bms::LinearSystem& sys, const Matrix& P, const Matrix& Q,
                                   const std::vector<Vector>& u, const Vector& prediction, const Vector& X) {
  const int n = sys.n();
  const int N = static_cast<int>(u.size());
  const Vector e0 = block(X, 0, n) - prediction;
  double J = e0.dot(P * e0);
  for (int k = 0; k < N; ++k) {
    const Vector w = block(X, k + 1, n) - sys.A * block(X, k, n) - sys.B * u[static_cast<std::size_t>(k)];
    J += w.dot(Q * w);
  }
  return J;
}

// Least-squares cost: sensor i contributes R_i (C^i x_k - tau_i)^2 at every
// sample k whose label differs from the next one.
inline double lsmhe_cost(const bms::LinearSystem& sys, const Matrix& P, const Matrix& Q, const Vector& R,
                         const std::vector<double>& tau, const std::vector<Vector>& u, const std::vector<Labels>& y,
                         const Vector& prediction, const Vector& X) {
  const int n = sys.n();
  double J = arrival_and_dynamics(sys, P, Q, u, prediction, X);
  for (int i = 0; i < sys.p(); ++i)
    for (std::size_t k = 0; k + 1 < y.size(); ++k)
      if (y[k](i) != y[k + 1](i)) {
        const double d = sys.C.row(i).dot(block(X, static_cast<int>(k), n)) - tau[static_cast<std::size_t>(i)];
        J += R(i) * d * d;
      }
  return J;
}

// Piecewise-quadratic cost: R_i (C^i x_k - tau_i)^2 wherever the sign of
// C^i x_k - tau_i contradicts y_k (labels +1/-1).
inline double pwmhe_cost(const bms::LinearSystem& sys, const Matrix& P, const Matrix& Q, const Vector& R,
                         const std::vector<double>& tau, const std::vector<Vector>& u, const std::vector<Labels>& y,
                         const Vector& prediction, const Vector& X) {
  const int n = sys.n();
  double J = arrival_and_dynamics(sys, P, Q, u, prediction, X);
  for (int i = 0; i < sys.p(); ++i)
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double d = sys.C.row(i).dot(block(X, static_cast<int>(k), n)) - tau[static_cast<std::size_t>(i)];
      const bool above = d > 0.0;
      const bool said_above = y[k](i) > 0;
      if (d != 0.0 && above != said_above) J += R(i) * d * d;
    }
  return J;
}

// -log P(y | x) for the Gaussian-noise threshold sensor, by quadrature.
inline double neg_log_bernoulli(double cx, double tau, double r, int y) {
  const double z = (tau - cx) / std::sqrt(r);
  // P(cx + v >= tau) = P(Z > z), P(cx + v < tau) = P(Z > -z)
  return -log_normal_tail(y > 0 ? z : -z);
}

// Switching instants by the definition: 1-based k with y_k y_{k+1} < 0.
inline std::vector<std::vector<int>> switchings(const std::vector<Labels>& y) {
  const auto p = y.empty() ? 0 : y.front().size();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i)
    for (std::size_t k = 0; k + 1 < y.size(); ++k)
      if (y[k](i) * y[k + 1](i) < 0) out[static_cast<std::size_t>(i)].push_back(static_cast<int>(k) + 1);
  return out;
}

// min over all feasible active sets of a small strictly convex QP
// 1/2 x'Hx + f'x s.t. Gx <= h, by enumerating every subset of rows as
// equalities and keeping the best KKT-feasible candidate.
inline Vector enumerate_qp(const Matrix& H, const Vector& f, const Matrix& G, const Vector& h) {
  const auto n = H.rows();
  const auto m = G.rows();
  Vector best;
  double best_value = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1L << i)) act.push_back(i);
    const auto a = static_cast<Eigen::Index>(act.size());
    if (a > n) continue;
    Matrix K = Matrix::Zero(n + a, n + a);
    Vector rhs(n + a);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -f;
    for (Eigen::Index j = 0; j < a; ++j) {
      K.block(0, n + j, n, 1) = G.row(act[static_cast<std::size_t>(j)]).transpose();
      K.block(n + j, 0, 1, n) = G.row(act[static_cast<std::size_t>(j)]);
      rhs(n + j) = h(act[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < n + a) continue;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    if (((G * x - h).array() > 1e-9).any()) continue;
    if ((sol.tail(a).array() < -1e-9).any()) continue;
    const double v = 0.5 * x.dot(H * x) + f.dot(x);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  }
  return best;
}

// Random SPD matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(bms::Rng& rng, int n, double lo, double hi) {
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(M);
  const Matrix U = qr.householderQ();
  Vector ev(n);
  for (int i = 0; i < n; ++i) ev(i) = rng.uniform(lo, hi);
  return U * ev.asDiagonal() * U.transpose();
}

inline Matrix random_matrix(bms::Rng& rng, int r, int c, double scale = 1.0) {
  Matrix M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = scale * rng.uniform(-1.0, 1.0);
  return M;
}

inline Vector random_vector(bms::Rng& rng, int n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

// Smallest singular value through the eigenvalues of theta' theta.
inline double min_singular_value(const Matrix& theta) {
  if (theta.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(theta);
  const auto& s = svd.singularValues();
  if (theta.rows() < theta.cols()) return 0.0;
  return s(s.size() - 1);
}

}  // namespace oracle
