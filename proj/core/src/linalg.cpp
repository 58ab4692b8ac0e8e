#include "bms/linalg.hpp"

#include "bms/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace bms {

void require(bool ok, std::string_view what) {
  if (!ok) throw ContractViolation(std::string(what));
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

namespace {

// First pivot where an unblocked factorization breaks down.
int failing_pivot(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<int>(j);
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
  }
  return static_cast<int>(n) - 1;
}

}  // namespace

Cholesky::Cholesky(const Matrix& a) {
  require(a.rows() == a.cols(), "cholesky: matrix must be square");
  require(is_symmetric(a, 1e-10), "cholesky: matrix must be symmetric");
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    int k = failing_pivot(a);
    throw ConditioningError("cholesky: non-positive pivot at index " + std::to_string(k), k,
                            std::numeric_limits<double>::infinity());
  }
  // Eigen accepts tiny positive pivots that are pure round-off; flag them too.
  const Matrix l = llt_.matrixL();
  const double dmax = l.diagonal().maxCoeff();
  const double dmin = l.diagonal().minCoeff();
  if (dmin <= dmax * 1e-15) {
    Eigen::Index k;
    l.diagonal().minCoeff(&k);
    throw ConditioningError("cholesky: numerically singular pivot at index " + std::to_string(k),
                            static_cast<int>(k), (dmax * dmax) / (dmin * dmin));
  }
}

Vector Cholesky::solve(const Vector& b) const {
  require(b.size() == llt_.rows(), "cholesky: rhs size mismatch");
  return llt_.solve(b);
}

Matrix Cholesky::solve(const Matrix& b) const {
  require(b.rows() == llt_.rows(), "cholesky: rhs size mismatch");
  return llt_.solve(b);
}

double Cholesky::reconstruction_error(const Matrix& a) const {
  const Matrix l = llt_.matrixL();
  const double na = a.norm();
  return (l * l.transpose() - a).norm() / (na > 0.0 ? na : 1.0);
}

double Cholesky::log_determinant() const {
  const Matrix l = llt_.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

Vector cholesky_solve(const Matrix& a, const Vector& b) { return Cholesky(a).solve(b); }

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_spd(const Matrix& a) {
  if (!is_symmetric(a, 1e-10) || !a.allFinite()) return false;
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  require(a.rows() == a.cols(), "symmetric_eigen: matrix must be square");
  if (a.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Matrix& a) {
  require(a.rows() > 0, "min_eigenvalue: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& a) {
  require(a.rows() > 0, "max_eigenvalue: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(a.rows() - 1);
}

double spectral_norm(const Matrix& a, int max_iterations, double tol) {
  if (a.size() == 0) return 0.0;
  const Eigen::Index n = a.cols();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.25 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = a.transpose() * (a * v);
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Rayleigh quotient at the final vector.
  lambda = std::max(lambda, (a * v).squaredNorm());
  return std::sqrt(lambda);
}

double spectral_radius(const Matrix& a) {
  require(a.rows() == a.cols(), "spectral_radius: matrix must be square");
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

Matrix pseudo_inverse(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  const double cut = s.size() > 0 ? rel_tol * s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix matrix_exponential(const Matrix& a) {
  require(a.rows() == a.cols(), "matrix_exponential: matrix must be square");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > 0.5) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix x = a / std::ldexp(1.0, s);

  // ||x|| <= 1/2: the tail after k terms is below 0.5^(k+1)/(k+1)!, so 20
  // terms are well past double precision; stop early once terms vanish.
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace bms
