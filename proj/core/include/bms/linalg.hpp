#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace bms {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Throws ContractViolation with `what` when `ok` is false.
void require(bool ok, std::string_view what);

bool all_finite(const Matrix& a);

// Dense Cholesky A = L L'. Throws ConditioningError naming the first
// non-positive pivot.
class Cholesky {
 public:
  Cholesky() = default;
  explicit Cholesky(const Matrix& a);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  Matrix lower() const { return llt_.matrixL(); }
  int size() const { return static_cast<int>(llt_.rows()); }
  // ||L L' - A||_F / ||A||_F for the matrix that was factored.
  double reconstruction_error(const Matrix& a) const;
  double log_determinant() const;

 private:
  Eigen::LLT<Matrix> llt_;
};

Vector cholesky_solve(const Matrix& a, const Vector& b);

bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);
bool is_spd(const Matrix& a);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns
};
SymmetricEigen symmetric_eigen(const Matrix& a);
double min_eigenvalue(const Matrix& a);
double max_eigenvalue(const Matrix& a);

// Largest singular value by power iteration on A'A.
double spectral_norm(const Matrix& a, int max_iterations = 200, double tol = 1e-12);
double spectral_radius(const Matrix& a);
int numerical_rank(const Matrix& a, double rel_tol = 1e-10);
Matrix pseudo_inverse(const Matrix& a, double rel_tol = 1e-12);

// Scaling and squaring with a truncated Taylor series.
Matrix matrix_exponential(const Matrix& a);

Matrix kronecker(const Matrix& a, const Matrix& b);

}  // namespace bms
