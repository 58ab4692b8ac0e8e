#pragma once

#include "bms/fem_mesh.hpp"
#include "bms/lti_model.hpp"
#include "bms/rng.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace bms::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct LocalMatrices {
  Eigen::Matrix3d stiffness;
  Eigen::Matrix3d mass;
  double area = 0.0;
};
// P1 element matrices; throws AssemblyError for a degenerate triangle.
LocalMatrices local_matrices(const Point& p0, const Point& p1, const Point& p2, double lambda_d, int triangle = -1);

// Free-vertex blocks of the Galerkin system: M, S (m x m) and the coupling
// S_D (m x (m_phi - m)) to the Dirichlet values gamma_bc.
struct FemOperators {
  SparseMatrix M;
  SparseMatrix S;
  SparseMatrix SD;
  Vector gamma_bc;
  double lambda_d = 0.0;

  int m() const { return static_cast<int>(M.rows()); }
};

FemOperators assemble(const TriMesh& mesh, double lambda_d, const Vector& gamma_bc);
FemOperators assemble(const TriMesh& mesh, double lambda_d, double gamma_constant);

// Implicit Euler: (M + dt S) x_{t+1} = M x_t + dt u, u = -S_D gamma.
struct FieldModel {
  Matrix A;  // (M + dt S)^{-1} M
  Matrix B;  // (M + dt S)^{-1} dt
  Vector u;  // -S_D gamma
  double dt = 0.0;

  int m() const { return static_cast<int>(A.rows()); }
  Vector drive() const { return B * u; }
  Vector advance(const Vector& x) const { return A * x + B * u; }
  // Linear system with the constant drive as a unit input: x+ = A x + (B u) * 1.
  LinearSystem system(const Matrix& C) const;
};

FieldModel discretize_field(const FemOperators& ops, double dt);

// Largest |eigenvalue| of A from the symmetric generalized problem
// M v = mu (M + dt S) v.
double field_spectral_radius(const FemOperators& ops, double dt);

double energy_norm(const FemOperators& ops, const Vector& x);

// Runs the model `steps` times from x0; optional Gaussian process noise with
// the given standard deviation. Returns x0..x_steps.
std::vector<Vector> simulate_ground_truth(const FieldModel& model, const Vector& x0, int steps,
                                          double process_noise_sd = 0.0, Rng* rng = nullptr);

// Every `stride`-th sample starting at 0.
std::vector<Vector> downsample(const std::vector<Vector>& trajectory, int stride);

}  // namespace bms::fem
