#include "bms/fem_field.hpp"

#include "bms/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace bms::fem {

LocalMatrices local_matrices(const Point& p0, const Point& p1, const Point& p2, double lambda_d, int triangle) {
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
  const double scale = std::max({(p1 - p0).squaredNorm(), (p2 - p0).squaredNorm(), (p2 - p1).squaredNorm()});
  if (!(std::abs(det) > 1e-14 * scale))
    throw AssemblyError("fem: triangle " + std::to_string(triangle) + " is degenerate", triangle);
  LocalMatrices out;
  out.area = 0.5 * std::abs(det);
  // gradients of the barycentric basis functions
  Eigen::Matrix<double, 3, 2> grad;
  grad << p1.y() - p2.y(), p2.x() - p1.x(),
          p2.y() - p0.y(), p0.x() - p2.x(),
          p0.y() - p1.y(), p1.x() - p0.x();
  grad /= det;
  out.stiffness = lambda_d * out.area * grad * grad.transpose();
  out.mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  out.mass *= out.area / 12.0;
  return out;
}

FemOperators assemble(const TriMesh& mesh, double lambda_d, const Vector& gamma_bc) {
  require(lambda_d > 0.0, "fem: diffusivity must be positive");
  require(gamma_bc.size() == mesh.dirichlet_count(), "fem: one boundary value per Dirichlet vertex");
  const int m = mesh.m();
  const int nd = mesh.dirichlet_count();
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> tm, ts, tsd;
  tm.reserve(mesh.triangles.size() * 9);
  ts.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const LocalMatrices lm = local_matrices(mesh.vertices[static_cast<std::size_t>(tri[0])],
                                            mesh.vertices[static_cast<std::size_t>(tri[1])],
                                            mesh.vertices[static_cast<std::size_t>(tri[2])], lambda_d, t);
    for (int a = 0; a < 3; ++a) {
      const int i = tri[static_cast<std::size_t>(a)];
      if (i >= m) continue;  // Dirichlet rows are not unknowns
      for (int b = 0; b < 3; ++b) {
        const int j = tri[static_cast<std::size_t>(b)];
        if (j < m) {
          tm.emplace_back(i, j, lm.mass(a, b));
          ts.emplace_back(i, j, lm.stiffness(a, b));
        } else {
          tsd.emplace_back(i, j - m, lm.stiffness(a, b));
        }
      }
    }
  }
  FemOperators ops;
  ops.M.resize(m, m);
  ops.S.resize(m, m);
  ops.SD.resize(m, nd);
  ops.M.setFromTriplets(tm.begin(), tm.end());
  ops.S.setFromTriplets(ts.begin(), ts.end());
  ops.SD.setFromTriplets(tsd.begin(), tsd.end());
  // exact symmetry regardless of summation order
  SparseMatrix Mt = ops.M.transpose(), St = ops.S.transpose();
  ops.M = 0.5 * (ops.M + Mt);
  ops.S = 0.5 * (ops.S + St);
  ops.gamma_bc = gamma_bc;
  ops.lambda_d = lambda_d;
  return ops;
}

FemOperators assemble(const TriMesh& mesh, double lambda_d, double gamma_constant) {
  return assemble(mesh, lambda_d, Vector::Constant(mesh.dirichlet_count(), gamma_constant));
}

LinearSystem FieldModel::system(const Matrix& C) const {
  LinearSystem sys;
  sys.A = A;
  sys.B = drive();
  sys.C = C;
  sys.validate();
  return sys;
}

FieldModel discretize_field(const FemOperators& ops, double dt) {
  require(dt > 0.0, "fem: dt must be positive");
  const int m = ops.m();
  FieldModel model;
  model.dt = dt;
  model.u = -(ops.SD * ops.gamma_bc);
  const SparseMatrix K = ops.M + dt * ops.S;
  const Matrix Md = Matrix(ops.M);
  if (m <= 1000) {
    Eigen::LLT<Matrix> llt{Matrix(K)};
    if (llt.info() != Eigen::Success) throw ConditioningError("fem: M + dt S is not positive definite", -1, 0.0);
    model.A = llt.solve(Md);
    model.B = llt.solve(Matrix::Identity(m, m)) * dt;
  } else {
    Eigen::SimplicialLLT<SparseMatrix> llt(K);
    if (llt.info() != Eigen::Success) throw ConditioningError("fem: M + dt S is not positive definite", -1, 0.0);
    model.A = llt.solve(Md);
    model.B = llt.solve(Matrix::Identity(m, m)) * dt;
  }
  return model;
}

double field_spectral_radius(const FemOperators& ops, double dt) {
  const Matrix M = Matrix(ops.M);
  const Matrix K = Matrix(SparseMatrix(ops.M + dt * ops.S));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(M, K, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double energy_norm(const FemOperators& ops, const Vector& x) { return std::sqrt(x.dot(ops.M * x)); }

std::vector<Vector> simulate_ground_truth(const FieldModel& model, const Vector& x0, int steps,
                                          double process_noise_sd, Rng* rng) {
  require(x0.size() == model.m(), "simulate: initial field has the wrong size");
  require(process_noise_sd == 0.0 || rng != nullptr, "simulate: process noise needs an rng");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  out.push_back(x0);
  const Vector drive = model.drive();
  for (int k = 0; k < steps; ++k) {
    Vector x = model.A * out.back() + drive;
    if (process_noise_sd > 0.0)
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += process_noise_sd * rng->gaussian();
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Vector> downsample(const std::vector<Vector>& trajectory, int stride) {
  require(stride >= 1, "downsample: stride must be positive");
  std::vector<Vector> out;
  for (std::size_t k = 0; k < trajectory.size(); k += static_cast<std::size_t>(stride)) out.push_back(trajectory[k]);
  return out;
}

}  // namespace bms::fem
