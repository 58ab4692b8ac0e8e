#include "bms/lti_model.hpp"

#include "bms/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace bms {

namespace {

// Probabilistic windows carry {0,1}; switchings are defined on signs.
std::vector<Labels> to_signed_all(const std::vector<Labels>& ys) {
  std::vector<Labels> out;
  out.reserve(ys.size());
  for (const auto& y : ys) out.push_back(to_signed(y));
  return out;
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, Matrix c) : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
  validate();
}

void LinearSystem::validate() const {
  if (A.rows() != A.cols() || A.rows() == 0) throw InvalidModel("A must be square and non-empty");
  if (B.rows() != A.rows()) throw InvalidModel("B must have n rows");
  if (C.size() > 0 && C.cols() != A.rows()) throw InvalidModel("C must have n columns");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite()) throw InvalidModel("system matrices must be finite");
}

void BinarySensor::validate(int n) const {
  require(row.size() == n, "sensor row length differs from the state dimension");
  require(noise_bound >= 0.0, "sensor noise bound must be nonnegative");
  require(noise_variance > 0.0, "sensor noise variance must be positive");
  require(std::isfinite(threshold) || std::isinf(threshold), "sensor threshold must not be NaN");
}

std::vector<BinarySensor> make_sensors(const Matrix& C, const std::vector<double>& thresholds, double noise_bound,
                                       double noise_variance) {
  require(thresholds.size() == 1 || static_cast<Eigen::Index>(thresholds.size()) == C.rows(),
          "make_sensors: need one threshold or one per row");
  std::vector<BinarySensor> out;
  for (Eigen::Index i = 0; i < C.rows(); ++i) {
    BinarySensor s;
    s.row = C.row(i).transpose();
    s.threshold = thresholds.size() == 1 ? thresholds[0] : thresholds[static_cast<std::size_t>(i)];
    s.noise_bound = noise_bound;
    s.noise_variance = noise_variance;
    s.validate(static_cast<int>(C.cols()));
    out.push_back(std::move(s));
  }
  return out;
}

Matrix stack_rows(const std::vector<BinarySensor>& sensors) {
  if (sensors.empty()) return Matrix(0, 0);
  Matrix C(static_cast<Eigen::Index>(sensors.size()), sensors.front().row.size());
  for (std::size_t i = 0; i < sensors.size(); ++i) C.row(static_cast<Eigen::Index>(i)) = sensors[i].row.transpose();
  return C;
}

double BoundedSets::rho_V_max() const {
  return rho_V.empty() ? 0.0 : *std::max_element(rho_V.begin(), rho_V.end());
}

void BoundedSets::validate() const {
  require(rho_X >= 0.0 && rho_U >= 0.0 && rho_W >= 0.0, "bounded sets: radii must be nonnegative");
  for (double r : rho_V) require(r >= 0.0, "bounded sets: radii must be nonnegative");
}

LinearSystem discretize(const ContinuousModel& model) {
  require(model.Ts > 0.0, "discretize: Ts must be positive");
  const Eigen::Index n = model.Ac.rows();
  if (model.Ac.cols() != n || model.Bc.rows() != n) throw InvalidModel("discretize: inconsistent Ac/Bc shapes");
  if (!model.Ac.allFinite() || !model.Bc.allFinite()) throw InvalidModel("discretize: non-finite Ac or Bc");
  const Eigen::Index m = model.Bc.cols();
  // exp([[Ac, Bc], [0, 0]] Ts) = [[Ad, Bd], [0, I]]
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = model.Ac * model.Ts;
  aug.topRightCorner(n, m) = model.Bc * model.Ts;
  const Matrix e = matrix_exponential(aug);
  LinearSystem sys;
  sys.A = e.topLeftCorner(n, n);
  sys.B = e.topRightCorner(n, m);
  sys.C = Matrix(0, n);
  return sys;
}

Vector step(const LinearSystem& sys, const Vector& x, const Vector& u, const Vector& w) {
  require(x.size() == sys.n() && w.size() == sys.n(), "step: state size mismatch");
  require(u.size() == sys.m(), "step: input size mismatch");
  return sys.A * x + sys.B * u + w;
}

Reading sense(const std::vector<BinarySensor>& sensors, const Vector& x, const Vector& v, bool assert_bounds) {
  const auto p = static_cast<Eigen::Index>(sensors.size());
  require(v.size() == p, "sense: noise size differs from sensor count");
  Reading r{Vector(p), Labels(p)};
  for (Eigen::Index i = 0; i < p; ++i) {
    const BinarySensor& s = sensors[static_cast<std::size_t>(i)];
    require(s.row.size() == x.size(), "sense: sensor row length mismatch");
    if (assert_bounds) require(std::abs(v(i)) <= s.noise_bound, "sense: noise exceeds the declared bound");
    r.z(i) = s.row.dot(x) + v(i);
    r.y(i) = r.z(i) >= s.threshold ? 1 : -1;
  }
  return r;
}

Labels to_bernoulli(const Labels& y) { return y.unaryExpr([](int v) { return v > 0 ? 1 : 0; }); }
Labels to_signed(const Labels& y) { return y.unaryExpr([](int v) { return v > 0 ? 1 : -1; }); }

int SwitchSets::total() const {
  int t = 0;
  for (const auto& s : instants) t += static_cast<int>(s.size());
  return t;
}

SwitchSets detect_switchings(const std::vector<Labels>& outputs) {
  require(outputs.size() >= 2, "detect_switchings: window needs at least two samples");
  const Eigen::Index p = outputs.front().size();
  SwitchSets sets;
  sets.instants.resize(static_cast<std::size_t>(p));
  for (std::size_t k = 0; k + 1 < outputs.size(); ++k) {
    require(outputs[k + 1].size() == p, "detect_switchings: ragged outputs");
    for (Eigen::Index i = 0; i < p; ++i)
      if (outputs[k](i) * outputs[k + 1](i) < 0) sets.instants[static_cast<std::size_t>(i)].push_back(static_cast<int>(k) + 1);
  }
  return sets;
}

MheWindow MheWindow::make(std::vector<Vector> inputs, std::vector<Labels> outputs, Vector prediction) {
  MheWindow w;
  w.N = static_cast<int>(inputs.size());
  require(outputs.size() == inputs.size() + 1, "window: need N inputs and N+1 outputs");
  w.switch_sets = detect_switchings(to_signed_all(outputs));
  w.inputs = std::move(inputs);
  w.outputs = std::move(outputs);
  w.prediction = std::move(prediction);
  return w;
}

void MheWindow::validate(int n, int m, int p) const {
  require(N >= 1, "window: N must be at least 1");
  require(static_cast<int>(inputs.size()) == N && static_cast<int>(outputs.size()) == N + 1,
          "window: inconsistent lengths");
  require(prediction.size() == n, "window: prediction size mismatch");
  for (const auto& u : inputs) require(u.size() == m, "window: input size mismatch");
  for (const auto& y : outputs) require(y.size() == p, "window: output size mismatch");
  require(detect_switchings(to_signed_all(outputs)) == switch_sets, "window: switch sets do not match outputs");
}

std::vector<Matrix> matrix_powers(const Matrix& A, int N) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(N + 1));
  out.push_back(Matrix::Identity(A.rows(), A.cols()));
  for (int k = 1; k <= N; ++k) out.push_back(out.back() * A);
  return out;
}

Matrix observability_matrix(const std::vector<Matrix>& powers, const Matrix& C, const SwitchSets& sets) {
  const Eigen::Index n = powers.front().rows();
  Matrix theta(sets.total(), n);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < sets.instants.size(); ++i)
    for (int k : sets.instants[i]) {
      // instant k (1-based) is the sample x_{t-N+k-1}
      require(k >= 1 && static_cast<std::size_t>(k) < powers.size(), "observability: instant outside window");
      theta.row(row++) = C.row(static_cast<Eigen::Index>(i)) * powers[static_cast<std::size_t>(k - 1)];
    }
  return theta;
}

Matrix observability_matrix(const LinearSystem& sys, const SwitchSets& sets, int N) {
  require(static_cast<Eigen::Index>(sets.instants.size()) == sys.p(), "observability: one switch set per sensor");
  return observability_matrix(matrix_powers(sys.A, N), sys.C, sets);
}

double observability_measure(const Matrix& theta) {
  // sqrt(lambda_min(theta' theta)) straight from the SVD: squaring would
  // turn round-off into a spurious ~1e-8 floor on rank-deficient windows
  if (theta.rows() < theta.cols()) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(theta);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

LinearSystem build_oscillator_network(const Matrix& Ad, const Matrix& laplacian, double gamma) {
  require(Ad.rows() == 4 && Ad.cols() == 4, "oscillator network: Ad must be 4x4");
  require(gamma >= 0.0, "oscillator network: gamma must be nonnegative");
  const Eigen::Index q = laplacian.rows();
  if (laplacian.cols() != q || q == 0) throw InvalidModel("laplacian must be square and non-empty");
  if (!is_symmetric(laplacian, 1e-12)) throw InvalidModel("laplacian must be symmetric");
  if (laplacian.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, laplacian.cwiseAbs().maxCoeff()))
    throw InvalidModel("laplacian rows must sum to zero");
  const Matrix Iq = Matrix::Identity(q, q);
  Matrix row(1, 4);
  row << 0, 0, 1, 0;
  LinearSystem sys;
  sys.A = kronecker(Iq, Ad) - gamma * kronecker(laplacian, Matrix::Identity(4, 4));
  sys.B = Matrix::Zero(4 * q, 1);
  sys.C = kronecker(Iq, row);
  sys.validate();
  return sys;
}

Matrix ring_laplacian(int q) {
  require(q >= 1, "ring_laplacian: q must be positive");
  Matrix L = Matrix::Zero(q, q);
  if (q == 1) return L;
  for (int i = 0; i < q; ++i) {
    const int j = (i + 1) % q;
    if (j == i) continue;
    L(i, j) -= 1.0;
    L(j, i) -= 1.0;
    L(i, i) += 1.0;
    L(j, j) += 1.0;
  }
  return L;
}

}  // namespace bms
