#pragma once

#include "bms/linalg.hpp"

#include <vector>

namespace bms {

struct LinearSystem {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // p x n, row i is sensor i

  LinearSystem() = default;
  LinearSystem(Matrix a, Matrix b, Matrix c);

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }
  void validate() const;
};

struct BinarySensor {
  Vector row;                 // C^i as a column vector of length n
  double threshold = 0.0;     // tau^i
  double noise_bound = 0.0;   // rho_V^i (deterministic setting)
  double noise_variance = 1.0;  // r_i (probabilistic setting)

  void validate(int n) const;
};

// Sensors built from the rows of sys.C with shared settings.
std::vector<BinarySensor> make_sensors(const Matrix& C, const std::vector<double>& thresholds, double noise_bound,
                                       double noise_variance);
Matrix stack_rows(const std::vector<BinarySensor>& sensors);

struct BoundedSets {
  double rho_X = 0.0;
  double rho_U = 0.0;
  double rho_W = 0.0;
  std::vector<double> rho_V;  // per sensor
  double rho_X_estimator = -1.0;  // radius of the estimator's search set; < 0 means rho_X

  double rho_V_max() const;
  void validate() const;
};

struct ContinuousModel {
  Matrix Ac;
  Matrix Bc;
  double Ts = 0.0;
};

// Zero-order-hold discretization. The returned C is empty (p = 0); callers
// attach sensor rows.
LinearSystem discretize(const ContinuousModel& model);

Vector step(const LinearSystem& sys, const Vector& x, const Vector& u, const Vector& w);

using Labels = Eigen::VectorXi;  // one entry per sensor

struct Reading {
  Vector z;
  Labels y;  // +1 / -1
};
Reading sense(const std::vector<BinarySensor>& sensors, const Vector& x, const Vector& v,
              bool assert_bounds = false);

// {-1,+1} <-> {0,1}
Labels to_bernoulli(const Labels& y);
Labels to_signed(const Labels& y);

// Switching instants per sensor, 1-based window positions k with y_k y_{k+1} < 0.
struct SwitchSets {
  std::vector<std::vector<int>> instants;
  int total() const;
  bool empty() const { return total() == 0; }
  bool operator==(const SwitchSets&) const = default;
};
SwitchSets detect_switchings(const std::vector<Labels>& outputs);

// Window of length N ending at t: inputs u_{t-N..t-1}, outputs y_{t-N..t}
// (N+1 entries), the prediction of x_{t-N}, and the switch sets of the outputs.
struct MheWindow {
  int N = 0;
  std::vector<Vector> inputs;
  std::vector<Labels> outputs;
  SwitchSets switch_sets;
  Vector prediction;

  static MheWindow make(std::vector<Vector> inputs, std::vector<Labels> outputs, Vector prediction);
  void validate(int n, int m, int p) const;
};

// Powers A^0..A^N, reused across windows.
std::vector<Matrix> matrix_powers(const Matrix& A, int N);

Matrix observability_matrix(const LinearSystem& sys, const SwitchSets& sets, int N);
Matrix observability_matrix(const std::vector<Matrix>& powers, const Matrix& C, const SwitchSets& sets);
double observability_measure(const Matrix& theta);

// A = I_q (x) Ad - gamma L (x) I_4, C = I_q (x) [0 0 1 0].
LinearSystem build_oscillator_network(const Matrix& Ad, const Matrix& laplacian, double gamma);
Matrix ring_laplacian(int q);

}  // namespace bms
