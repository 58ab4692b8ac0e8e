#pragma once

// Random estimation problems shared by the unit tests and the acceptance run.

#include "bms/mhe_det.hpp"
#include "bms/mhe_map.hpp"
#include "bms/rng.hpp"

#include "oracles.hpp"

#include <vector>

namespace oracle {

struct Instance {
  bms::LinearSystem sys;
  std::vector<bms::BinarySensor> sensors;
  std::vector<double> tau;
  bms::MheWeights w;
  std::vector<Vector> u;
  std::vector<Labels> y;
  Vector prediction;
  bms::MheWindow window;

  double lsmhe(const Vector& X) const {
    return oracle::lsmhe_cost(sys, w.P, w.Q, w.R, tau, u, y, prediction, X);
  }
  double pwmhe(const Vector& X) const {
    return oracle::pwmhe_cost(sys, w.P, w.Q, w.R, tau, u, y, prediction, X);
  }
  int dim() const { return sys.n() * (window.N + 1); }
};

inline Instance random_instance(bms::Rng& rng, int n, int m, int p, int N, double flip = 0.3) {
  Instance I;
  I.sys = bms::LinearSystem(oracle::random_matrix(rng, n, n, 0.6), oracle::random_matrix(rng, n, m),
                            oracle::random_matrix(rng, p, n));
  for (int i = 0; i < p; ++i) I.tau.push_back(rng.uniform(-0.5, 0.5));
  I.sensors = bms::make_sensors(I.sys.C, I.tau, 0.0, 1.0);
  I.w.P = oracle::random_spd(rng, n, 0.5, 5.0);
  I.w.Q = oracle::random_spd(rng, n, 0.5, 5.0);
  I.w.R = Vector(p);
  for (int i = 0; i < p; ++i) I.w.R(i) = rng.uniform(0.5, 5.0);
  for (int k = 0; k < N; ++k) I.u.push_back(oracle::random_vector(rng, m));
  Labels prev(p);
  for (int i = 0; i < p; ++i) prev(i) = rng.uniform() < 0.5 ? 1 : -1;
  for (int k = 0; k <= N; ++k) {
    Labels l = prev;
    for (int i = 0; i < p; ++i)
      if (rng.uniform() < flip) l(i) = -l(i);
    I.y.push_back(l);
    prev = l;
  }
  I.prediction = oracle::random_vector(rng, n, 2.0);
  I.window = bms::MheWindow::make(I.u, I.y, I.prediction);
  return I;
}

struct MapInstance {
  bms::LinearSystem sys;
  std::vector<bms::BinarySensor> sensors;
  bms::GaussianPriors priors;
  std::vector<Vector> u;
  std::vector<Labels> y;  // 0/1
  bms::MheWindow window;

  int dim() const { return sys.n() * (window.N + 1); }
  double cost(const Vector& X, Vector* g = nullptr) const {
    return bms::map_cost_grad(sys, sensors, priors, window, X, g);
  }
  Vector grad(const Vector& X) const {
    Vector g;
    cost(X, &g);
    return g;
  }
  // independent value: quadrature likelihoods and explicit sums
  double oracle_cost(const Vector& X) const {
    double J = oracle::arrival_and_dynamics(sys, priors.arrival(), priors.G, u, window.prediction, X);
    const int n = sys.n();
    for (std::size_t k = 0; k < y.size(); ++k)
      for (std::size_t i = 0; i < sensors.size(); ++i)
        J += oracle::neg_log_bernoulli(sensors[i].row.dot(oracle::block(X, static_cast<int>(k), n)),
                                       sensors[i].threshold, sensors[i].noise_variance,
                                       y[k](static_cast<Eigen::Index>(i)));
    return J;
  }
};

inline MapInstance random_map(bms::Rng& rng, int n, int p, int N) {
  MapInstance I;
  I.sys = bms::LinearSystem(oracle::random_matrix(rng, n, n, 0.6), oracle::random_matrix(rng, n, 1),
                            oracle::random_matrix(rng, p, n));
  for (int i = 0; i < p; ++i) {
    bms::BinarySensor s;
    s.row = I.sys.C.row(i).transpose();
    s.threshold = rng.uniform(-1.0, 1.0);
    s.noise_variance = rng.uniform(0.05, 2.0);
    I.sensors.push_back(s);
  }
  I.priors.x0_mean = oracle::random_vector(rng, n);
  I.priors.P = oracle::random_spd(rng, n, 0.5, 3.0);
  I.priors.G = oracle::random_spd(rng, n, 0.5, 3.0);
  for (int k = 0; k < N; ++k) I.u.push_back(oracle::random_vector(rng, 1));
  for (int k = 0; k <= N; ++k) {
    Labels l(p);
    for (int i = 0; i < p; ++i) l(i) = rng.uniform() < 0.5 ? 1 : 0;
    I.y.push_back(l);
  }
  I.window = bms::MheWindow::make(I.u, I.y, I.priors.x0_mean);
  return I;
}

}  // namespace oracle
