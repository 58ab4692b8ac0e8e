#include "bms/bench/scenario.hpp"
#include "bms/error.hpp"
#include "bms/fast_mhmap.hpp"
#include "bms/fem_field.hpp"
#include "bms/optimize.hpp"
#include "bms/rng.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using bms::Labels;
using bms::Matrix;
using bms::Vector;
namespace fast = bms::fast;
namespace fem = bms::fem;

TEST(LocalModel, ShapesAndDisturbanceDensity) {
  const auto k0 = fast::LocalModel::make(0, 1.0, 0.5, 1e-2);
  EXPECT_EQ(k0.dim(), 1);
  EXPECT_NEAR(k0.G_tilde(0, 0), 2.0, 1e-15);
  const double Ts = 0.7, q = 0.3;
  const auto k1 = fast::LocalModel::make(1, Ts, q, 1e-2);
  EXPECT_EQ(k1.A_tilde, (Matrix(2, 2) << 1.0, Ts, 0.0, 1.0).finished());
  Matrix cov(2, 2);
  cov << std::pow(Ts, 3) / 3.0, Ts * Ts / 2.0, Ts * Ts / 2.0, Ts;
  EXPECT_LE((k1.G_tilde * (q * cov) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(fast::LocalModel::make(2, 1.0, 0.5, 1e-2), bms::ContractViolation);
}

bms::BinarySensor scalar_sensor(double tau, double r) {
  bms::BinarySensor s;
  s.row = Vector::Ones(1);
  s.threshold = tau;
  s.noise_variance = r;
  return s;
}

TEST(LocalStep, ProblemSizeIsKPlusOneTimesNPlusOne) {
  for (int K : {0, 1}) {
    const auto lm = fast::LocalModel::make(K, 1.0, 0.5, 1e-2);
    std::vector<Labels> y(8, Labels::Constant(1, 1));
    const auto e = fast::local_map_step(lm, scalar_sensor(3.0, 1.0), y, Vector::Zero(K + 1));
    EXPECT_EQ(e.variables, (K + 1) * 8);
    EXPECT_EQ(e.sigma.size(), 8u);
  }
}

TEST(LocalStep, AllOnesPushesAboveThreshold) {
  const auto lm = fast::LocalModel::make(0, 1.0, 0.5, 1e-6);
  std::vector<Labels> y(11, Labels::Constant(1, 1));
  const auto e = fast::local_map_step(lm, scalar_sensor(4.0, 0.5), y, Vector::Zero(1));
  for (double s : e.sigma) EXPECT_GT(s, 4.0);
}

TEST(LocalStep, AlternatingLabelsSitAtTheThresholdLikeTheGridOracle) {
  // nearly rigid local model: every chi_k is the same scalar c, so the cost
  // reduces to a 1-D function minimized here on a grid
  const double tau = 2.0, r = 0.4, arrival = 1e-2;
  const auto lm = fast::LocalModel::make(0, 1.0, 1e-4, arrival);
  std::vector<Labels> y;
  for (int k = 0; k <= 10; ++k) y.push_back(Labels::Constant(1, k % 2));
  const double prior = 1.5;
  const auto e = fast::local_map_step(lm, scalar_sensor(tau, r), y, Vector::Constant(1, prior));
  auto J = [&](double c) {
    double v = arrival * (c - prior) * (c - prior);
    for (const auto& l : y) v += oracle::neg_log_bernoulli(c, tau, r, l(0));
    return v;
  };
  double best = 0.0, best_v = 1e300;
  for (double c = 0.0; c <= 4.0; c += 1e-4)
    if (J(c) < best_v) best_v = J(c), best = c;
  for (double s : e.sigma) {
    EXPECT_NEAR(s, best, 1e-3);
    EXPECT_LT(std::abs(s - tau), std::sqrt(r));
  }
}

struct FuseSetup {
  fem::TriMesh mesh = bms::bench::preset_mesh("coarse");
  fem::FemOperators ops = fem::assemble(mesh, 0.01, 30.0);
  fem::FieldModel model = fem::discretize_field(ops, 10.0);
  std::vector<fem::SensorRow> rows;
  fast::GlobalWeights w;

  explicit FuseSetup(int p) {
    rows = fem::sensor_rows(mesh, bms::bench::random_points(3, p));
    w.Psi = 10.0 * Matrix::Identity(model.m(), model.m());
    w.Q = 5.0 * Matrix::Identity(model.m(), model.m());
  }
};

fast::PseudoMeasurementSet random_pseudo(bms::Rng& rng, int p, int N, double xi) {
  fast::PseudoMeasurementSet ps;
  for (int k = 0; k <= N; ++k) ps.sigma.push_back(oracle::random_vector(rng, p, 15.0).array() + 15.0);
  ps.Xi = Vector::Constant(p, xi);
  return ps;
}

TEST(GlobalFuse, ClosedFormMatchesIterativeMinimization) {
  FuseSetup s(10);
  bms::Rng rng(81);
  fast::GlobalFuser fuser(s.model, s.rows, s.ops.gamma_bc, s.w);
  const int N = 4;
  const auto ps = random_pseudo(rng, 10, N, 0.8);
  const Vector pred = Vector::Constant(s.model.m(), 5.0);
  const auto e = fuser.fuse(ps, pred);
  EXPECT_EQ(fuser.factorizations(), 1);
  bms::Objective f = [&](const Vector& X, Vector* g) { return fuser.cost_grad(ps, pred, X, g); };
  bms::QuasiNewtonOptions opt;
  opt.tolerance = 1e-10;
  opt.max_iterations = 20000;
  opt.memory = 30;
  const auto q = bms::quasi_newton_min_or_throw(f, Vector::Zero((N + 1) * s.model.m()), opt);
  EXPECT_LE((e.stacked() - q.x).cwiseAbs().maxCoeff(), 1e-8);
  Vector g;
  fuser.cost_grad(ps, pred, e.stacked(), &g);
  Vector g0;
  fuser.cost_grad(ps, pred, Vector::Zero(e.stacked().size()), &g0);
  EXPECT_LE(g.cwiseAbs().maxCoeff(), 1e-10 * g0.cwiseAbs().maxCoeff());
}

TEST(GlobalFuse, ZeroWeightsGivePurePropagation) {
  FuseSetup s(6);
  bms::Rng rng(82);
  const auto ps = random_pseudo(rng, 6, 3, 0.0);
  const Vector pred = oracle::random_vector(rng, s.model.m(), 3.0);
  const auto e = fast::global_fuse(s.model, s.rows, s.ops.gamma_bc, ps, pred, s.w);
  Vector x = pred;
  for (int k = 0; k <= 3; ++k) {
    EXPECT_LE((e.states[static_cast<std::size_t>(k)] - x).cwiseAbs().maxCoeff(), 1e-9);
    x = s.model.advance(x);
  }
}

TEST(GlobalFuse, HugeWeightsInterpolateAtCoveredVertices) {
  FuseSetup s(1);
  // one sensor on every free vertex
  std::vector<fem::Point> pts;
  for (int j = 0; j < s.mesh.m(); ++j) pts.push_back(s.mesh.vertices[static_cast<std::size_t>(j)]);
  s.rows = fem::sensor_rows(s.mesh, pts);
  bms::Rng rng(83);
  const int p = s.mesh.m();
  const auto ps = random_pseudo(rng, p, 2, 1e12);
  const auto e = fast::global_fuse(s.model, s.rows, s.ops.gamma_bc, ps, Vector::Zero(p), s.w);
  for (int k = 0; k <= 2; ++k)
    for (int i = 0; i < p; ++i) {
      const auto& r = s.rows[static_cast<std::size_t>(i)];
      const double got = r.C.dot(e.states[static_cast<std::size_t>(k)]) + r.D.dot(s.ops.gamma_bc);
      EXPECT_NEAR(got, ps.sigma[static_cast<std::size_t>(k)](i), 1e-6);
    }
}

TEST(FastFilter, OneLocalCallPerSensorAndOneFactorizationPerWindow) {
  FuseSetup s(5);
  std::vector<bms::BinarySensor> sensors;
  for (int i = 0; i < 5; ++i) sensors.push_back(scalar_sensor(5.0 + 4.0 * i, 1.0));
  for (auto& b : sensors) b.row = Vector::Zero(s.model.m());
  fast::FastFilterOptions opt;
  opt.horizon = 2;
  opt.aggregation = 4;
  opt.local_horizon = 3;
  fast::FastMhMapFilter f(s.model, s.rows, sensors, s.ops.gamma_bc, s.w, Vector::Constant(s.model.m(), 5.0), opt);
  bms::Rng rng(84);
  int windows = 0;
  for (int t = 0; t <= 40; ++t) {
    Labels y(5);
    for (int i = 0; i < 5; ++i) y(i) = rng.uniform() < 0.5;
    const long before = f.local_solver_calls();
    f.local_update(y);
    if (t > 0) EXPECT_EQ(f.local_solver_calls() - before, 5);
    if (t == 0 || t % 4 != 0) continue;
    const long fb = f.factorizations();
    if (f.fuse_tick()) {
      ++windows;
      EXPECT_EQ(f.factorizations() - fb, 1);
    }
  }
  EXPECT_EQ(windows, 10 - 2);
}

}  // namespace
