#include "bms/bench/scenario.hpp"
#include "bms/block_tridiagonal.hpp"
#include "bms/fast_mhmap.hpp"
#include "bms/mhe_det.hpp"
#include "bms/mhe_map.hpp"
#include "bms/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using bms::Matrix;
using bms::Vector;
using namespace bms::bench;

// First window of oscillator trial 0.
struct OscillatorWindow {
  StateSpaceSetup setup;
  bms::MheWindow window;

  explicit OscillatorWindow(int N) {
    ScenarioConfig c = scenario_preset(ScenarioKind::oscillator);
    c.horizon = N;
    setup = build_state_space(c);
    const Trajectory tr = simulate_trial(c, setup, 0);
    window = bms::MheWindow::make({tr.u.begin(), tr.u.begin() + N}, {tr.y.begin(), tr.y.begin() + N + 1}, tr.prior);
  }
};

void BM_Lsmhe(benchmark::State& state) {
  const OscillatorWindow w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto e = bms::solve_lsmhe(bms::assemble_lsmhe(w.setup.sys, w.setup.sensors, w.window, w.setup.weights));
    benchmark::DoNotOptimize(e.states.data());
  }
}
BENCHMARK(BM_Lsmhe)->Arg(5)->Arg(20)->Arg(50)->Arg(100);

void BM_Pwmhe(benchmark::State& state) {
  const OscillatorWindow w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto e = bms::solve_pwmhe(w.setup.sys, w.setup.sensors, w.window, w.setup.weights);
    benchmark::DoNotOptimize(e.states.data());
  }
}
BENCHMARK(BM_Pwmhe)->Arg(5)->Arg(20)->Arg(50)->Arg(100);

// One MH-MAP window on the coarse (0) or fine (1) filter mesh.
void BM_MapWindow(benchmark::State& state) {
  ScenarioConfig c = scenario_preset(ScenarioKind::diffusion_field);
  c.filter_mesh = state.range(0) ? "fine" : "coarse";
  c.sensor_count = 10;
  c.steps = 10;
  const FieldSetup f = build_field(c);
  const auto truth = field_truth(c, f, 0);
  const auto labels = field_labels(c, f, truth, 0);
  std::vector<bms::Labels> y;
  for (int k = 0; k <= c.horizon; ++k) y.push_back(labels[static_cast<std::size_t>(k * f.stride)]);
  const auto priors = f.priors(c);
  const auto w = bms::MheWindow::make(std::vector<Vector>(static_cast<std::size_t>(c.horizon), Vector::Ones(1)), y,
                                      priors.x0_mean);
  const auto sys = f.filter_system();
  const auto sensors = f.filter_sensors(c.noise_variance);
  for (auto _ : state) {
    auto e = bms::solve_mh_map(sys, sensors, priors, w);
    benchmark::DoNotOptimize(e.states.data());
  }
}
BENCHMARK(BM_MapWindow)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GlobalFuse(benchmark::State& state) {
  const auto mesh = preset_mesh(state.range(0) ? "fine" : "coarse");
  const auto ops = bms::fem::assemble(mesh, 0.01, 30.0);
  const auto model = bms::fem::discretize_field(ops, 10.0);
  const auto rows = bms::fem::sensor_rows(mesh, random_points(3, 10));
  const int m = model.m();
  bms::fast::GlobalFuser fuser(model, rows, ops.gamma_bc, {Matrix::Identity(m, m), Matrix::Identity(m, m)});
  bms::fast::PseudoMeasurementSet ps;
  for (int k = 0; k <= 5; ++k) ps.sigma.push_back(Vector::Constant(10, 20.0));
  ps.Xi = Vector::Ones(10);
  const Vector pred = Vector::Constant(m, 5.0);
  for (auto _ : state) {
    auto e = fuser.fuse(ps, pred);
    benchmark::DoNotOptimize(e.states.data());
  }
}
BENCHMARK(BM_GlobalFuse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Factor and solve a 50-block system with n x n blocks.
void BM_BlockCholesky(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  bms::Rng rng(5);
  bms::BlockTridiagonal M(50, n);
  for (int k = 0; k < 50; ++k) {
    Matrix a(n, n);
    for (int i = 0; i < n * n; ++i) a.data()[i] = rng.uniform(-1.0, 1.0);
    M.diag(k) = a * a.transpose() + 3.0 * n * Matrix::Identity(n, n);
    if (k < 49) {
      for (int i = 0; i < n * n; ++i) a.data()[i] = rng.uniform(-1.0, 1.0);
      M.lower(k) = a;
    }
  }
  const Vector b = Vector::Ones(50 * n);
  for (auto _ : state) {
    bms::BlockTridiagonalCholesky chol(M);
    Vector x = chol.solve(b);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_BlockCholesky)->Arg(2)->Arg(4)->Arg(24)->Arg(97);

}  // namespace

BENCHMARK_MAIN();
