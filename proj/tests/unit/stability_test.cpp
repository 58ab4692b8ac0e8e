#include "bms/bench/scenario.hpp"
#include "bms/error.hpp"
#include "bms/rng.hpp"
#include "bms/stability.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using bms::Matrix;
using bms::Vector;

struct LedgerCase {
  bms::LinearSystem sys = bms::bench::oscillator_system(0.1);
  bms::MheWeights w{Matrix::Identity(4, 4), Matrix::Identity(4, 4), Vector::Ones(1)};
  bms::BoundedSets bounds{3.0, 0.0, 0.0, {0.05}};
};

TEST(Ledger, AsymptoticBoundOnlyWhenContracting) {
  LedgerCase s;
  for (double eps : {1e-1, 1e-4, 1e-8, 1e-12}) {
    auto w = s.w;
    w.P *= eps;
    const auto L = bms::stability_ledger(s.sys, w, s.bounds, 0.12, 100, 10.0);
    if (L.a1 < 1.0) {
      ASSERT_TRUE(L.e_inf.has_value());
      EXPECT_NEAR(*L.e_inf, std::sqrt(L.a2 / (1.0 - L.a1)), 1e-12 * *L.e_inf);
    } else {
      EXPECT_FALSE(L.e_inf.has_value());
    }
    EXPECT_NEAR(L.bound(2.0), L.a1 * 2.0 + L.a2, 1e-12 * (1.0 + L.a2));
  }
}

TEST(Ledger, ContractionImprovesAsArrivalWeightShrinks) {
  LedgerCase s;
  double prev = std::numeric_limits<double>::infinity();
  for (int e = -1; e >= -12; --e) {
    auto w = s.w;
    w.P *= std::pow(10.0, e);
    const double a1 = bms::stability_ledger(s.sys, w, s.bounds, 0.12, 100, 10.0).a1;
    EXPECT_LT(a1, prev);
    prev = a1;
  }
}

TEST(Ledger, NormOfAIsSpectral) {
  LedgerCase s;
  const auto L = bms::stability_ledger(s.sys, s.w, s.bounds, 0.1, 10, 1.0);
  Eigen::JacobiSVD<Matrix> svd(s.sys.A);
  EXPECT_NEAR(L.norm_A, svd.singularValues()(0), 1e-9);
  EXPECT_EQ(L.L_bar, 1.0);
}

TEST(TuneEpsilon, LargestPowerOfTenWithContraction) {
  LedgerCase s;
  const double eps = bms::tune_epsilon(s.sys, s.w, s.bounds, 0.12, 100, 10.0);
  auto at = [&](double e) {
    auto w = s.w;
    w.P *= e;
    return bms::stability_ledger(s.sys, w, s.bounds, 0.12, 100, 10.0).a1;
  };
  EXPECT_LT(at(eps), 1.0);
  EXPECT_GE(at(10.0 * eps), 1.0);
  EXPECT_LE(eps, 1e-4);
  EXPECT_THROW(bms::tune_epsilon(s.sys, s.w, s.bounds, 0.0, 100, 10.0), bms::NoObservability);
}

TEST(NoiseGain, MatchesSimulatedNoiseMap) {
  bms::Rng rng(61);
  const auto sys = bms::bench::oscillator_system(0.1);
  const Matrix C = (Matrix(2, 4) << 0, 0, 1, 0, 1, 0, 0, 0).finished();
  const int N = 12;
  const int n = 4;
  const auto powers = bms::matrix_powers(sys.A, N);
  for (int trial = 0; trial < 20; ++trial) {
    bms::SwitchSets sets;
    sets.instants.resize(2);
    for (int i = 0; i < 2; ++i)
      for (int k = 1; k <= N; ++k)
        if (rng.uniform() < 0.3) sets.instants[static_cast<std::size_t>(i)].push_back(k);
    double ref = 0.0;
    for (int i = 0; i < 2; ++i) {
      const auto& inst = sets.instants[static_cast<std::size_t>(i)];
      if (inst.empty()) continue;
      // column j: response of the instants' outputs to a unit entry of the stacked noise
      Matrix D(static_cast<Eigen::Index>(inst.size()), n * (N + 1));
      for (int j = 0; j < n * (N + 1); ++j) {
        std::vector<Vector> x(static_cast<std::size_t>(N + 1), Vector::Zero(n));
        for (int k = 0; k < N; ++k) {
          Vector wk = Vector::Zero(n);
          if (j / n == k) wk(j % n) = 1.0;
          x[static_cast<std::size_t>(k + 1)] = sys.A * x[static_cast<std::size_t>(k)] + wk;
        }
        for (std::size_t r = 0; r < inst.size(); ++r)
          D(static_cast<Eigen::Index>(r), j) = C.row(i).dot(x[static_cast<std::size_t>(inst[r] - 1)]);
      }
      if (D.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::JacobiSVD<Matrix> svd(D);
        ref = std::max(ref, svd.singularValues()(0));
      }
    }
    EXPECT_NEAR(bms::noise_gain(powers, C, sets, N), ref, 1e-10 * (1.0 + ref));
  }
}

}  // namespace
