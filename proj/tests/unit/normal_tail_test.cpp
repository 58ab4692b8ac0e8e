#include "bms/normal_tail.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

TEST(NormalTail, LogTailMatchesQuadratureOnGrid) {
  double worst = 0.0;
  for (int k = -800; k <= 800; ++k) {
    const double s = 0.01 * k;
    worst = std::max(worst, std::abs(std::exp(bms::log_tail(s)) - oracle::normal_tail(s)));
  }
  EXPECT_LE(worst, 1e-7);
}

TEST(NormalTail, LogTailKeepsRelativeAccuracyDeepInTheTail) {
  for (double s = -5.0; s <= 35.0; s += 0.1) {
    const double ref = oracle::log_normal_tail(s);
    EXPECT_NEAR(bms::log_tail(s), ref, 1e-10 * (1.0 + std::abs(ref))) << s;
  }
}

TEST(NormalTail, ErfcAgreesWithStd) {
  for (double x = -6.0; x <= 26.0; x += 0.037) {
    const double ref = std::erfc(x);
    EXPECT_NEAR(bms::erfc_cody(x), ref, 1e-14 + 1e-13 * ref) << x;
  }
}

TEST(NormalTail, ScaledErfcStaysFiniteFarOut) {
  for (double x : {10.0, 100.0, 1e4, 1e8}) {
    // exp(x^2) erfc(x) ~ 1 / (x sqrt(pi))
    const double asym = 1.0 / (x * std::sqrt(std::numbers::pi));
    EXPECT_NEAR(bms::erfcx_cody(x) / asym, 1.0, 1.0 / (x * x));
  }
}

TEST(NormalTail, LogTailHasNoUnderflow) {
  for (double s : {40.0, 1e3, 1e6}) {
    const double v = bms::log_tail(s);
    EXPECT_TRUE(std::isfinite(v));
    // log Q(s) = -s^2/2 - log(s sqrt(2 pi)) + O(1/s^2)
    const double asym = -0.5 * s * s - std::log(s * std::sqrt(2.0 * std::numbers::pi));
    EXPECT_NEAR(v, asym, 2.0 / (s * s) * std::abs(asym) + 1e-9 * std::abs(asym));
  }
  EXPECT_NEAR(bms::log_tail(-40.0), 0.0, 1e-300);
}

TEST(NormalTail, InverseMillsIsMinusDerivativeOfLogTail) {
  const double h = 1e-5;
  for (double s = -10.0; s <= 30.0; s += 0.173) {
    const double fd = -(bms::log_tail(s + h) - bms::log_tail(s - h)) / (2.0 * h);
    EXPECT_NEAR(bms::inverse_mills(s), fd, 1e-6 * std::max(1.0, std::abs(fd))) << s;
  }
}

TEST(NormalTail, CurvatureIsSecondDerivativeAndBounded) {
  const double h = 1e-4;
  for (double s = -10.0; s <= 30.0; s += 0.173) {
    const double k = bms::log_tail_curvature(s);
    EXPECT_GE(k, 0.0);
    EXPECT_LE(k, 1.0);
    const double fd = (bms::inverse_mills(s + h) - bms::inverse_mills(s - h)) / (2.0 * h);
    EXPECT_NEAR(k, fd, 1e-6) << s;
  }
}

TEST(NormalTail, SymmetryAndHalf) {
  EXPECT_DOUBLE_EQ(bms::normal_tail(0.0), 0.5);
  for (double s = 0.0; s < 8.0; s += 0.25) EXPECT_NEAR(bms::normal_tail(s) + bms::normal_tail(-s), 1.0, 1e-15);
}

}  // namespace
