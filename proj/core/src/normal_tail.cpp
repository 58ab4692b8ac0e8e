#include "bms/normal_tail.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace bms {

namespace {

constexpr std::array<double, 5> a = {3.1611237438705656, 113.864154151050156, 377.485237685302021,
                                     3209.37758913846947, .185777706184603153};
constexpr std::array<double, 4> b = {23.6012909523441209, 244.024637934444173, 1282.61652607737228,
                                     2844.23683343917062};
constexpr std::array<double, 9> c = {.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                                     298.635138197400131, 881.95222124176909,  1712.04761263407058,
                                     2051.07837782607147, 1230.33935479799725, 2.15311535474403846e-8};
constexpr std::array<double, 8> d = {15.7449261107098347, 117.693950891312499, 537.181101862009858,
                                     1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
                                     3439.36767414372164, 1230.33935480374942};
constexpr std::array<double, 6> p = {.305326634961232344, .360344899949804439, .125781726111229246,
                                     .0160837851487422766, 6.58749161529837803e-4, .0163153871373020978};
constexpr std::array<double, 5> q = {2.56852019228982242, 1.87295284992346047, .527905102951428412,
                                     .0605183413124413191, .00233520497626869185};
constexpr double thresh = .46875;
constexpr double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
constexpr double xhuge = 6.71e7;

// erfc(y) for y >= 0, optionally scaled by exp(y^2).
double erfc_positive(double y, bool scaled) {
  double result;
  if (y <= thresh) {
    const double ysq = y > 1.11e-16 ? y * y : 0.0;
    double xnum = a[4] * ysq, xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    result = 1.0 - y * (xnum + a[3]) / (xden + b[3]);
    return scaled ? std::exp(ysq) * result : result;
  }
  if (y <= 4.0) {
    double xnum = c[8] * y, xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
  } else {
    if (y >= xhuge) return scaled ? sqrpi / y : 0.0;
    const double ysq = 1.0 / (y * y);
    double xnum = p[5] * ysq, xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + p[i]) * ysq;
      xden = (xden + q[i]) * ysq;
    }
    result = ysq * (xnum + p[4]) / (xden + q[4]);
    result = (sqrpi - result) / y;
  }
  if (scaled) return result;
  // exp(-y^2) split to keep the low bits of y^2
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del) * result;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSqrt2OverPi = 0.79788456080286535588;

// log Q(s) for s > 8 from the asymptotic expansion
// Q(s) ~ phi(s)/s * (1 - 1/s^2 + 3/s^4 - 15/s^6 + ...).
double log_tail_asymptotic(double s) {
  const double inv2 = 1.0 / (s * s);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    const double next = -term * static_cast<double>(2 * k - 1) * inv2;
    if (std::abs(next) >= std::abs(term)) break;  // series started diverging
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
  }
  return -0.5 * s * s - std::log(s) - kLogSqrt2Pi + std::log(sum);
}

}  // namespace

double erfc_cody(double x) {
  const double r = erfc_positive(std::abs(x), false);
  return x < 0.0 ? 2.0 - r : r;
}

double erfcx_cody(double x) {
  if (x >= 0.0) return erfc_positive(x, true);
  // 2 exp(x^2) - erfcx(|x|), with exp(x^2) split as above
  const double y = -x;
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  const double e = std::exp(ysq * ysq) * std::exp(del);
  return (e + e) - erfc_positive(y, true);
}

double normal_tail(double s) { return 0.5 * erfc_cody(s * kInvSqrt2); }

double log_tail(double s) {
  if (s > 8.0) return log_tail_asymptotic(s);
  if (s >= 0.0) {
    const double x = s * kInvSqrt2;
    return std::log(0.5 * erfc_positive(x, true)) - x * x;
  }
  if (s >= -8.0) return std::log1p(-0.5 * erfc_positive(-s * kInvSqrt2, false));
  return std::log1p(-std::exp(log_tail(-s)));
}

double inverse_mills(double s) {
  if (s >= 0.0) return kSqrt2OverPi / erfc_positive(s * kInvSqrt2, true);
  const double pdf = std::exp(-0.5 * s * s - kLogSqrt2Pi);
  return pdf / (1.0 - 0.5 * erfc_positive(-s * kInvSqrt2, false));
}

double log_tail_curvature(double s) {
  const double lam = inverse_mills(s);
  return std::clamp(lam * (lam - s), 0.0, 1.0);
}

}  // namespace bms
