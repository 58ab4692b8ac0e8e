#pragma once

namespace bms {

// Complementary error function and its scaled form exp(x^2) erfc(x), from
// W. J. Cody's rational Chebyshev approximations.
double erfc_cody(double x);
double erfcx_cody(double x);

// Standard normal tail Q(s) = P(Z > s).
double normal_tail(double s);
// log Q(s) without underflow for large s.
double log_tail(double s);
// phi(s) / Q(s), the derivative of -log Q.
double inverse_mills(double s);
// lambda(s) (lambda(s) - s) = -d^2/ds^2 log Q(s), in [0, 1].
double log_tail_curvature(double s);

}  // namespace bms
