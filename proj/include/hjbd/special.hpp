#pragma once

// Special functions evaluated in forms that stay finite far into the tails.

namespace hjbd::special {

// Scaled complementary error function e^{z^2} erfc(z).
double erfcx(double z);

// log(erfc(z)) for any finite z.
double log_erfc(double z);

// log of the standard normal upper tail, log P(Z > z).
double log_normal_sf(double z);

// log(Phi(b) - Phi(a)) for a < b (either bound may be infinite).
double log_normal_interval(double a, double b);

// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

// Soft thresholding T(a, alpha): shrink a toward zero by alpha.
double soft_threshold(double a, double alpha);

}  // namespace hjbd::special
