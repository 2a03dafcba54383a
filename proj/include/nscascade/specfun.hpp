#pragma once

#include "nscascade/rng.hpp"

namespace nscascade {

/// Euler dilogarithm Li2(x) = sum_{k>=1} x^k / k^2 for real |x| <= 1.
/// Absolute error below 1e-14.  Throws std::domain_error for |x| > 1.
double li2(double x);

/// ln Gamma(x) for x > 0.  Throws std::domain_error otherwise.
double log_gamma(double x);

/// Draw from the density proportional to exp(-s) on [lo, hi] by inverse CDF.
/// hi may be +infinity.  Throws std::invalid_argument unless 0 <= lo < hi.
double sample_trunc_exp(double lo, double hi, RngStream& rng);

} // namespace nscascade
