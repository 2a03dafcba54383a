#include "nscascade/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nscascade {

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

// |x| <= 1/2: terms fall below 2^-k / k^2, ~45 terms reach double precision.
double li2_series(double x)
{
    double sum = 0.0;
    double power = x;
    for (int k = 1; k < 200; ++k) {
        const double term = power / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) || term == 0.0) {
            break;
        }
        power *= x;
    }
    return sum;
}

} // namespace

double li2(double x)
{
    if (!(std::abs(x) <= 1.0)) {
        throw std::domain_error("li2: argument outside [-1, 1]: " + std::to_string(x));
    }
    if (x == 1.0) {
        return kPi2 / 6.0;
    }
    if (x == -1.0) {
        return -kPi2 / 12.0;
    }
    if (std::abs(x) <= 0.5) {
        return li2_series(x);
    }
    if (x > 0.5) {
        // Euler reflection.
        return kPi2 / 6.0 - std::log(x) * std::log1p(-x) - li2_series(1.0 - x);
    }
    // Landen: x in [-1, -1/2) maps to x/(x-1) in (1/3, 1/2].
    const double l = std::log1p(-x);
    return -li2_series(x / (x - 1.0)) - 0.5 * l * l;
}

double log_gamma(double x)
{
    if (!(x > 0.0)) {
        throw std::domain_error("log_gamma: argument must be positive");
    }
    return std::lgamma(x);
}

double sample_trunc_exp(double lo, double hi, RngStream& rng)
{
    if (!(lo >= 0.0) || !(hi > lo)) {
        throw std::invalid_argument("sample_trunc_exp: need 0 <= lo < hi");
    }
    const double u = rng.uniform();
    if (std::isinf(hi)) {
        return lo - std::log(u);
    }
    // CDF on [lo, hi]: (1 - e^{-(s-lo)}) / (1 - e^{-(hi-lo)}).
    const double mass = -std::expm1(-(hi - lo));
    const double s = lo - std::log1p(-u * mass);
    return std::clamp(s, lo, hi);
}

} // namespace nscascade
