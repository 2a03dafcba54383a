#pragma once

#include <vector>

namespace nscascade {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// Appends the rule `base` (on [-1, 1]) mapped to [a, b] onto `out`.
void append_mapped(const QuadratureRule& base, double a, double b, QuadratureRule& out);

} // namespace nscascade
