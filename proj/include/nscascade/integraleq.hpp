#pragma once

#include "nscascade/quadrature.hpp"

#include <string>
#include <vector>

namespace nscascade {

/// Radial layout for the (r, theta) average of the angle-averaged dilog kernel.
/// The theta integral is done in closed form for piecewise-linear data, so only
/// r needs a rule: Gauss-Legendre panels on [0, 1/2], geometrically graded
/// panels toward r = 1 from both sides, and doubling panels out to r_max.
/// Mass beyond r_max is assigned to the flat-extension value.
struct QuadratureSpec {
    int gauss_order = 10;
    int singular_levels = 40;
    double r_max = 1e3;

    void validate() const;
};

struct RadialQuadrature {
    QuadratureRule rule;     ///< nodes r_k in (0, r_max) and weights
    double tail_mass = 0.0;  ///< P(R > r_max)
    /// sum_k w_k D(r_k) + tail_mass; equals the discrete double integral of H~.
    double normalization = 0.0;
};

RadialQuadrature build_radial_quadrature(const QuadratureSpec& spec);

/// Function values on nodes[0] = 0 < nodes[1] < ... with linear interpolation
/// and flat extension beyond the last node.
struct LambdaGrid {
    std::vector<double> nodes;
    std::vector<double> values;
    QuadratureSpec quadrature{};

    /// Throws std::invalid_argument unless the invariants hold (values in [0, 1] when `unit_range`).
    void validate(bool unit_range = true) const;
    double operator()(double lambda) const;
};

/// nodes lambda_max * (k / intervals)^power, all values equal to `value`.
/// power > 1 clusters nodes near 0, where m~ behaves like 1 - C sqrt(lambda).
LambdaGrid graded_grid(double lambda_max, int intervals, double power = 2.0, double value = 0.0);

/// graded_grid with power 1.
LambdaGrid uniform_grid(double lambda_max, int intervals, double value = 0.0);

/// The right-hand side e^{-lambda} + int_0^lambda e^{-(lambda-s)} G(s) ds with
/// G(s) = int int m(r^2 s) m((1 - 2 r cos theta + r^2) s) H~(theta, r) dr dtheta.
class MtildeOperator {
public:
    /// Throws std::runtime_error if the discrete kernel mass deviates from 1 by more than 1e-6.
    explicit MtildeOperator(const QuadratureSpec& spec = {}, int threads = 1);

    LambdaGrid apply(const LambdaGrid& g) const;
    /// G(s) for the interpolant of g.
    double kernel_average(const LambdaGrid& g, double s) const;

    const RadialQuadrature& radial() const noexcept { return radial_; }
    const QuadratureSpec& spec() const noexcept { return spec_; }

private:
    QuadratureSpec spec_;
    RadialQuadrature radial_;
    std::vector<double> log_ratio_;  ///< 2 ln|(1+r)/(1-r)| per node
    int threads_;
};

/// One application of the operator with the grid's own quadrature spec.
LambdaGrid apply_mtilde_operator(const LambdaGrid& g);

enum class PicardStart { Zero, One };

PicardStart picard_start_from_name(const std::string& name);

struct PicardOptions {
    PicardStart start = PicardStart::Zero;
    int max_iters = 500;
    double tol = 1e-8;
    int threads = 1;

    void validate() const;
};

struct PicardResult {
    LambdaGrid grid;              ///< nodes are lambda (or t for picard_m_ns)
    int iterations = 0;           ///< operator applications that changed the iterate
    double sup_residual = 0.0;    ///< max |Phi(v) - v| at the returned values
    bool converged = false;
    /// Zero start: iterates nondecreasing and within [0, 1].  One start: nonincreasing.
    bool monotone_flag = true;
    std::vector<double> first_iterate;
    std::vector<double> residual_history;
    /// The solution beyond the last node is the flat extension (an approximation).
    bool flat_extension = true;
};

/// Picard iteration v_{k+1} = Phi(v_k) on the given lambda nodes until the
/// sup-change drops below tol.  Non-convergence is reported, not raised.
PicardResult picard_mtilde(const std::vector<double>& lambda_nodes, const PicardOptions& options,
                           const QuadratureSpec& quadrature = {});

/// m(|xi|, t) on the given t nodes through lambda = |xi|^2 t; result nodes are t.
PicardResult picard_m_ns(double xi_mag, const std::vector<double>& t_nodes, const PicardOptions& options,
                         const QuadratureSpec& quadrature = {});

} // namespace nscascade
