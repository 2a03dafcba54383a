#include "nscascade/integraleq.hpp"

#include "nscascade/kernels.hpp"
#include "nscascade/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nscascade {

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
constexpr double kRangeSlack = 1e-6;

// Piecewise-linear m on the grid together with the primitive
// P(y) = int_0^y (m(y') - m(0)) / y' dy', exact for the interpolant.
class LogPrimitive {
public:
    explicit LogPrimitive(const LambdaGrid& g) : y_(g.nodes), v_(g.values)
    {
        const std::size_t n = y_.size();
        m0_ = v_[0];
        slope_.resize(n - 1);
        cum_.assign(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = y_[i + 1] - y_[i];
            slope_[i] = (v_[i + 1] - v_[i]) / h;
            cum_[i + 1] = cum_[i] + cell_integral(i, y_[i + 1]);
        }
    }

    double value(double y) const
    {
        if (y >= y_.back()) {
            return v_.back();
        }
        const std::size_t i = cell(y);
        return v_[i] + slope_[i] * (y - y_[i]);
    }

    double primitive(double y) const
    {
        if (y <= 0.0) {
            return 0.0;
        }
        if (y >= y_.back()) {
            return cum_.back() + (v_.back() - m0_) * std::log(y / y_.back());
        }
        const std::size_t i = cell(y);
        return cum_[i] + cell_integral(i, y);
    }

    double m0() const noexcept { return m0_; }

private:
    std::size_t cell(double y) const
    {
        const auto it = std::upper_bound(y_.begin(), y_.end(), y);
        return static_cast<std::size_t>(it - y_.begin()) - 1;
    }

    // Integral of (m - m0)/y over [y_i, y] inside cell i; the first cell
    // starts at 0 where the line passes through m0.
    double cell_integral(std::size_t i, double y) const
    {
        if (i == 0) {
            return slope_[0] * y;
        }
        const double intercept = v_[i] - slope_[i] * y_[i];
        return (intercept - m0_) * std::log(y / y_[i]) + slope_[i] * (y - y_[i]);
    }

    const std::vector<double>& y_;
    const std::vector<double>& v_;
    double m0_ = 0.0;
    std::vector<double> slope_;
    std::vector<double> cum_;
};

// G(s): closed-form theta integral per radial node, Gauss weights in r, and
// the mass beyond r_max evaluated at r_max.
double average(const LogPrimitive& m, const RadialQuadrature& radial, const std::vector<double>& log_ratio,
               double r_max, double s)
{
    const auto& r = radial.rule.nodes;
    const auto& w = radial.rule.weights;
    double total = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double lo = (1.0 - r[k]) * (1.0 - r[k]) * s;
        const double hi = (1.0 + r[k]) * (1.0 + r[k]) * s;
        const double inner = m.primitive(hi) - m.primitive(lo) + m.m0() * log_ratio[k];
        total += w[k] * m.value(r[k] * r[k] * s) * inner / (kPi2 * r[k]);
    }
    const double far = m.value(r_max * r_max * s);
    return total + radial.tail_mass * far * far;
}

} // namespace

void QuadratureSpec::validate() const
{
    if (gauss_order < 1 || gauss_order > 200) {
        throw std::invalid_argument("gauss_order must lie in [1, 200]");
    }
    if (singular_levels < 1 || singular_levels > 50) {
        throw std::invalid_argument("singular_levels must lie in [1, 50]");
    }
    if (!(r_max > 2.0) || !std::isfinite(r_max)) {
        throw std::invalid_argument("r_max must be finite and greater than 2");
    }
}

RadialQuadrature build_radial_quadrature(const QuadratureSpec& spec)
{
    spec.validate();
    const QuadratureRule base = gauss_legendre(spec.gauss_order);
    RadialQuadrature q;
    const int levels = spec.singular_levels;
    append_mapped(base, 0.0, 0.5, q.rule);
    for (int k = 0; k < levels; ++k) {
        append_mapped(base, 1.0 - 0.5 * std::ldexp(1.0, -k), 1.0 - 0.5 * std::ldexp(1.0, -k - 1), q.rule);
    }
    append_mapped(base, 1.0 - 0.5 * std::ldexp(1.0, -levels), 1.0, q.rule);
    append_mapped(base, 1.0, 1.0 + std::ldexp(1.0, -levels), q.rule);
    for (int k = levels; k > 0; --k) {
        append_mapped(base, 1.0 + std::ldexp(1.0, -k), 1.0 + std::ldexp(1.0, -k + 1), q.rule);
    }
    double a = 2.0;
    while (a < spec.r_max) {
        const double b = std::min(2.0 * a, spec.r_max);
        append_mapped(base, a, b, q.rule);
        a = b;
    }
    q.tail_mass = 1.0 - dilog_cdf(spec.r_max);
    double total = 0.0;
    for (std::size_t k = 0; k < q.rule.nodes.size(); ++k) {
        total += q.rule.weights[k] * dilog_density(q.rule.nodes[k]);
    }
    q.normalization = total + q.tail_mass;
    return q;
}

// ---- grids ------------------------------------------------------------------

void LambdaGrid::validate(bool unit_range) const
{
    if (nodes.size() < 2 || nodes.size() != values.size()) {
        throw std::invalid_argument("grid needs at least two nodes and one value per node");
    }
    if (nodes[0] != 0.0) {
        throw std::invalid_argument("grid must start at 0");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1]) || !std::isfinite(nodes[i])) {
            throw std::invalid_argument("grid nodes must be finite and strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v) || (unit_range && (v < -kRangeSlack || v > 1.0 + kRangeSlack))) {
            throw std::invalid_argument("grid values must lie in [0, 1]");
        }
    }
    quadrature.validate();
}

double LambdaGrid::operator()(double lambda) const
{
    if (lambda >= nodes.back()) {
        return values.back();
    }
    if (lambda <= nodes.front()) {
        return values.front();
    }
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), lambda);
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    const double w = (lambda - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return values[i] + w * (values[i + 1] - values[i]);
}

LambdaGrid graded_grid(double lambda_max, int intervals, double power, double value)
{
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
        throw std::invalid_argument("lambda_max must be positive and finite");
    }
    if (intervals < 1) {
        throw std::invalid_argument("grid needs at least one interval");
    }
    if (!(power >= 1.0) || power > 4.0) {
        throw std::invalid_argument("grid power must lie in [1, 4]");
    }
    LambdaGrid g;
    g.nodes.resize(static_cast<std::size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) {
        const double x = static_cast<double>(k) / intervals;
        g.nodes[k] = lambda_max * (power == 1.0 ? x : std::pow(x, power));
    }
    g.nodes.back() = lambda_max;
    g.values.assign(g.nodes.size(), value);
    return g;
}

LambdaGrid uniform_grid(double lambda_max, int intervals, double value)
{
    return graded_grid(lambda_max, intervals, 1.0, value);
}

// ---- operator -----------------------------------------------------------------

MtildeOperator::MtildeOperator(const QuadratureSpec& spec, int threads)
    : spec_(spec), radial_(build_radial_quadrature(spec)), threads_(threads)
{
    if (std::abs(radial_.normalization - 1.0) > 1e-6) {
        throw std::runtime_error("discrete kernel mass " + std::to_string(radial_.normalization) +
                                 " deviates from 1 by more than 1e-6; refine the quadrature");
    }
    log_ratio_.reserve(radial_.rule.nodes.size());
    for (double r : radial_.rule.nodes) {
        const double l = r < 1.0 ? std::log1p(2.0 * r / (1.0 - r)) : std::log1p(2.0 / (r - 1.0));
        log_ratio_.push_back(2.0 * l);
    }
}

double MtildeOperator::kernel_average(const LambdaGrid& g, double s) const
{
    g.validate();
    return average(LogPrimitive(g), radial_, log_ratio_, spec_.r_max, s);
}

LambdaGrid MtildeOperator::apply(const LambdaGrid& g) const
{
    g.validate();
    const LogPrimitive m(g);
    const auto& lam = g.nodes;
    const std::size_t n = lam.size();
    std::vector<double> big_g(n);
    parallel_for(n, threads_, [&](std::size_t i) {
        big_g[i] = average(m, radial_, log_ratio_, spec_.r_max, lam[i]);
    });

    // s-integral with exact exponential weights for the linear interpolant of G.
    LambdaGrid out = g;
    double acc = 0.0;
    out.values[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double h = lam[i] - lam[i - 1];
        const double decay = std::exp(-h);
        const double e0 = -std::expm1(-h);
        const double e1 = e0 - h * decay;
        acc = decay * acc + (e1 / h) * big_g[i - 1] + (e0 - e1 / h) * big_g[i];
        out.values[i] = std::exp(-lam[i]) + acc;
    }
    return out;
}

LambdaGrid apply_mtilde_operator(const LambdaGrid& g)
{
    return MtildeOperator(g.quadrature).apply(g);
}

// ---- Picard ----------------------------------------------------------------------

PicardStart picard_start_from_name(const std::string& name)
{
    if (name == "zero") {
        return PicardStart::Zero;
    }
    if (name == "one") {
        return PicardStart::One;
    }
    throw std::invalid_argument("unknown Picard start '" + name + "' (expected zero or one)");
}

void PicardOptions::validate() const
{
    if (!(tol > 0.0)) {
        throw std::invalid_argument("tol must be positive");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("max_iters must be at least 1");
    }
}

PicardResult picard_mtilde(const std::vector<double>& lambda_nodes, const PicardOptions& options,
                           const QuadratureSpec& quadrature)
{
    options.validate();
    const MtildeOperator op(quadrature, options.threads);
    PicardResult res;
    res.grid.nodes = lambda_nodes;
    res.grid.values.assign(lambda_nodes.size(), options.start == PicardStart::Zero ? 0.0 : 1.0);
    res.grid.quadrature = quadrature;
    res.grid.validate();
    const bool up = options.start == PicardStart::Zero;
    constexpr double slack = 1e-12;
    for (int k = 0; k < options.max_iters; ++k) {
        const LambdaGrid next = op.apply(res.grid);
        double change = 0.0;
        for (std::size_t i = 0; i < next.values.size(); ++i) {
            const double v = res.grid.values[i];
            const double nv = next.values[i];
            change = std::max(change, std::abs(nv - v));
            const bool ordered = up ? nv >= v - slack : nv <= v + slack;
            if (!ordered || nv < -slack || nv > 1.0 + slack) {
                res.monotone_flag = false;
            }
        }
        if (k == 0) {
            res.first_iterate = next.values;
        }
        res.residual_history.push_back(change);
        res.sup_residual = change;
        if (change < options.tol) {
            res.converged = true;
            return res;
        }
        res.grid.values = next.values;
        res.iterations = k + 1;
    }
    return res;
}

PicardResult picard_m_ns(double xi_mag, const std::vector<double>& t_nodes, const PicardOptions& options,
                         const QuadratureSpec& quadrature)
{
    if (!(xi_mag > 0.0) || !std::isfinite(xi_mag)) {
        throw std::invalid_argument("|xi| must be positive and finite");
    }
    std::vector<double> lam(t_nodes.size());
    for (std::size_t i = 0; i < t_nodes.size(); ++i) {
        lam[i] = xi_mag * xi_mag * t_nodes[i];
    }
    PicardResult res = picard_mtilde(lam, options, quadrature);
    res.grid.nodes = t_nodes;
    return res;
}

} // namespace nscascade
