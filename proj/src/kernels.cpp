#include "nscascade/kernels.hpp"

#include "nscascade/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nscascade {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRatioGuard = 1e-12;
constexpr double kRootTol = 1e-12;

double require_norm(const Wavenumber& v, const char* who)
{
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument(std::string(who) + ": degenerate wavenumber (|xi| must be positive and finite)");
    }
    return n;
}

// 1 - cos(phi) and 1 + cos(phi) from the law of cosines, each without cancellation.
double cosine_from_sides(double rho, double u, double s)
{
    const double d = std::abs(rho - u);
    const double one_minus = (s - d) * (s + d) / (2.0 * rho * u);
    const double one_plus = (rho + u - s) * (rho + u + s) / (2.0 * rho * u);
    const double c = one_minus < one_plus ? 1.0 - one_minus : one_plus - 1.0;
    return std::clamp(c, -1.0, 1.0);
}

} // namespace

KernelKind KernelKind::dilog() noexcept { return {KernelTag::Dilog, kPi * kPi * kPi}; }

KernelKind KernelKind::bessel() noexcept { return {KernelTag::Bessel, 2.0 * kPi}; }

KernelKind KernelKind::from_name(std::string_view name)
{
    if (name == "dilog") {
        return dilog();
    }
    if (name == "bessel") {
        return bessel();
    }
    throw std::invalid_argument("unknown kernel '" + std::string(name) + "' (expected dilog or bessel)");
}

std::string_view KernelKind::name() const noexcept
{
    return tag_ == KernelTag::Dilog ? "dilog" : "bessel";
}

double KernelKind::h(const Wavenumber& xi) const
{
    const double n = require_norm(xi, "KernelKind::h");
    return tag_ == KernelTag::Dilog ? 1.0 / (n * n) : std::exp(-n) / n;
}

double KernelKind::branch_multiplier(double nu) const
{
    if (!(nu > 0.0)) {
        throw std::invalid_argument("branch_multiplier: viscosity must be positive");
    }
    return star_constant_ / (nu * std::pow(2.0 * kPi, 1.5));
}

// ---- dilogarithmic kernel ---------------------------------------------------

double dilog_density(double r)
{
    if (!(r > 0.0)) {
        throw std::domain_error("dilog_density: r must be positive");
    }
    if (r == 1.0) {
        return kInf;
    }
    if (std::isinf(r)) {
        return 0.0;
    }
    // ln((1+r)/|1-r|) written to stay accurate for small r and for large r.
    const double l = r < 1.0 ? std::log1p(2.0 * r / (1.0 - r)) : std::log1p(2.0 / (r - 1.0));
    return 2.0 / kPi2 * l / r;
}

double dilog_cdf(double r)
{
    if (!(r >= 0.0)) {
        throw std::domain_error("dilog_cdf: r must be non-negative");
    }
    if (r == 0.0) {
        return 0.0;
    }
    if (std::isinf(r)) {
        return 1.0;
    }
    if (r <= 1.0) {
        return 2.0 / kPi2 * (li2(r) - li2(-r));
    }
    const double inv = 1.0 / r;
    return 1.0 - 2.0 / kPi2 * (li2(inv) - li2(-inv));
}

double dilog_lower_quantile(double p)
{
    if (!(p >= 0.0 && p <= 0.5)) {
        throw std::domain_error("dilog_lower_quantile: p must lie in [0, 1/2]");
    }
    if (p == 0.0) {
        return 0.0;
    }
    if (p == 0.5) {
        return 1.0;
    }
    // F is convex on (0, 1) with F'(0) = 4/pi^2; safeguarded Newton.
    double lo = 0.0;
    double hi = 1.0;
    double x = std::min(p * kPi2 / 4.0, 0.999);
    for (int it = 0; it < 200; ++it) {
        const double f = dilog_cdf(x) - p;
        if (f == 0.0) {
            return x;
        }
        (f < 0.0 ? lo : hi) = x;
        double next = x - f / dilog_density(x);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) < kRootTol || hi - lo < kRootTol) {
            return next;
        }
        x = next;
    }
    return x;
}

double sample_dilog_ratio(RngStream& rng)
{
    const double u = rng.uniform();
    const bool invert = rng.uniform() < 0.5;
    // P(|ln R| > l) = 2 F(e^{-l}); solve on the lower half and reflect.
    double x = dilog_lower_quantile(0.5 * u);
    x = std::min(x, 1.0 - kRatioGuard);
    return invert ? 1.0 / x : x;
}

double dilog_conditional_cosine(double r, double u)
{
    if (!(r > 0.0) || r == 1.0) {
        throw std::domain_error("dilog_conditional_cosine: r must be positive and != 1");
    }
    // r^2 + 1 - 2 r c = (1+r)^2 q^{2u},  q = |1-r|/(1+r).
    const double log_q = r < 1.0 ? std::log1p(-2.0 * r / (1.0 + r)) : std::log1p(-2.0 / (1.0 + r));
    const double a = 2.0 * u * log_q;
    const double numerator = -(1.0 + r) * (1.0 + r) * std::expm1(a) - 2.0 * r;
    return std::clamp(numerator / (2.0 * r), -1.0, 1.0);
}

OffspringPair offspring_from_polar(const Wavenumber& parent, double ratio, double cos_phi, double azimuth)
{
    const double n = require_norm(parent, "offspring_from_polar");
    const Frame fr = orthonormal_frame(parent * (1.0 / n));
    const double sin_phi = std::sqrt(std::max(0.0, (1.0 - cos_phi) * (1.0 + cos_phi)));
    const Vec3 dir = cos_phi * fr.e + sin_phi * (std::cos(azimuth) * fr.f + std::sin(azimuth) * fr.g);
    const Wavenumber w1 = (n * ratio) * dir;
    return {w1, parent - w1};
}

OffspringPair sample_dilog_offspring(const Wavenumber& parent, RngStream& rng)
{
    require_norm(parent, "sample_dilog_offspring");
    const double r = sample_dilog_ratio(rng);
    const double c = dilog_conditional_cosine(r, rng.uniform());
    const double psi = 2.0 * kPi * rng.uniform();
    return offspring_from_polar(parent, r, c, psi);
}

double htilde_density(double theta, double r)
{
    if (!(theta >= 0.0 && theta <= kPi) || !(r > 0.0)) {
        throw std::domain_error("htilde_density: need theta in [0, pi], r > 0");
    }
    const double denom = 1.0 - 2.0 * r * std::cos(theta) + r * r;
    if (denom <= 0.0) {
        return kInf;
    }
    return 2.0 / kPi2 * std::sin(theta) / denom;
}

// ---- Bessel kernel ----------------------------------------------------------

double bessel_radial_survival(double u, double r)
{
    if (!(u > 0.0)) {
        throw std::domain_error("bessel_radial_survival: u must be positive");
    }
    if (!(r >= 0.0)) {
        throw std::domain_error("bessel_radial_survival: r must be non-negative");
    }
    if (r >= u) {
        // e^{-2r} (e^{2u} - 1) / (2u), written without overflow.
        return std::exp(-2.0 * (r - u)) * (-std::expm1(-2.0 * u)) / (2.0 * u);
    }
    return 1.0 - (r / u + std::expm1(-2.0 * r) / (2.0 * u));
}

double bessel_radial_quantile(double u, double p)
{
    if (!(u > 0.0)) {
        throw std::domain_error("bessel_radial_quantile: u must be positive");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("bessel_radial_quantile: p must lie in (0, 1)");
    }
    const double surv_at_u = -std::expm1(-2.0 * u) / (2.0 * u);
    if (p >= 1.0 - surv_at_u) {
        const double s = 1.0 - p;
        return u - 0.5 * std::log(s / surv_at_u);
    }
    // CDF on [0, u]: (r - (1 - e^{-2r})/2) / u.  Solve g(r) = 0.
    const double target = p * u;
    auto g = [&](double r) { return r + 0.5 * std::expm1(-2.0 * r) - target; };
    double lo = 0.0;
    double hi = u;
    double r = std::min(std::sqrt(target), u);
    const double tol = kRootTol * std::max(u, 1e-300);
    for (int it = 0; it < 200; ++it) {
        const double f = g(r);
        if (f == 0.0) {
            return r;
        }
        (f < 0.0 ? lo : hi) = r;
        const double slope = -std::expm1(-2.0 * r);
        double next = slope > 0.0 ? r - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - r) < tol || hi - lo < tol) {
            return next;
        }
        r = next;
    }
    return r;
}

double sample_bessel_radius(double u, RngStream& rng)
{
    return bessel_radial_quantile(u, rng.uniform());
}

OffspringPair sample_bessel_offspring(const Wavenumber& parent, RngStream& rng)
{
    const double u = require_norm(parent, "sample_bessel_offspring");
    const double rho = sample_bessel_radius(u, rng);
    // Given |W1| = rho, s = |parent - W1| has density ~ e^{-s} on [|rho-u|, rho+u].
    const double s = sample_trunc_exp(std::abs(rho - u), rho + u, rng);
    const double c = cosine_from_sides(rho, u, s);
    const double psi = 2.0 * kPi * rng.uniform();
    return offspring_from_polar(parent, rho / u, c, psi);
}

OffspringPair sample_offspring(const KernelKind& kernel, const Wavenumber& parent, RngStream& rng)
{
    return kernel.tag() == KernelTag::Dilog ? sample_dilog_offspring(parent, rng)
                                            : sample_bessel_offspring(parent, rng);
}

} // namespace nscascade
