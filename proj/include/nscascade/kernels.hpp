#pragma once

#include "nscascade/rng.hpp"
#include "nscascade/vec3.hpp"

#include <string_view>

namespace nscascade {

enum class KernelTag { Dilog, Bessel };

/// Majorizing kernel h with its convolution constant c, h*h(xi) = c |xi| h(xi).
/// h_d(xi) = |xi|^-2 with c = pi^3; h_b(xi) = e^{-|xi|}/|xi| with c = 2 pi.
class KernelKind {
public:
    static KernelKind dilog() noexcept;
    static KernelKind bessel() noexcept;
    /// Accepts "dilog" or "bessel"; throws std::invalid_argument otherwise.
    static KernelKind from_name(std::string_view name);

    KernelTag tag() const noexcept { return tag_; }
    double star_constant() const noexcept { return star_constant_; }
    std::string_view name() const noexcept;

    /// h(xi); throws std::invalid_argument at xi = 0.
    double h(const Wavenumber& xi) const;

    /// Constant factor c / (nu (2 pi)^{3/2}) multiplying each branching in the
    /// normalized payoff recursion.  (pi/2)^{3/2}/nu for dilog, 1/(nu sqrt(2 pi)) for Bessel.
    double branch_multiplier(double nu = 1.0) const;

    friend bool operator==(const KernelKind&, const KernelKind&) = default;

private:
    KernelKind(KernelTag tag, double c) noexcept : tag_(tag), star_constant_(c) {}
    KernelTag tag_;
    double star_constant_;
};

/// Offspring wavenumbers; w1 + w2 equals the parent.
struct OffspringPair {
    Wavenumber w1;
    Wavenumber w2;
};

// ---- dilogarithmic kernel ---------------------------------------------------

/// Density of R = |W1|/|xi|: (2/pi^2) (1/r) ln|(1+r)/(1-r)|.  +inf at r = 1.
double dilog_density(double r);

/// P(R <= r), through Li2.
double dilog_cdf(double r);

/// Solves dilog_cdf(x) = p for p in [0, 1/2], x in [0, 1], to 1e-12 in x.
double dilog_lower_quantile(double p);

/// Draw R: |ln R| by root-finding on the CDF, then a fair sign.
double sample_dilog_ratio(RngStream& rng);

/// Inverse conditional CDF of cos(phi) given the ratio r, where
/// phi is the angle between W1 and the parent: density ~ 1 / (r^2 - 2 r c + 1) on [-1, 1].
double dilog_conditional_cosine(double r, double u);

OffspringPair sample_dilog_offspring(const Wavenumber& parent, RngStream& rng);

/// Angle-averaged H_d in (theta, r): (2/pi^2) sin(theta) / (1 - 2 r cos(theta) + r^2).
double htilde_density(double theta, double r);

// ---- Bessel kernel ----------------------------------------------------------

/// P(|W1| > r) given |parent| = u.
double bessel_radial_survival(double u, double r);

/// Inverse of the radial CDF (closed form beyond u, root-finding below).
double bessel_radial_quantile(double u, double p);

double sample_bessel_radius(double u, RngStream& rng);

OffspringPair sample_bessel_offspring(const Wavenumber& parent, RngStream& rng);

// ---- dispatch ---------------------------------------------------------------

OffspringPair sample_offspring(const KernelKind& kernel, const Wavenumber& parent, RngStream& rng);

/// W1 = |parent| * ratio * (cos phi e + sin phi (cos psi f + sin psi g)), W2 = parent - W1.
OffspringPair offspring_from_polar(const Wavenumber& parent, double ratio, double cos_phi, double azimuth);

} // namespace nscascade
