#pragma once

#include "nscascade/cascade.hpp"
#include "nscascade/kernels.hpp"
#include "nscascade/rng.hpp"
#include "nscascade/vec3.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nscascade {

using Complex = std::complex<double>;

/// Three complex Fourier coefficients.
struct CoeffVec {
    Complex x{}, y{}, z{};

    CoeffVec& operator+=(const CoeffVec& o) { x += o.x; y += o.y; z += o.z; return *this; }
    CoeffVec& operator-=(const CoeffVec& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    CoeffVec& operator*=(Complex s) { x *= s; y *= s; z *= s; return *this; }
    friend CoeffVec operator+(CoeffVec a, const CoeffVec& b) { return a += b; }
    friend CoeffVec operator-(CoeffVec a, const CoeffVec& b) { return a -= b; }
    friend CoeffVec operator*(Complex s, CoeffVec a) { return a *= s; }
    friend bool operator==(const CoeffVec&, const CoeffVec&) = default;

    Complex& operator[](int k) { return k == 0 ? x : (k == 1 ? y : z); }
    const Complex& operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }

    double norm() const;
    bool finite() const;
    static CoeffVec real(const Vec3& v) { return {v.x, v.y, v.z}; }
};

/// Bilinear dot product (no conjugation) of a real and a complex vector.
Complex dot(const Vec3& a, const CoeffVec& v);

/// v (.)_xi w = -i (e_xi . w) (v - (e_xi . v) e_xi).  Throws std::invalid_argument at xi = 0.
CoeffVec odot(const CoeffVec& v, const CoeffVec& w, const Wavenumber& xi);

/// Initial Fourier data u0(xi) together with its amplitude a and the kernel
/// used for the bound |u0(xi)| <= a h(xi).
class InitialData {
public:
    using Fn = std::function<CoeffVec(const Wavenumber&)>;

    /// a h(xi) f(e_xi), f the second vector of the stable frame at e_xi.
    static InitialData kernel_aligned(const KernelKind& kernel, double amplitude);
    /// a h(xi) (f + i g)/sqrt(2) at e_xi.
    static InitialData helical(const KernelKind& kernel, double amplitude);
    static InitialData zero(const KernelKind& kernel);
    static InitialData custom(std::string name, const KernelKind& kernel, double amplitude, Fn fn);
    /// "aligned", "helical" or "zero".
    static InitialData from_name(const std::string& name, const KernelKind& kernel, double amplitude);

    /// Evaluates u0(xi), enforcing the enabled checks (std::domain_error on violation).
    CoeffVec operator()(const Wavenumber& xi) const;

    const std::string& name() const noexcept { return name_; }
    double amplitude() const noexcept { return amplitude_; }
    const KernelKind& kernel() const noexcept { return kernel_; }

    bool require_divergence_free = false;
    bool require_bounded = false;
    /// Checks u0(-xi) = conj(u0(xi)) on evaluation.  Off by default.
    bool require_reality = false;

private:
    InitialData(std::string name, const KernelKind& kernel, double amplitude, Fn fn);
    std::string name_;
    KernelKind kernel_;
    double amplitude_;
    Fn fn_;
};

/// One replicate's normalized payoff X; meaningless when truncated.
struct Payoff {
    CoeffVec value;
    bool truncated = false;
    std::uint64_t pruned = 0;  ///< subtrees replaced by zero under the pruning rule
    double error_bound = 0.0;  ///< bound on |value - exact payoff| caused by pruning
};

struct EstimateReport {
    CoeffVec mean;                 ///< u-hat estimate, i.e. h(xi) times the mean payoff
    std::array<double, 3> std_error{}; ///< per component, complex standard error
    std::uint64_t replicates = 0;  ///< replicates used in the mean
    std::uint64_t truncated = 0;   ///< replicates excluded after hitting the budget
    double truncated_fraction = 0.0;
    double divergence_residual = 0.0; ///< max over replicates of |xi . X| / (|xi| |X|)
    std::uint64_t pruned = 0;      ///< pruned subtrees over all used replicates
    double prune_error_bound = 0.0;   ///< bound on the pruning error of `mean`
};

/// Optional pruning of subtrees whose effect on the root payoff is provably
/// small.  When every leaf satisfies |u0/h| <= a and multiplier * a <= 1, every
/// subtree payoff is bounded by a, so a subtree whose influence factor on the
/// root times a is at most `tol` can be replaced by zero with error at most
/// that product.  The bounds are summed and reported.  tol = 0 disables it.
struct Pruning {
    double tol = 0.0;
};

struct EstimateParams {
    double t = 1.0;
    Mode mode = Mode::NonThinned;
    double nu = 1.0;
    SimBudget budget{};
    std::uint64_t reps = 1000;
    int threads = 1;
    Pruning pruning{};
};

/// Normalized payoff X(xi, t) of one cascade replicate.
Payoff ns_payoff(const Wavenumber& xi, const EstimateParams& params, const InitialData& u0,
                 const KernelKind& kernel, CascadeDraws& draws);

/// Payoff of replicate i, i in [0, reps), streams (seed, i).  Output is indexed
/// by replicate and does not depend on params.threads.
std::vector<Payoff> ns_payoffs(const Wavenumber& xi, const EstimateParams& params, const InitialData& u0,
                               const KernelKind& kernel, std::uint64_t seed);

EstimateReport estimate_ns(const Wavenumber& xi, const EstimateParams& params, const InitialData& u0,
                           const KernelKind& kernel, std::uint64_t seed);

struct SelfSimilarParams {
    double lambda = 1.0;
    SimBudget budget{};
    std::uint64_t reps = 1000;
    int threads = 1;
    Pruning pruning{};
};

/// X~(e, lambda) for one replicate of the self-similar cascade (dilog offspring).
Payoff selfsimilar_payoff(const Vec3& e0, const SelfSimilarParams& params, const InitialData& u0,
                          CascadeDraws& draws);

std::vector<Payoff> selfsimilar_payoffs(const Vec3& e0, const SelfSimilarParams& params, const InitialData& u0,
                                        std::uint64_t seed);

EstimateReport estimate_selfsimilar(const Vec3& e0, const SelfSimilarParams& params, const InitialData& u0,
                                    std::uint64_t seed);

/// Mean, standard errors and diagnostics of payoffs, scaled by `scale`.
/// `direction` is the wavenumber whose orthogonality is checked.
EstimateReport summarize_payoffs(const std::vector<Payoff>& payoffs, double scale, const Vec3& direction);

/// Fourier-side Leray profile value U(sqrt(lambda) e) = u(e, lambda) / lambda.
struct LerayPoint {
    Vec3 point;
    CoeffVec value;
};
LerayPoint leray_profile(const Vec3& e, double lambda, const CoeffVec& u_selfsimilar);

} // namespace nscascade
