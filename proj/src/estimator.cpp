#include "nscascade/estimator.hpp"

#include "nscascade/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace nscascade {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

double coeff_norm2(const CoeffVec& v)
{
    return std::norm(v.x) + std::norm(v.y) + std::norm(v.z);
}

} // namespace

double CoeffVec::norm() const { return std::sqrt(coeff_norm2(*this)); }

bool CoeffVec::finite() const
{
    for (int k = 0; k < 3; ++k) {
        if (!std::isfinite((*this)[k].real()) || !std::isfinite((*this)[k].imag())) {
            return false;
        }
    }
    return true;
}

Complex dot(const Vec3& a, const CoeffVec& v) { return a.x * v.x + a.y * v.y + a.z * v.z; }

CoeffVec odot(const CoeffVec& v, const CoeffVec& w, const Wavenumber& xi)
{
    const double n = xi.norm();
    if (!(n > 0.0)) {
        throw std::invalid_argument("odot: xi must be nonzero");
    }
    const Vec3 e = xi * (1.0 / n);
    const Complex ew = dot(e, w);
    const Complex ev = dot(e, v);
    CoeffVec proj{v.x - ev * e.x, v.y - ev * e.y, v.z - ev * e.z};
    return (kMinusI * ew) * proj;
}

// ---- initial data -----------------------------------------------------------

InitialData::InitialData(std::string name, const KernelKind& kernel, double amplitude, Fn fn)
    : name_(std::move(name)), kernel_(kernel), amplitude_(amplitude), fn_(std::move(fn))
{
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument("initial data amplitude must be finite and non-negative");
    }
}

InitialData InitialData::kernel_aligned(const KernelKind& kernel, double amplitude)
{
    return InitialData("aligned", kernel, amplitude, [kernel, amplitude](const Wavenumber& xi) {
        const double n = xi.norm();
        const Frame fr = orthonormal_frame(xi * (1.0 / n));
        return CoeffVec::real((amplitude * kernel.h(xi)) * fr.f);
    });
}

InitialData InitialData::helical(const KernelKind& kernel, double amplitude)
{
    return InitialData("helical", kernel, amplitude, [kernel, amplitude](const Wavenumber& xi) {
        const double n = xi.norm();
        const Frame fr = orthonormal_frame(xi * (1.0 / n));
        const double s = amplitude * kernel.h(xi) / std::numbers::sqrt2;
        return CoeffVec{Complex(s * fr.f.x, s * fr.g.x), Complex(s * fr.f.y, s * fr.g.y),
                        Complex(s * fr.f.z, s * fr.g.z)};
    });
}

InitialData InitialData::zero(const KernelKind& kernel)
{
    return InitialData("zero", kernel, 0.0, [](const Wavenumber&) { return CoeffVec{}; });
}

InitialData InitialData::custom(std::string name, const KernelKind& kernel, double amplitude, Fn fn)
{
    if (!fn) {
        throw std::invalid_argument("custom initial data needs an evaluation routine");
    }
    return InitialData(std::move(name), kernel, amplitude, std::move(fn));
}

InitialData InitialData::from_name(const std::string& name, const KernelKind& kernel, double amplitude)
{
    if (name == "aligned") {
        return kernel_aligned(kernel, amplitude);
    }
    if (name == "helical") {
        return helical(kernel, amplitude);
    }
    if (name == "zero") {
        return zero(kernel);
    }
    throw std::invalid_argument("unknown initial data '" + name + "' (expected aligned, helical or zero)");
}

CoeffVec InitialData::operator()(const Wavenumber& xi) const
{
    const double n = xi.norm();
    if (!(n > 0.0)) {
        throw std::invalid_argument("initial data evaluated at xi = 0");
    }
    const CoeffVec u = fn_(xi);
    if (!u.finite()) {
        throw std::domain_error("initial data '" + name_ + "' is not finite");
    }
    const double un = u.norm();
    if (require_divergence_free && std::abs(dot(xi, u)) > 1e-12 * n * un) {
        throw std::domain_error("initial data '" + name_ + "' is not divergence free");
    }
    if (require_bounded && un > amplitude_ * kernel_.h(xi) * (1.0 + 1e-12)) {
        throw std::domain_error("initial data '" + name_ + "' exceeds amplitude * h(xi)");
    }
    if (require_reality) {
        const CoeffVec m = fn_(-xi);
        const CoeffVec c{std::conj(u.x), std::conj(u.y), std::conj(u.z)};
        if ((m - c).norm() > 1e-12 * std::max(un, 1e-300)) {
            throw std::domain_error("initial data '" + name_ + "' violates u0(-xi) = conj(u0(xi))");
        }
    }
    return u;
}

// ---- payoff recursions --------------------------------------------------------

namespace {

// Bookkeeping for the optional pruning rule (see Pruning in the header).
struct PruneState {
    double tol = 0.0;
    double amplitude = 0.0;
    bool active = false;
    std::uint64_t pruned = 0;
    double error = 0.0;

    PruneState(const Pruning& p, double multiplier, double a)
        : tol(p.tol), amplitude(a), active(p.tol > 0.0 && multiplier * a <= 1.0)
    {
        if (!(p.tol >= 0.0)) {
            throw std::invalid_argument("pruning tolerance must be non-negative");
        }
    }

    bool prune(double influence)
    {
        if (!active) {
            return false;
        }
        const double b = influence * amplitude;
        if (b > tol) {
            return false;
        }
        ++pruned;
        error += b;
        return true;
    }

    const CoeffVec& leaf(const CoeffVec& chi) const
    {
        if (active && chi.norm() > amplitude * (1.0 + 1e-9)) {
            throw std::domain_error("pruning needs |u0 / h| <= amplitude at every leaf");
        }
        return chi;
    }
};

double transverse_norm(const CoeffVec& v, const Vec3& w)
{
    const Vec3 e = w * (1.0 / w.norm());
    const Complex ev = dot(e, v);
    const CoeffVec p{v.x - ev * e.x, v.y - ev * e.y, v.z - ev * e.z};
    return p.norm();
}

struct NsPayoff {
    const EstimateParams& params;
    const InitialData& u0;
    const KernelKind& kernel;
    CascadeDraws& draws;
    double multiplier;
    PruneState prune;
    std::uint64_t nodes = 1;
    bool truncated = false;

    CoeffVec eval(const Genealogy& g, const Wavenumber& w, double birth, double influence)
    {
        if (prune.prune(influence)) {
            return {};
        }
        const double hold = draws.clock(g) / (params.nu * w.norm2());
        if (birth + hold >= params.t) {
            return prune.leaf((1.0 / kernel.h(w)) * u0(w));
        }
        if (params.mode == Mode::Thinned && !draws.branch_coin(g)) {
            return {};
        }
        if (!params.budget.allows_branch(g.depth(), nodes)) {
            truncated = true;
            return {};
        }
        nodes += 2;
        const OffspringPair kids = draws.offspring(g, w);
        const double next = birth + hold;
        const CoeffVec a = eval(g.child(1), kids.w1, next, influence * multiplier * prune.amplitude);
        if (truncated) {
            return {};
        }
        const CoeffVec b = eval(g.child(2), kids.w2, next, influence * multiplier * transverse_norm(a, w));
        if (truncated) {
            return {};
        }
        return multiplier * odot(a, b, w);
    }
};

struct SelfSimilarPayoff {
    const SimBudget& budget;
    const InitialData& u0;
    CascadeDraws& draws;
    double multiplier;
    PruneState prune;
    std::uint64_t nodes = 1;
    bool truncated = false;

    CoeffVec eval(const Genealogy& g, const Vec3& e, double lambda, double influence)
    {
        if (prune.prune(influence)) {
            return {};
        }
        const double clock = draws.clock(g);
        if (!(clock < lambda)) {
            return prune.leaf(u0(e));
        }
        if (!budget.allows_branch(g.depth(), nodes)) {
            truncated = true;
            return {};
        }
        nodes += 2;
        const OffspringPair kids = draws.offspring(g, e);
        const double rest = lambda - clock;
        const double r1 = kids.w1.norm();
        const CoeffVec a = eval(g.child(1), kids.w1 * (1.0 / r1), kids.w1.norm2() * rest,
                                influence * multiplier * prune.amplitude);
        if (truncated) {
            return {};
        }
        const double r2 = kids.w2.norm();
        const CoeffVec b = eval(g.child(2), kids.w2 * (1.0 / r2), kids.w2.norm2() * rest,
                                influence * multiplier * transverse_norm(a, e));
        if (truncated) {
            return {};
        }
        return multiplier * odot(a, b, e);
    }
};

void check_reps(std::uint64_t reps)
{
    if (reps < 1) {
        throw std::invalid_argument("reps must be at least 1");
    }
}

} // namespace

Payoff ns_payoff(const Wavenumber& xi, const EstimateParams& params, const InitialData& u0,
                 const KernelKind& kernel, CascadeDraws& draws)
{
    const double mu = kernel.branch_multiplier(params.nu) * (params.mode == Mode::Thinned ? 2.0 : 1.0);
    NsPayoff rec{params, u0, kernel, draws, mu, PruneState(params.pruning, mu, u0.amplitude())};
    Payoff out;
    out.value = rec.eval(Genealogy::root(), xi, 0.0, 1.0);
    out.truncated = rec.truncated;
    out.pruned = rec.prune.pruned;
    out.error_bound = rec.prune.error;
    return out;
}

std::vector<Payoff> ns_payoffs(const Wavenumber& xi, const EstimateParams& params, const InitialData& u0,
                               const KernelKind& kernel, std::uint64_t seed)
{
    if (!(xi.norm() > 0.0)) {
        throw std::invalid_argument("xi must be nonzero");
    }
    CascadeParams cp{params.t, params.mode, params.nu, params.budget};
    cp.validate();
    check_reps(params.reps);
    std::vector<Payoff> out(params.reps);
    parallel_for(out.size(), params.threads, [&](std::size_t i) {
        StreamDraws draws(kernel, RngStream(seed, i));
        out[i] = ns_payoff(xi, params, u0, kernel, draws);
    });
    return out;
}

EstimateReport estimate_ns(const Wavenumber& xi, const EstimateParams& params, const InitialData& u0,
                           const KernelKind& kernel, std::uint64_t seed)
{
    return summarize_payoffs(ns_payoffs(xi, params, u0, kernel, seed), kernel.h(xi), xi);
}

Payoff selfsimilar_payoff(const Vec3& e0, const SelfSimilarParams& params, const InitialData& u0,
                          CascadeDraws& draws)
{
    const double mu = KernelKind::dilog().branch_multiplier(1.0);
    SelfSimilarPayoff rec{params.budget, u0, draws, mu, PruneState(params.pruning, mu, u0.amplitude())};
    Payoff out;
    out.value = rec.eval(Genealogy::root(), e0, params.lambda, 1.0);
    out.truncated = rec.truncated;
    out.pruned = rec.prune.pruned;
    out.error_bound = rec.prune.error;
    return out;
}

std::vector<Payoff> selfsimilar_payoffs(const Vec3& e0, const SelfSimilarParams& params, const InitialData& u0,
                                        std::uint64_t seed)
{
    if (!(std::abs(e0.norm() - 1.0) <= 1e-12)) {
        throw std::invalid_argument("e0 must be a unit vector");
    }
    if (!(params.lambda > 0.0) || !std::isfinite(params.lambda)) {
        throw std::invalid_argument("lambda must be positive and finite");
    }
    params.budget.validate();
    check_reps(params.reps);
    const KernelKind dilog = KernelKind::dilog();
    std::vector<Payoff> out(params.reps);
    parallel_for(out.size(), params.threads, [&](std::size_t i) {
        StreamDraws draws(dilog, RngStream(seed, i));
        out[i] = selfsimilar_payoff(e0, params, u0, draws);
    });
    return out;
}

EstimateReport estimate_selfsimilar(const Vec3& e0, const SelfSimilarParams& params, const InitialData& u0,
                                    std::uint64_t seed)
{
    return summarize_payoffs(selfsimilar_payoffs(e0, params, u0, seed), 1.0, e0);
}

EstimateReport summarize_payoffs(const std::vector<Payoff>& payoffs, double scale, const Vec3& direction)
{
    EstimateReport r;
    const double dn = direction.norm();
    CoeffVec sum;
    for (const Payoff& p : payoffs) {
        if (p.truncated) {
            ++r.truncated;
            continue;
        }
        ++r.replicates;
        sum += p.value;
        r.pruned += p.pruned;
        r.prune_error_bound += p.error_bound;
        const double xn = p.value.norm();
        if (xn > 0.0) {
            r.divergence_residual = std::max(r.divergence_residual, std::abs(dot(direction, p.value)) / (dn * xn));
        }
    }
    if (!payoffs.empty()) {
        r.truncated_fraction = static_cast<double>(r.truncated) / static_cast<double>(payoffs.size());
    }
    if (r.replicates == 0) {
        return r;
    }
    const double n = static_cast<double>(r.replicates);
    const CoeffVec mean = (1.0 / n) * sum;
    std::array<double, 3> ss{};
    for (const Payoff& p : payoffs) {
        if (p.truncated) {
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            ss[k] += std::norm(p.value[k] - mean[k]);
        }
    }
    r.mean = scale * mean;
    r.prune_error_bound *= scale / n;
    for (int k = 0; k < 3; ++k) {
        r.std_error[k] = r.replicates > 1 ? scale * std::sqrt(ss[k] / (n - 1.0) / n) : 0.0;
    }
    return r;
}

LerayPoint leray_profile(const Vec3& e, double lambda, const CoeffVec& u_selfsimilar)
{
    if (!(lambda > 0.0)) {
        throw std::domain_error("leray_profile: lambda must be positive");
    }
    return {std::sqrt(lambda) * e, (1.0 / lambda) * u_selfsimilar};
}

} // namespace nscascade
