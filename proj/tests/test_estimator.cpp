#include <doctest.h>

#include "nscascade/estimator.hpp"
#include "oracles.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

using namespace nscascade;

namespace {

const Complex I{0.0, 1.0};

/// Clocks per node index (default: never branch), a fixed coin, and offspring
/// at a fixed polar position relative to the parent.
class ScriptedDraws final : public CascadeDraws {
public:
    std::map<std::uint64_t, double> clocks;
    bool coin = true;
    double ratio = 0.7;
    double cos_phi = 0.3;

    double clock(const Genealogy& g) override
    {
        const auto it = clocks.find(g.index());
        return it == clocks.end() ? 1e300 : it->second;
    }
    bool branch_coin(const Genealogy&) override { return coin; }
    OffspringPair offspring(const Genealogy&, const Wavenumber& parent) override
    {
        return offspring_from_polar(parent, ratio, cos_phi, 1.1);
    }
};

/// -i (e.w) (v - (e.v) e), written out component-wise.
CoeffVec odot_by_hand(const CoeffVec& v, const CoeffVec& w, const Vec3& xi)
{
    const Vec3 e = xi * (1.0 / xi.norm());
    const Complex ew = e.x * w.x + e.y * w.y + e.z * w.z;
    const Complex ev = e.x * v.x + e.y * v.y + e.z * v.z;
    return {-I * ew * (v.x - ev * e.x), -I * ew * (v.y - ev * e.y), -I * ew * (v.z - ev * e.z)};
}

CoeffVec random_coeff(RngStream& rng)
{
    auto c = [&] { return Complex(2 * rng.uniform() - 1, 2 * rng.uniform() - 1); };
    return {c(), c(), c()};
}

double max_diff(const CoeffVec& a, const CoeffVec& b) { return (a - b).norm(); }

} // namespace

TEST_SUITE("estimator") {

TEST_CASE("odot examples")
{
    const CoeffVec r = odot(CoeffVec::real({1, 0, 0}), CoeffVec::real({0, 0, 1}), {0, 0, 1});
    CHECK(max_diff(r, CoeffVec{-I, 0.0, 0.0}) < 1e-15);
    CHECK(odot(CoeffVec::real({1, 2, 0}), CoeffVec::real({1, -1, 0}), {0, 0, 3}).norm() == 0.0);
    CHECK(odot(CoeffVec::real({0, 0, 2}), CoeffVec::real({1, 1, 1}), {0, 0, 1}).norm() < 1e-15);
    CHECK_THROWS_AS(odot(CoeffVec{}, CoeffVec{}, {0, 0, 0}), std::invalid_argument);
}

TEST_CASE("odot norm bound and agreement with the explicit formula")
{
    RngStream rng(1, 0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const CoeffVec v = random_coeff(rng);
        const CoeffVec w = random_coeff(rng);
        const Vec3 xi{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
        const CoeffVec o = odot(v, w, xi);
        worst = std::max(worst, o.norm() / (v.norm() * w.norm()));
        REQUIRE(max_diff(o, odot_by_hand(v, w, xi)) < 1e-14);
        REQUIRE(std::abs(dot(xi, o)) < 1e-13 * xi.norm() * o.norm() + 1e-300);
    }
    CHECK(worst <= 1.0 + 1e-12);
}

TEST_CASE("initial data")
{
    const KernelKind k = KernelKind::dilog();
    const Wavenumber xi{0.3, -0.4, 1.2};
    for (const char* name : {"aligned", "helical"}) {
        InitialData u0 = InitialData::from_name(name, k, 0.25);
        u0.require_divergence_free = true;
        u0.require_bounded = true;
        const CoeffVec v = u0(xi);
        CHECK(v.norm() == doctest::Approx(0.25 * k.h(xi)));
        CHECK(std::abs(dot(xi, v)) < 1e-15);
    }
    CHECK(InitialData::zero(k)(xi).norm() == 0.0);
    InitialData bad = InitialData::custom("radial", k, 1.0, [](const Wavenumber& w) { return CoeffVec::real(w); });
    bad.require_divergence_free = true;
    CHECK_THROWS_AS(bad(xi), std::domain_error);
    CHECK_THROWS_AS(InitialData::from_name("vortex", k, 1.0), std::invalid_argument);
}

TEST_CASE("one scripted branching reproduces the recursion by hand")
{
    const KernelKind k = KernelKind::bessel();
    const InitialData u0 = InitialData::helical(k, 0.4);
    const Wavenumber xi{0.0, 1.0, 2.0};
    for (Mode mode : {Mode::NonThinned, Mode::Thinned}) {
        ScriptedDraws d;
        d.clocks[1] = 0.2;  // root branches at 0.2 / |xi|^2 < t
        EstimateParams p;
        p.t = 1.0;
        p.mode = mode;
        p.nu = 1.0;
        const Payoff got = ns_payoff(xi, p, u0, k, d);
        const OffspringPair kids = offspring_from_polar(xi, d.ratio, d.cos_phi, 1.1);
        const CoeffVec x1 = (1.0 / k.h(kids.w1)) * u0(kids.w1);
        const CoeffVec x2 = (1.0 / k.h(kids.w2)) * u0(kids.w2);
        const double mu = 2.0 * std::acos(-1.0) / std::pow(2.0 * std::acos(-1.0), 1.5) * (mode == Mode::Thinned ? 2.0 : 1.0);
        const CoeffVec expect = mu * odot_by_hand(x1, x2, xi);
        CHECK_FALSE(got.truncated);
        CHECK(max_diff(got.value, expect) < 1e-14);

        d.coin = false;
        const Payoff dead = ns_payoff(xi, p, u0, k, d);
        if (mode == Mode::Thinned) {
            CHECK(dead.value.norm() == 0.0);
        } else {
            CHECK(max_diff(dead.value, expect) < 1e-14);
        }
    }
}

TEST_CASE("zero data gives exactly zero")
{
    EstimateParams p;
    p.t = 0.5;
    p.reps = 2000;
    const EstimateReport r = estimate_ns({0, 0, 1}, p, InitialData::zero(KernelKind::dilog()), KernelKind::dilog(), 3);
    CHECK(r.mean.norm() == 0.0);
    CHECK(r.std_error == std::array<double, 3>{0.0, 0.0, 0.0});
    SelfSimilarParams sp;
    sp.reps = 2000;
    CHECK(estimate_selfsimilar({1, 0, 0}, sp, InitialData::zero(KernelKind::dilog()), 4).mean.norm() == 0.0);
}

TEST_CASE("small-time recovery of the initial data")
{
    const KernelKind k = KernelKind::dilog();
    const InitialData u0 = InitialData::kernel_aligned(k, 0.1);
    const Wavenumber xi{0.0, 0.0, 1.0};
    EstimateParams p;
    p.t = 1e-6;
    p.reps = 1000;
    const EstimateReport r = estimate_ns(xi, p, u0, k, 5);
    CHECK((r.mean - u0(xi)).norm() <= 1e-3 * u0(xi).norm());
    SelfSimilarParams sp;
    sp.lambda = 1e-6;
    sp.reps = 1000;
    const EstimateReport s = estimate_selfsimilar({0, 0, 1}, sp, u0, 6);
    CHECK((s.mean - u0({0, 0, 1})).norm() <= 1e-3 * u0({0, 0, 1}).norm());
}

TEST_CASE("payoffs stay divergence free")
{
    const KernelKind k = KernelKind::dilog();
    EstimateParams p;
    p.t = 0.3;
    p.reps = 10000;
    const Wavenumber xi{0.2, 0.5, -0.8};
    const EstimateReport r = estimate_ns(xi, p, InitialData::helical(k, 0.1), k, 7);
    CHECK(r.divergence_residual <= 1e-10);
}

TEST_CASE("results do not depend on the thread count")
{
    const KernelKind k = KernelKind::dilog();
    EstimateParams p;
    p.t = 0.3;
    p.reps = 3000;
    const InitialData u0 = InitialData::kernel_aligned(k, 0.1);
    const auto a = ns_payoffs({0, 1, 0}, p, u0, k, 8);
    p.threads = 3;
    const auto b = ns_payoffs({0, 1, 0}, p, u0, k, 8);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].value == b[i].value);
        REQUIRE(a[i].truncated == b[i].truncated);
    }
}

TEST_CASE("budget-truncated replicates are excluded and counted")
{
    const KernelKind k = KernelKind::dilog();
    EstimateParams p;
    p.t = 1.0;
    p.reps = 500;
    p.budget = SimBudget{5, 25};
    const EstimateReport r = estimate_ns({0, 0, 1}, p, InitialData::kernel_aligned(k, 0.1), k, 9);
    CHECK(r.truncated > 0);
    CHECK(r.truncated + r.replicates == 500);
    CHECK(r.truncated_fraction == doctest::Approx(double(r.truncated) / 500.0));
}

TEST_CASE("pruning error stays within the reported bound")
{
    const KernelKind k = KernelKind::dilog();
    const InitialData u0 = InitialData::kernel_aligned(k, 0.1);
    const Wavenumber xi{0, 0, 1};
    EstimateParams full;
    full.t = 0.3;
    full.reps = 3000;
    full.budget = SimBudget{1 << 16, 25};
    EstimateParams pruned = full;
    pruned.pruning.tol = 1e-6;
    const auto a = ns_payoffs(xi, full, u0, k, 10);
    const auto b = ns_payoffs(xi, pruned, u0, k, 10);
    std::uint64_t compared = 0;
    std::uint64_t pruned_total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE_FALSE(b[i].truncated);
        pruned_total += b[i].pruned;
        if (a[i].truncated) {
            continue;
        }
        ++compared;
        REQUIRE((a[i].value - b[i].value).norm() <= b[i].error_bound * (1 + 1e-9) + 1e-15);
    }
    CHECK(compared > 2500);
    CHECK(pruned_total > 0);

    // tol = 0 is the plain recursion.
    EstimateParams off = full;
    off.pruning.tol = 0.0;
    const auto c = ns_payoffs(xi, off, u0, k, 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].value == c[i].value);
        REQUIRE(c[i].pruned == 0);
    }

    // The rule is inactive when multiplier * amplitude > 1.
    pruned.reps = 200;
    const auto big = ns_payoffs(xi, pruned, InitialData::kernel_aligned(k, 2.0), k, 11);
    for (const auto& pay : big) {
        REQUIRE(pay.pruned == 0);
    }

    // Leaves above the amplitude break the bound, so they are rejected.
    InitialData loud = InitialData::custom("loud", k, 0.1, [k](const Wavenumber& w) {
        return CoeffVec::real({0.0, 0.5 * k.h(w), 0.0});
    });
    pruned.t = 1e-9;
    CHECK_THROWS_AS(ns_payoffs({0, 0, 1}, pruned, loud, k, 12), std::domain_error);
}

TEST_CASE("thinned and nonthinned estimates agree")
{
    const KernelKind k = KernelKind::dilog();
    const InitialData u0 = InitialData::kernel_aligned(k, 0.1);
    EstimateParams p;
    p.t = 0.3;
    p.reps = 100000;
    p.pruning.tol = 1e-13;
    const EstimateReport non = estimate_ns({0, 0, 1}, p, u0, k, 13);
    p.mode = Mode::Thinned;
    const EstimateReport thin = estimate_ns({0, 0, 1}, p, u0, k, 14);
    CHECK(non.truncated == 0);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(non.mean[c] - thin.mean[c]) <= 3.0 * (non.std_error[c] + thin.std_error[c]) + 1e-15);
    }
}

TEST_CASE("self-similar estimate matches the scaled NS estimate")
{
    const KernelKind k = KernelKind::dilog();
    // Scale invariant: u0(xi) = h_d(xi) U(e_xi).
    const InitialData u0 = InitialData::kernel_aligned(k, 0.1);
    const double mag = 2.0;
    const double t = 0.1;
    const Vec3 e{0.0, 0.0, 1.0};
    EstimateParams p;
    p.t = t;
    p.reps = 100000;
    p.pruning.tol = 1e-13;
    const EstimateReport ns = estimate_ns(mag * e, p, u0, k, 15);
    SelfSimilarParams sp;
    sp.lambda = mag * mag * t;
    sp.reps = p.reps;
    sp.pruning.tol = 1e-13;
    const EstimateReport ss = estimate_selfsimilar(e, sp, u0, 16);
    for (int c = 0; c < 3; ++c) {
        const Complex lhs = ss.mean[c];
        const Complex rhs = mag * mag * ns.mean[c];
        CHECK(std::abs(lhs - rhs) <= 3.0 * (ss.std_error[c] + mag * mag * ns.std_error[c]) + 1e-15);
    }
}

TEST_CASE("Leray profile")
{
    const Vec3 e{0.6, 0.0, 0.8};
    const CoeffVec c{Complex(1, 2), Complex(0, -1), Complex(3, 0)};
    const LerayPoint lp = leray_profile(e, 4.0, 4.0 * c);
    CHECK(max_diff(lp.value, c) < 1e-15);
    CHECK((lp.point - 2.0 * e).norm() < 1e-15);
    const LerayPoint one = leray_profile(e, 1.0, c);
    CHECK(one.value == c);
    CHECK(one.point == e);

    const InitialData u0 = InitialData::helical(KernelKind::dilog(), 0.1);
    SelfSimilarParams sp;
    sp.lambda = 1.0;
    sp.reps = 500;
    const EstimateReport r = estimate_selfsimilar(e, sp, u0, 17);
    CHECK(leray_profile(e, 1.0, r.mean).value == r.mean);
    CHECK_THROWS_AS(leray_profile(e, 0.0, c), std::domain_error);
}

}
