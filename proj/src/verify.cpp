#include "nscascade/analysis.hpp"
#include "nscascade/estimator.hpp"
#include "nscascade/integraleq.hpp"
#include "nscascade/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nscascade {

namespace {

constexpr double kPi = std::numbers::pi;

using Params = std::vector<std::pair<std::string, double>>;

struct SuiteContext {
    std::uint64_t seed;
    double scale;
    int threads;
    std::vector<VerificationRecord>& out;

    std::uint64_t reps(double base) const
    {
        return std::max<std::uint64_t>(100, static_cast<std::uint64_t>(std::llround(base * scale)));
    }
    std::uint64_t stream(std::uint64_t tag) const { return mix_seed(seed, tag); }

    void at_most(std::string test, Params params, double statistic, double threshold)
    {
        out.push_back({std::move(test), std::move(params), statistic, threshold, statistic <= threshold});
    }
    void at_least(std::string test, Params params, double statistic, double threshold)
    {
        out.push_back({std::move(test), std::move(params), statistic, threshold, statistic >= threshold});
    }
    void ks(std::string test, Params params, const KsReport& r)
    {
        out.push_back({std::move(test), std::move(params), r.statistic, r.critical_at_alpha, r.pass});
    }
};

double z_score(double estimate, double se, double target)
{
    const double d = std::abs(estimate - target);
    if (se > 0.0) {
        return d / se;
    }
    return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// max over components of |a - b| / (se_a + se_b); 3 means the 3-sigma intervals just touch.
double overlap_ratio(const EstimateReport& a, const EstimateReport& b)
{
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double d = std::abs(a.mean[k] - b.mean[k]);
        const double s = a.std_error[k] + b.std_error[k];
        if (s > 0.0) {
            worst = std::max(worst, d / s);
        } else if (d > 0.0) {
            worst = std::numeric_limits<double>::infinity();
        }
    }
    return worst;
}

void suite_samplers(SuiteContext& c)
{
    {
        const auto n = c.reps(1e5);
        RngStream rng(c.stream(10), 0);
        std::vector<double> x(n);
        for (auto& v : x) {
            v = sample_dilog_ratio(rng);
        }
        c.ks("dilog_ratio_ks", {{"draws", double(n)}}, ks_one_sample(x, [](double r) { return dilog_cdf(r); }));
    }
    {
        const auto n = c.reps(1e5);
        const double u = 1.0;
        RngStream rng(c.stream(11), 0);
        std::vector<double> x(n);
        for (auto& v : x) {
            v = sample_bessel_radius(u, rng);
        }
        c.ks("bessel_radial_ks", {{"u", u}, {"draws", double(n)}},
             ks_one_sample(x, [u](double r) { return 1.0 - bessel_radial_survival(u, r); }));
    }
    int tag = 12;
    for (double u : {0.5, 1.0, 3.0, 10.0}) {
        const auto n = c.reps(1e5);
        RngStream rng(c.stream(tag++), 0);
        std::vector<double> x(n);
        for (auto& v : x) {
            v = sample_bessel_offspring({0.0, 0.0, u}, rng).w1.norm();
        }
        const auto [mean, se] = mean_and_stderr(x);
        c.at_most("bessel_mean_reversion", {{"u", u}, {"draws", double(n)}}, z_score(mean, se, 0.5 * (u + 1.0)), 3.0);
    }
    {
        const auto n = c.reps(1e4);
        RngStream rng(c.stream(20), 0);
        double worst = 0.0;
        for (const KernelKind& k : {KernelKind::dilog(), KernelKind::bessel()}) {
            for (std::uint64_t i = 0; i < n; ++i) {
                const double mag = std::exp(4.0 * rng.uniform() - 2.0);
                const double z = 2.0 * rng.uniform() - 1.0;
                const double ph = 2.0 * kPi * rng.uniform();
                const double s = std::sqrt(1.0 - z * z);
                const Wavenumber p{mag * s * std::cos(ph), mag * s * std::sin(ph), mag * z};
                const OffspringPair o = sample_offspring(k, p, rng);
                const double scale = std::max(p.norm(), o.w1.norm());
                worst = std::max(worst, (o.w1 + o.w2 - p).norm() / scale);
            }
        }
        c.at_most("offspring_sum_invariant", {{"draws_per_kernel", double(n)}}, worst, 1e-12);
    }
}

void suite_cascade(SuiteContext& c)
{
    {
        const auto reps = c.reps(1e4);
        const auto r = verify_scaling_equivalence({1.0, 2.0, 5.0}, 5, reps, c.stream(30), true, c.threads);
        for (const auto& p : r.pairs) {
            c.ks("scaling_equivalence " + p.a + " vs " + p.b, {{"n", 5.0}, {"reps", double(reps)}}, p.ks);
        }
        // The control compares different chains: it passes when KS rejects.
        c.out.push_back({"scaling_control " + r.control.a + " vs " + r.control.b + " (must differ)",
                         {{"n", 5.0}, {"reps", double(reps)}},
                         r.control.ks.statistic,
                         r.control.ks.critical_at_alpha,
                         !r.control.ks.pass});
    }
    {
        const auto trees = c.reps(100);
        std::uint64_t mismatches = 0;
        const KernelKind dilog = KernelKind::dilog();
        for (std::uint64_t i = 0; i < trees; ++i) {
            const int n = 1 + static_cast<int>(i % 12);
            StreamDraws a(dilog, RngStream(c.stream(31), i));
            StreamDraws b(dilog, RngStream(c.stream(31), i));
            const double bb = zeta_n({0.0, 0.0, 1.0}, n, a);
            const double ex = zeta_n_exhaustive({0.0, 0.0, 1.0}, n, b);
            mismatches += bb == ex ? 0 : 1;
        }
        c.at_most("zeta_branch_and_bound_exact", {{"trees", double(trees)}, {"max_n", 12.0}}, double(mismatches), 0.0);
    }
    {
        const auto reps = c.reps(1e4);
        CascadeParams p;
        p.t = 0.5;
        // Only "exactly one node" matters; a tree that hits this budget is not a single node.
        p.budget.max_nodes = 4096;
        std::uint64_t single = 0;
        for (std::uint64_t i = 0; i < reps; ++i) {
            const auto z = branch_count({1.0, 0.0, 0.0}, p, KernelKind::dilog(), RngStream(c.stream(32), i));
            single += (z && *z == 1) ? 1 : 0;
        }
        const double q = std::exp(-0.5);
        const double phat = double(single) / double(reps);
        c.at_most("single_node_probability", {{"xi", 1.0}, {"t", 0.5}, {"reps", double(reps)}},
                  z_score(phat, std::sqrt(q * (1.0 - q) / double(reps)), q), 3.0);
    }
}

void suite_estimator(SuiteContext& c)
{
    const KernelKind dilog = KernelKind::dilog();
    {
        EstimateParams p;
        p.t = 0.3;
        p.reps = c.reps(1e4);
        p.threads = c.threads;
        auto u0 = InitialData::helical(dilog, 0.1);
        u0.require_divergence_free = true;
        const auto r = estimate_ns({0.3, -0.4, 1.2}, p, u0, dilog, c.stream(40));
        c.at_most("divergence_residual", {{"t", 0.3}, {"reps", double(p.reps)}}, r.divergence_residual, 1e-10);
    }
    {
        const auto n = c.reps(1e4);
        RngStream rng(c.stream(41), 0);
        auto cv = [&] {
            return CoeffVec{Complex(rng.uniform() - 0.5, rng.uniform() - 0.5),
                            Complex(rng.uniform() - 0.5, rng.uniform() - 0.5),
                            Complex(rng.uniform() - 0.5, rng.uniform() - 0.5)};
        };
        double worst = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const CoeffVec v = cv();
            const CoeffVec w = cv();
            const Wavenumber xi{rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5};
            worst = std::max(worst, odot(v, w, xi).norm() / (v.norm() * w.norm()));
        }
        c.at_most("odot_norm_bound", {{"triples", double(n)}}, worst, 1.0 + 1e-12);
    }
    {
        EstimateParams p;
        p.t = 1e-6;
        p.reps = c.reps(1e3);
        const Wavenumber xi{0.0, 0.6, 0.8};
        const auto u0 = InitialData::kernel_aligned(dilog, 0.5);
        const auto r = estimate_ns(xi, p, u0, dilog, c.stream(42));
        const CoeffVec exact = u0(xi);
        c.at_most("small_time_recovery", {{"t", 1e-6}, {"reps", double(p.reps)}}, (r.mean - exact).norm() / exact.norm(),
                  1e-3);
    }
    {
        EstimateParams p;
        p.t = 0.3;
        p.reps = c.reps(1e5);
        p.threads = c.threads;
        p.pruning.tol = 1e-13;
        const auto u0 = InitialData::kernel_aligned(dilog, 0.1);
        const auto nonthinned = estimate_ns({1.0, 0.0, 0.0}, p, u0, dilog, c.stream(43));
        p.mode = Mode::Thinned;
        const auto thinned = estimate_ns({1.0, 0.0, 0.0}, p, u0, dilog, c.stream(44));
        c.at_most("thinned_vs_nonthinned", {{"t", 0.3}, {"amplitude", 0.1}, {"reps", double(p.reps)}},
                  overlap_ratio(nonthinned, thinned), 3.0);
    }
    {
        const double mag = 2.0;
        const double t = 0.1;
        EstimateParams p;
        p.t = t;
        p.reps = c.reps(1e5);
        p.threads = c.threads;
        p.pruning.tol = 1e-13;
        const auto u0 = InitialData::kernel_aligned(dilog, 0.1);
        auto ns = estimate_ns({0.0, 0.0, mag}, p, u0, dilog, c.stream(45));
        ns.mean *= mag * mag;
        for (auto& s : ns.std_error) {
            s *= mag * mag;
        }
        SelfSimilarParams sp;
        sp.lambda = mag * mag * t;
        sp.reps = p.reps;
        sp.threads = c.threads;
        sp.pruning.tol = 1e-13;
        const auto ss = estimate_selfsimilar({0.0, 0.0, 1.0}, sp, u0, c.stream(46));
        c.at_most("selfsimilar_vs_scaled_ns", {{"xi", mag}, {"t", t}, {"reps", double(p.reps)}},
                  overlap_ratio(ns, ss), 3.0);
    }
}

void suite_integraleq(SuiteContext& c)
{
    const QuadratureSpec q;
    const RadialQuadrature rq = build_radial_quadrature(q);
    c.at_most("quadrature_normalization", {{"gauss_order", double(q.gauss_order)}}, std::abs(rq.normalization - 1.0),
              1e-6);
    LambdaGrid one = graded_grid(10.0, 400, 2.0, 1.0);
    const LambdaGrid img = MtildeOperator(q, c.threads).apply(one);
    double res = 0.0;
    for (double v : img.values) {
        res = std::max(res, std::abs(v - 1.0));
    }
    c.at_most("fixed_point_one", {{"lambda_max", 10.0}}, res, 1e-6);

    PicardOptions po;
    po.tol = 1e-8;
    po.threads = c.threads;
    const auto nodes = graded_grid(10.0, 400).nodes;
    const PicardResult zero = picard_mtilde(nodes, po, q);
    c.at_least("picard_zero_monotone", {{"lambda_max", 10.0}, {"tol", 1e-8}}, zero.monotone_flag ? 1.0 : 0.0, 1.0);
    c.at_least("picard_zero_converged", {{"lambda_max", 10.0}, {"tol", 1e-8}}, zero.converged ? 1.0 : 0.0, 1.0);
    double violation = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double v = zero.grid.values[i];
        violation = std::max({violation, std::exp(-nodes[i]) - v, v - 1.0});
    }
    c.at_most("picard_zero_sandwich", {{"lambda_max", 10.0}}, violation, 1e-12);

    for (double mag : {0.5, 2.0}) {
        const auto t_nodes = graded_grid(10.0 / (mag * mag), 600).nodes;
        const PicardResult m = picard_m_ns(mag, t_nodes, po, q);
        double diff = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            diff = std::max(diff, std::abs(m.grid(nodes[i] / (mag * mag)) - zero.grid.values[i]));
        }
        c.at_most("m_ns_equivalence", {{"xi", mag}}, diff, 1e-4);
    }
}

void suite_bessel(SuiteContext& c)
{
    std::uint64_t tag = 60;
    for (double u : {0.1, 1.0, 10.0}) {
        for (double lambda : {1e-4, 1e-2}) {
            const auto reps = c.reps(1e5);
            const BoundReport b = bessel_bound_check(u, lambda, reps, c.stream(tag++));
            c.at_most("bessel_lemma_bound", {{"u", u}, {"lambda", lambda}, {"reps", double(reps)}},
                      b.estimate + 3.0 * b.std_error, b.bound);
        }
    }
    const double lambda = 0.9 / (4.0 * kPi * kPi);
    double worst = 0.0;
    double at5 = 0.0;
    double at10 = 0.0;
    const auto reps = c.reps(1e5);
    for (int n = 1; n <= 10; ++n) {
        const BoundReport b = monotonicity_criterion(1.0, lambda, n, reps, c.stream(70));
        worst = std::max(worst, (b.estimate + 3.0 * b.std_error) / b.bound);
        if (n == 5) {
            at5 = b.estimate;
        }
        if (n == 10) {
            at10 = b.estimate;
            c.at_most("bessel_path_criterion", {{"n", 10.0}, {"lambda", lambda}, {"reps", double(reps)}},
                      b.estimate + 3.0 * b.std_error, b.bound);
        }
    }
    c.at_most("bessel_path_geometric_decay", {{"n_max", 10.0}, {"lambda", lambda}}, worst, 1.0);
    c.at_most("bessel_path_ratio_10_over_5", {{"lambda", lambda}}, at10 / at5, 1.0);
}

void suite_appendix(SuiteContext& c)
{
    std::uint64_t tag = 80;
    for (const auto& [a, theta] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}}) {
        const auto reps = c.reps(1e6);
        const BoundReport b = arctan_identity_check(a, theta, reps, c.stream(tag++));
        c.at_most("arctan_identity", {{"a", a}, {"theta", theta}, {"reps", double(reps)}},
                  z_score(b.estimate, b.std_error, b.bound), 3.0);
    }
    {
        const auto reps = c.reps(1e6);
        const LogRatioReport r = mean_log_ratio(reps, c.stream(90));
        c.at_most("mean_log_ratio", {{"reps", double(reps)}}, z_score(r.mean.estimate, r.mean.std_error, 0.0), 3.0);
    }
    c.at_most("chernoff_threshold_u1", {}, std::abs(chernoff_threshold(1.0) - 0.5 / std::sqrt(kPi)), 1e-10);
    {
        const auto trees = c.reps(100);
        const double speed = bkh_speed_estimate(18, trees, c.stream(91), c.threads);
        c.at_least("bkh_speed", {{"n", 18.0}, {"trees", double(trees)}}, speed, chernoff_threshold(1.0) - 0.05);
    }
    {
        const auto reps = c.reps(1e3);
        const RecurrenceSummary r = recurrence_scan(0.5, 10000, reps, c.stream(92));
        c.at_least("recurrence_exploratory", {{"eps", 0.5}, {"steps", 1e4}, {"reps", double(reps)}}, r.median, 1.0);
    }
}

} // namespace

const std::vector<std::string>& verification_suites()
{
    static const std::vector<std::string> names{"samplers", "cascade", "estimator", "integraleq",
                                                "bessel",   "appendix", "all"};
    return names;
}

std::vector<VerificationRecord> run_verification_suite(const std::string& suite, std::uint64_t seed, double scale,
                                                       int threads)
{
    const auto& names = verification_suites();
    if (std::find(names.begin(), names.end(), suite) == names.end()) {
        throw std::invalid_argument("unknown suite '" + suite + "'");
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("scale must be positive");
    }
    std::vector<VerificationRecord> out;
    SuiteContext c{seed, scale, threads, out};
    const bool all = suite == "all";
    if (all || suite == "samplers") {
        suite_samplers(c);
    }
    if (all || suite == "cascade") {
        suite_cascade(c);
    }
    if (all || suite == "estimator") {
        suite_estimator(c);
    }
    if (all || suite == "integraleq") {
        suite_integraleq(c);
    }
    if (all || suite == "bessel") {
        suite_bessel(c);
    }
    if (all || suite == "appendix") {
        suite_appendix(c);
    }
    return out;
}

} // namespace nscascade
