#include "nscascade/analysis.hpp"

#include "nscascade/estimator.hpp"
#include "nscascade/integraleq.hpp"
#include "nscascade/kernels.hpp"
#include "nscascade/parallel.hpp"
#include "nscascade/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nscascade {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMinKsSample = 50;

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
}

void check_reps(std::uint64_t reps, std::uint64_t minimum = 2)
{
    if (reps < minimum) {
        throw std::invalid_argument("need at least " + std::to_string(minimum) + " replicates");
    }
}

} // namespace

// ---- Kolmogorov-Smirnov ------------------------------------------------------

double ks_critical_coefficient(double alpha)
{
    check_alpha(alpha);
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

double kolmogorov_survival(double x)
{
    if (!(x > 0.0)) {
        return 1.0;
    }
    if (x < 1.18) {
        // Jacobi-transformed series, fast for small x.
        const double y = -kPi * kPi / (8.0 * x * x);
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            s += std::exp(y * (2 * k - 1) * (2 * k - 1));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * kPi) / x * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-300) {
            break;
        }
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsReport ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha)
{
    check_alpha(alpha);
    if (a.size() < kMinKsSample || b.size() < kMinKsSample) {
        throw std::invalid_argument("two-sample KS needs at least 50 points per sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) {
            ++i;
        }
        while (j < b.size() && b[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    KsReport r;
    r.statistic = d;
    r.n = a.size();
    r.m = b.size();
    r.alpha = alpha;
    const double ne = n * m / (n + m);
    r.critical_at_alpha = ks_critical_coefficient(alpha) / std::sqrt(ne);
    r.p_value = kolmogorov_survival(std::sqrt(ne) * d);
    r.pass = d < r.critical_at_alpha;
    return r;
}

KsReport ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf, double alpha)
{
    check_alpha(alpha);
    if (a.size() < kMinKsSample) {
        throw std::invalid_argument("one-sample KS needs at least 50 points");
    }
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    KsReport r;
    r.statistic = d;
    r.n = a.size();
    r.alpha = alpha;
    r.critical_at_alpha = ks_critical_coefficient(alpha) / std::sqrt(n);
    r.p_value = kolmogorov_survival(std::sqrt(n) * d);
    r.pass = d < r.critical_at_alpha;
    return r;
}

// ---- bound checks -----------------------------------------------------------

BoundReport upper_bound_report(double estimate, double std_error, double bound)
{
    return {estimate, std_error, bound, estimate - 3.0 * std_error <= bound};
}

BoundReport two_sided_report(double estimate, double std_error, double target)
{
    return {estimate, std_error, target, std::abs(estimate - target) <= 3.0 * std_error};
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& x)
{
    if (x.empty()) {
        throw std::invalid_argument("empty sample");
    }
    const double n = static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    const double mean = s / n;
    if (x.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

BoundReport bessel_bound_check(double u, double lambda, std::uint64_t reps, std::uint64_t seed)
{
    if (!(u > 0.0) || !(lambda > 0.0)) {
        throw std::invalid_argument("bessel_bound_check: u and lambda must be positive");
    }
    check_reps(reps);
    RngStream rng(seed, 0);
    std::vector<double> x(reps);
    for (auto& v : x) {
        const double w = sample_bessel_radius(u, rng);
        v = lambda / (lambda + w * w);
    }
    const auto [mean, se] = mean_and_stderr(x);
    return upper_bound_report(mean, se, kPi * std::sqrt(lambda));
}

BoundReport monotonicity_criterion(double xi_mag, double lambda, int n, std::uint64_t reps, std::uint64_t seed)
{
    if (!(xi_mag > 0.0) || !(lambda > 0.0)) {
        throw std::invalid_argument("monotonicity_criterion: |xi| and lambda must be positive");
    }
    if (n < 0 || n > 1000) {
        throw std::invalid_argument("monotonicity_criterion: n must lie in [0, 1000]");
    }
    check_reps(reps);
    const double bound = std::pow(2.0 * kPi * std::sqrt(lambda), n);
    if (n == 0) {
        return upper_bound_report(1.0, 0.0, bound);
    }
    std::vector<double> x(reps);
    for (std::uint64_t i = 0; i < reps; ++i) {
        RngStream rng(seed, i);
        double w = xi_mag;
        double prod = 1.0;
        for (int j = 0; j < n; ++j) {
            w = sample_bessel_radius(w, rng);
            prod *= 2.0 * lambda / (lambda + w * w);
        }
        x[i] = prod;
    }
    const auto [mean, se] = mean_and_stderr(x);
    return upper_bound_report(mean, se, bound);
}

double chernoff_threshold(double u)
{
    if (!(u > 0.0 && u < 2.0)) {
        throw std::domain_error("chernoff_threshold: u must lie in (0, 2)");
    }
    return std::exp(-(std::log(2.0) + log_gamma(1.0 - 0.5 * u)) / u);
}

namespace {

double min_half_log_path(int n, const Genealogy& g, double partial,
                         const std::function<double(const Genealogy&)>& clock)
{
    if (g.depth() == n) {
        return partial;
    }
    const Genealogy c1 = g.child(1);
    const Genealogy c2 = g.child(2);
    const double a = min_half_log_path(n, c1, partial + 0.5 * std::log(clock(c1)), clock);
    const double b = min_half_log_path(n, c2, partial + 0.5 * std::log(clock(c2)), clock);
    return std::min(a, b);
}

void check_bkh(int n, std::uint64_t trees)
{
    if (n < 1 || n > 24) {
        throw std::invalid_argument("bkh_speed_estimate: n must lie in [1, 24]");
    }
    if (trees < 1) {
        throw std::invalid_argument("bkh_speed_estimate: need at least one tree");
    }
}

} // namespace

double bkh_speed_estimate(int n, std::uint64_t trees,
                          const std::function<double(std::uint64_t, const Genealogy&)>& clock)
{
    check_bkh(n, trees);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < trees; ++i) {
        const double m = min_half_log_path(n, Genealogy::root(), 0.0,
                                           [&](const Genealogy& g) { return clock(i, g); });
        sum += std::exp(m / n);
    }
    return sum / static_cast<double>(trees);
}

double bkh_speed_estimate(int n, std::uint64_t trees, std::uint64_t seed, int threads)
{
    check_bkh(n, trees);
    std::vector<double> speed(trees);
    parallel_for(trees, threads, [&](std::size_t i) {
        const RngStream base(seed, i);
        const double m = min_half_log_path(n, Genealogy::root(), 0.0, [&](const Genealogy& g) {
            RngStream s = base.substream(g.index());
            return s.exponential();
        });
        speed[i] = std::exp(m / n);
    });
    double sum = 0.0;
    for (double v : speed) {
        sum += v;
    }
    return sum / static_cast<double>(trees);
}

BoundReport arctan_identity_check(double a, double theta, std::uint64_t reps, std::uint64_t seed)
{
    if (!(theta > 0.0)) {
        throw std::invalid_argument("arctan_identity_check: theta must be positive");
    }
    check_reps(reps);
    RngStream rng(seed, 0);
    std::vector<double> x(reps);
    for (auto& v : x) {
        const double ar = a * sample_dilog_ratio(rng);
        v = ar * ar / (ar * ar + theta);
    }
    const auto [mean, se] = mean_and_stderr(x);
    return two_sided_report(mean, se, 2.0 / kPi * std::atan(a / std::sqrt(theta)));
}

LogRatioReport mean_log_ratio(std::uint64_t reps, std::uint64_t seed, bool antithetic)
{
    check_reps(reps);
    RngStream rng(seed, 0);
    std::vector<double> x;
    x.reserve(antithetic ? 2 * reps : reps);
    LogRatioReport r;
    for (std::uint64_t i = 0; i < reps; ++i) {
        const double l = std::log(sample_dilog_ratio(rng));
        x.push_back(l);
        if (antithetic) {
            x.push_back(-l);
        }
    }
    double sum = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (std::size_t i = 0; i < x.size(); i += antithetic ? 2 : 1) {
        // Antithetic pairs are added as x + (-x) = 0 exactly.
        sum += antithetic ? x[i] + x[i + 1] : x[i];
    }
    for (double v : x) {
        s2 += v * v;
        s4 += v * v * v * v;
    }
    const double n = static_cast<double>(x.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const double se = std::sqrt(ss / (n - 1.0) / n);
    r.mean = two_sided_report(mean, se, 0.0);
    r.m2 = s2 / n;
    r.m4 = s4 / n;
    return r;
}

RecurrenceSummary recurrence_scan(double eps, std::uint64_t steps, std::uint64_t reps, std::uint64_t seed)
{
    if (!(eps > 0.0)) {
        throw std::invalid_argument("recurrence_scan: eps must be positive");
    }
    check_reps(reps, 1);
    RecurrenceSummary out;
    out.visits.resize(reps);
    for (std::uint64_t i = 0; i < reps; ++i) {
        RngStream rng(seed, i);
        double walk = 0.0;
        std::uint64_t count = 0;
        for (std::uint64_t k = 0; k < steps; ++k) {
            walk += std::log(sample_dilog_ratio(rng));
            if (std::abs(walk) <= eps) {
                ++count;
            }
        }
        out.visits[i] = count;
    }
    std::vector<std::uint64_t> sorted = out.visits;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    out.median = sorted.size() % 2 == 1 ? static_cast<double>(sorted[mid])
                                        : 0.5 * static_cast<double>(sorted[mid - 1] + sorted[mid]);
    double total = 0.0;
    std::uint64_t positive = 0;
    for (auto v : out.visits) {
        total += static_cast<double>(v);
        positive += v > 0 ? 1 : 0;
    }
    out.mean = total / static_cast<double>(reps);
    out.fraction_with_visit = static_cast<double>(positive) / static_cast<double>(reps);
    return out;
}

// ---- scaling equivalence ----------------------------------------------------------

namespace {

std::string mag_label(const char* prefix, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s|xi|=%g", prefix, v);
    return buf;
}

std::vector<double> scaled_zeta_sample(const KernelKind& kernel, double mag, int n, std::uint64_t reps,
                                       std::uint64_t seed, int threads)
{
    std::vector<double> out(reps);
    const Wavenumber root{0.0, 0.0, mag};
    parallel_for(reps, threads, [&](std::size_t i) {
        out[i] = mag * mag * zeta_n(root, n, kernel, RngStream(seed, i));
    });
    return out;
}

} // namespace

ScalingEquivalenceReport verify_scaling_equivalence(const std::vector<double>& xi_mags, int n, std::uint64_t reps,
                                                    std::uint64_t seed, bool with_control, int threads,
                                                    double alpha)
{
    if (xi_mags.empty()) {
        throw std::invalid_argument("verify_scaling_equivalence: need at least one |xi|");
    }
    ScalingEquivalenceReport rep;
    rep.xi_mags = xi_mags;
    const KernelKind dilog = KernelKind::dilog();
    for (std::size_t k = 0; k < xi_mags.size(); ++k) {
        if (!(xi_mags[k] > 0.0)) {
            throw std::invalid_argument("verify_scaling_equivalence: |xi| must be positive");
        }
        rep.scaled_zeta.push_back(scaled_zeta_sample(dilog, xi_mags[k], n, reps, mix_seed(seed, 100 + k), threads));
    }
    rep.zeta_tilde.resize(reps);
    const std::uint64_t ss_seed = mix_seed(seed, 1);
    parallel_for(reps, threads, [&](std::size_t i) { rep.zeta_tilde[i] = zeta_tilde_n(n, RngStream(ss_seed, i)); });

    std::vector<std::string> labels;
    std::vector<const std::vector<double>*> sets;
    for (std::size_t k = 0; k < xi_mags.size(); ++k) {
        labels.push_back(mag_label("dilog ", xi_mags[k]));
        sets.push_back(&rep.scaled_zeta[k]);
    }
    labels.emplace_back("selfsimilar");
    sets.push_back(&rep.zeta_tilde);
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            ScalingPair p{labels[a], labels[b], ks_two_sample(*sets[a], *sets[b], alpha)};
            rep.all_pass = rep.all_pass && p.ks.pass;
            rep.pairs.push_back(std::move(p));
        }
    }
    if (with_control) {
        const double mag = *std::max_element(xi_mags.begin(), xi_mags.end());
        const auto bessel = scaled_zeta_sample(KernelKind::bessel(), mag, n, reps, mix_seed(seed, 2), threads);
        rep.has_control = true;
        rep.control = {mag_label("bessel ", mag), "selfsimilar", ks_two_sample(bessel, rep.zeta_tilde, alpha)};
    }
    return rep;
}

} // namespace nscascade
