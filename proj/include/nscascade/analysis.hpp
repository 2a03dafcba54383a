#pragma once

#include "nscascade/cascade.hpp"
#include "nscascade/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nscascade {

// ---- Kolmogorov-Smirnov ------------------------------------------------------

struct KsReport {
    double statistic = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;  ///< 0 for the one-sample test
    double alpha = 0.001;
    double critical_at_alpha = 0.0;
    double p_value = 1.0;  ///< asymptotic Kolmogorov tail at the effective sample size
    bool pass = false;     ///< statistic < critical_at_alpha
};

/// c(alpha) = sqrt(-ln(alpha / 2) / 2).
double ks_critical_coefficient(double alpha);

/// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2), the Kolmogorov tail.
double kolmogorov_survival(double x);

/// Exact two-sample statistic (ties handled), asymptotic critical value
/// c(alpha) sqrt((n + m) / (n m)).  Throws std::invalid_argument if n or m < 50.
KsReport ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.001);

/// One-sample statistic against a continuous CDF; critical value c(alpha) / sqrt(n).
KsReport ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf, double alpha = 0.001);

// ---- Monte Carlo bound checks ------------------------------------------------------

struct BoundReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;   ///< the bound, or the exact target for two-sided checks
    bool satisfied = false;
};

/// satisfied iff estimate - 3 se <= bound.
BoundReport upper_bound_report(double estimate, double std_error, double bound);
/// satisfied iff |estimate - target| <= 3 se.
BoundReport two_sided_report(double estimate, double std_error, double target);

/// Mean and standard error of the sample.
std::pair<double, double> mean_and_stderr(const std::vector<double>& x);

/// E_u[lambda / (lambda + W^2)] over Bessel radial draws against pi sqrt(lambda).
BoundReport bessel_bound_check(double u, double lambda, std::uint64_t reps, std::uint64_t seed);

/// 2^n E prod_{j=1..n} lambda / (lambda + |W_j|^2) along one Bessel path from
/// |W_0| = xi_mag, against (2 pi sqrt(lambda))^n.
BoundReport monotonicity_criterion(double xi_mag, double lambda, int n, std::uint64_t reps, std::uint64_t seed);

/// (2 Gamma(1 - u/2))^{-1/u} for u in (0, 2).
double chernoff_threshold(double u);

/// Average over trees of (min over depth-n paths of prod_{j=1..n} sqrt(T_{s|j}))^{1/n},
/// T_s unit exponentials keyed by node.  All 2^n paths are visited (log T is
/// unbounded below, so partial sums give no pruning bound).  n in [1, 24].
double bkh_speed_estimate(int n, std::uint64_t trees, std::uint64_t seed, int threads = 1);
/// Same with injected clocks T(tree, node).
double bkh_speed_estimate(int n, std::uint64_t trees,
                          const std::function<double(std::uint64_t, const Genealogy&)>& clock);

/// E[a^2 R^2 / (a^2 R^2 + theta)] over dilog ratios against (2/pi) arctan(a / sqrt(theta)).
BoundReport arctan_identity_check(double a, double theta, std::uint64_t reps, std::uint64_t seed);

struct LogRatioReport {
    BoundReport mean;  ///< two-sided against 0
    double m2 = 0.0;   ///< sample second moment of ln R
    double m4 = 0.0;   ///< sample fourth moment of ln R
};

/// Sample moments of ln R over dilog draws.  With `antithetic`, each draw R is
/// paired with 1/R, which makes the mean exactly 0.
LogRatioReport mean_log_ratio(std::uint64_t reps, std::uint64_t seed, bool antithetic = false);

struct RecurrenceSummary {
    std::vector<std::uint64_t> visits;  ///< per replicate
    double median = 0.0;
    double mean = 0.0;
    double fraction_with_visit = 0.0;
};

/// Visits of S_k = sum_{j<=k} ln R_j to [-eps, eps] for k = 1..steps.  The
/// walk of replicate i depends only on (seed, i), so scans with different eps
/// are coupled.  eps may be +infinity.
RecurrenceSummary recurrence_scan(double eps, std::uint64_t steps, std::uint64_t reps, std::uint64_t seed);

// ---- explosion-time equivalence ---------------------------------------------------

struct ScalingPair {
    std::string a;
    std::string b;
    KsReport ks;
};

struct ScalingEquivalenceReport {
    std::vector<double> xi_mags;
    std::vector<std::vector<double>> scaled_zeta;  ///< |xi|^2 zeta_n(|xi|), dilog, per |xi|
    std::vector<double> zeta_tilde;                ///< zeta~_n
    std::vector<ScalingPair> pairs;                ///< all pairs among the above
    bool all_pass = true;
    /// |xi|^2 zeta_n for the Bessel kernel at the largest |xi| against zeta~_n;
    /// expected to fail.  Present only when requested.
    bool has_control = false;
    ScalingPair control;
};

/// Every sample set uses its own stream family, so the sets are independent.
ScalingEquivalenceReport verify_scaling_equivalence(const std::vector<double>& xi_mags, int n, std::uint64_t reps,
                                                    std::uint64_t seed, bool with_control = true,
                                                    int threads = 1, double alpha = 0.001);

// ---- suite -----------------------------------------------------------------------

struct VerificationRecord {
    std::string test;
    std::vector<std::pair<std::string, double>> params;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Known suites: samplers, cascade, estimator, integraleq, bessel, appendix, all.
const std::vector<std::string>& verification_suites();

/// Runs a suite.  `scale` multiplies every replicate count (minimum 100 draws).
/// Throws std::invalid_argument for an unknown suite.
std::vector<VerificationRecord> run_verification_suite(const std::string& suite, std::uint64_t seed,
                                                       double scale = 1.0, int threads = 1);

} // namespace nscascade
