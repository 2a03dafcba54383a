#pragma once

#include "nscascade/cascade.hpp"
#include "nscascade/kernels.hpp"
#include "nscascade/vec3.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nscascade::cli {

/// Exit codes of the nscascade tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Version of the CSV layouts written by `run`.
inline constexpr int kCsvSchemaVersion = 1;

/// Invalid flag, config key or value.  The message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string kernel = "dilog";
    Wavenumber xi{0.0, 0.0, 1.0};
    bool xi_from_magnitude = false;
    double t = 1.0;
    double lambda = 1.0;
    int depth = 5;
    std::uint64_t reps = 1000;
    double nu = 1.0;
    std::string mode = "nonthinned";
    SimBudget budget{};
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = ".";
    // estimator
    double amplitude = 0.1;
    std::string initial_data = "aligned";
    double prune_tol = 0.0;
    // explosion
    std::string cascade = "ns";
    // picard
    std::string equation = "mtilde";
    double lambda_max = 10.0;
    double t_max = 0.0;  ///< 0 means lambda_max / |xi|^2
    int grid_intervals = 400;
    double grid_power = 2.0;
    double tol = 1e-8;
    int max_iters = 500;
    std::string picard_start = "zero";
    int gauss_order = 10;
    int singular_levels = 40;
    double r_max = 1e3;
    // verify
    std::string suite = "all";
    double scale = 1.0;
};

/// The command names, in help order.
const std::vector<std::string>& commands();

/// Parses flags and an optional `--config FILE` of `key = value` lines whose
/// keys are the long flag names.  Flags win over the file.  Throws ConfigError.
/// Returns false (after printing to `out`) when help was requested.
bool parse_config(const std::vector<std::string>& args, RunConfig& config, std::ostream& out);

/// Cross-field checks; throws ConfigError naming the field.
void validate(const RunConfig& config);

/// Runs a validated config, writing <out-dir>/<command>.csv, <command>.json and
/// <command>.timing.json.  Returns kExitOk, or kExitFailed when a verification fails.
int run(const RunConfig& config, std::ostream& log);

/// parse_config + validate + run with exit-code mapping; never throws.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace nscascade::cli
