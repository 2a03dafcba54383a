#include "cli.hpp"

#include "nscascade/analysis.hpp"
#include "nscascade/estimator.hpp"
#include "nscascade/integraleq.hpp"
#include "nscascade/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace nscascade::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char ch : s) {
        q += ch;
        if (ch == '"') {
            q += '"';
        }
    }
    return q + "\"";
}

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json coeff_json(const CoeffVec& v)
{
    return Json{{"re", {v.x.real(), v.y.real(), v.z.real()}}, {"im", {v.x.imag(), v.y.imag(), v.z.imag()}}};
}

Json config_json(const RunConfig& c)
{
    // threads and out_dir are deliberately absent: they never change results,
    // and leaving them out keeps the summary byte-identical across runs.
    return Json{{"command", c.command},
                {"kernel", c.kernel},
                {"xi", vec_json(c.xi)},
                {"t", c.t},
                {"lambda", c.lambda},
                {"depth", c.depth},
                {"reps", c.reps},
                {"nu", c.nu},
                {"mode", c.mode},
                {"max_nodes", c.budget.max_nodes},
                {"max_depth", c.budget.max_depth},
                {"seed", c.seed},
                {"amplitude", c.amplitude},
                {"initial_data", c.initial_data},
                {"prune_tol", c.prune_tol},
                {"cascade", c.cascade},
                {"equation", c.equation},
                {"lambda_max", c.lambda_max},
                {"t_max", c.t_max},
                {"grid_intervals", c.grid_intervals},
                {"grid_power", c.grid_power},
                {"tol", c.tol},
                {"max_iters", c.max_iters},
                {"picard_start", c.picard_start},
                {"gauss_order", c.gauss_order},
                {"singular_levels", c.singular_levels},
                {"r_max", c.r_max},
                {"suite", c.suite},
                {"scale", c.scale}};
}

struct Output {
    std::ostringstream csv;
    Json summary;
};

Json base_summary(const RunConfig& c, std::uint64_t n_replicates)
{
    return Json{{"command", c.command},
                {"csv_schema", kCsvSchemaVersion},
                {"config", config_json(c)},
                {"n_replicates", n_replicates},
                {"mean", nullptr},
                {"stderr", nullptr},
                {"truncated_fraction", 0.0}};
}

std::vector<double> collect(std::uint64_t n, int threads, const std::function<double(std::uint64_t)>& f)
{
    std::vector<double> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

// ---- commands ----------------------------------------------------------------

void run_sample(const RunConfig& c, Output& o)
{
    const KernelKind kernel = KernelKind::from_name(c.kernel);
    std::vector<OffspringPair> draws(c.reps);
    parallel_for(c.reps, c.threads, [&](std::size_t i) {
        RngStream rng(c.seed, i);
        draws[i] = sample_offspring(kernel, c.xi, rng);
    });
    const double mag = c.xi.norm();
    o.csv << "replicate,ratio,w1_x,w1_y,w1_z\n";
    std::vector<double> logs(c.reps);
    std::vector<double> ratios(c.reps);
    for (std::uint64_t i = 0; i < c.reps; ++i) {
        const Vec3& w = draws[i].w1;
        ratios[i] = w.norm() / mag;
        logs[i] = std::log(ratios[i]);
        o.csv << i << ',' << num(ratios[i]) << ',' << num(w.x) << ',' << num(w.y) << ',' << num(w.z) << '\n';
    }
    std::sort(ratios.begin(), ratios.end());
    const std::size_t mid = ratios.size() / 2;
    const double median = ratios.size() % 2 == 1 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
    const auto [mean, se] = mean_and_stderr(logs);
    o.summary = base_summary(c, c.reps);
    o.summary["mean"] = Json{{"log_ratio", mean}, {"median_ratio", median}};
    o.summary["stderr"] = Json{{"log_ratio", se}};
}

void run_cascade(const RunConfig& c, Output& o)
{
    const KernelKind kernel = KernelKind::from_name(c.kernel);
    CascadeParams p{c.t, mode_from_name(c.mode), c.nu, c.budget};
    std::vector<TreeSummary> trees(c.reps);
    parallel_for(c.reps, c.threads,
                 [&](std::size_t i) { trees[i] = summarize_ns_tree(c.xi, p, kernel, RngStream(c.seed, i)); });
    o.csv << "replicate,nodes,branchings,alive,deaths,max_depth,truncated\n";
    std::vector<double> nodes;
    std::vector<double> alive;
    std::uint64_t truncated = 0;
    for (std::uint64_t i = 0; i < c.reps; ++i) {
        const TreeSummary& s = trees[i];
        o.csv << i << ',' << s.nodes << ',' << s.branchings << ',' << s.alive << ',' << s.deaths << ','
              << s.max_depth << ',' << s.truncated << '\n';
        nodes.push_back(double(s.nodes));
        alive.push_back(double(s.alive));
        truncated += s.truncated > 0 ? 1 : 0;
    }
    const auto [mn, sn] = mean_and_stderr(nodes);
    const auto [ma, sa] = mean_and_stderr(alive);
    o.summary = base_summary(c, c.reps);
    o.summary["mean"] = Json{{"nodes", mn}, {"alive", ma}};
    o.summary["stderr"] = Json{{"nodes", sn}, {"alive", sa}};
    o.summary["truncated_fraction"] = double(truncated) / double(c.reps);
}

void run_explosion(const RunConfig& c, Output& o)
{
    std::vector<double> values;
    if (c.cascade == "ns") {
        const KernelKind kernel = KernelKind::from_name(c.kernel);
        values = collect(c.reps, c.threads,
                         [&](std::uint64_t i) { return zeta_n(c.xi, c.depth, kernel, RngStream(c.seed, i)); });
    } else {
        const Vec3 e = c.xi * (1.0 / c.xi.norm());
        values = collect(c.reps, c.threads,
                         [&](std::uint64_t i) { return zeta_tilde_n(c.depth, RngStream(c.seed, i), e); });
    }
    o.csv << "replicate,value\n";
    for (std::uint64_t i = 0; i < c.reps; ++i) {
        o.csv << i << ',' << num(values[i]) << '\n';
    }
    const auto [mean, se] = mean_and_stderr(values);
    o.summary = base_summary(c, c.reps);
    o.summary["mean"] = mean;
    o.summary["stderr"] = se;
}

void payoff_csv(const std::vector<Payoff>& payoffs, double scale, std::ostream& csv)
{
    csv << "replicate,truncated,re_x,im_x,re_y,im_y,re_z,im_z\n";
    for (std::size_t i = 0; i < payoffs.size(); ++i) {
        csv << i << ',' << (payoffs[i].truncated ? 1 : 0);
        for (int k = 0; k < 3; ++k) {
            const Complex v = payoffs[i].truncated ? Complex{} : scale * payoffs[i].value[k];
            csv << ',' << num(v.real()) << ',' << num(v.imag());
        }
        csv << '\n';
    }
}

Json report_fields(const RunConfig& c, const EstimateReport& r, Json summary)
{
    summary["n_replicates"] = c.reps;
    summary["mean"] = coeff_json(r.mean);
    summary["stderr"] = Json::array({r.std_error[0], r.std_error[1], r.std_error[2]});
    summary["truncated_fraction"] = r.truncated_fraction;
    summary["replicates_used"] = r.replicates;
    summary["divergence_residual"] = r.divergence_residual;
    summary["pruned_subtrees"] = r.pruned;
    summary["prune_error_bound"] = r.prune_error_bound;
    return summary;
}

void run_estimate(const RunConfig& c, Output& o)
{
    const KernelKind kernel = KernelKind::from_name(c.kernel);
    const InitialData u0 = InitialData::from_name(c.initial_data, kernel, c.amplitude);
    EstimateParams p;
    p.t = c.t;
    p.mode = mode_from_name(c.mode);
    p.nu = c.nu;
    p.budget = c.budget;
    p.reps = c.reps;
    p.threads = c.threads;
    p.pruning.tol = c.prune_tol;
    const auto payoffs = ns_payoffs(c.xi, p, u0, kernel, c.seed);
    const double h = kernel.h(c.xi);
    payoff_csv(payoffs, h, o.csv);
    o.summary = report_fields(c, summarize_payoffs(payoffs, h, c.xi), base_summary(c, c.reps));
    o.summary["initial_value"] = coeff_json(u0(c.xi));
}

void run_selfsim(const RunConfig& c, Output& o)
{
    const InitialData u0 = InitialData::from_name(c.initial_data, KernelKind::dilog(), c.amplitude);
    const Vec3 e = c.xi * (1.0 / c.xi.norm());
    SelfSimilarParams p;
    p.lambda = c.lambda;
    p.budget = c.budget;
    p.reps = c.reps;
    p.threads = c.threads;
    p.pruning.tol = c.prune_tol;
    const auto payoffs = selfsimilar_payoffs(e, p, u0, c.seed);
    payoff_csv(payoffs, 1.0, o.csv);
    const EstimateReport r = summarize_payoffs(payoffs, 1.0, e);
    o.summary = report_fields(c, r, base_summary(c, c.reps));
    const LerayPoint lp = leray_profile(e, c.lambda, r.mean);
    o.summary["leray_profile"] = Json{{"point", vec_json(lp.point)}, {"value", coeff_json(lp.value)}};
}

void run_picard(const RunConfig& c, Output& o)
{
    QuadratureSpec q{c.gauss_order, c.singular_levels, c.r_max};
    PicardOptions po;
    po.start = picard_start_from_name(c.picard_start);
    po.max_iters = c.max_iters;
    po.tol = c.tol;
    po.threads = c.threads;
    PicardResult res;
    std::string variable = "lambda";
    if (c.equation == "mtilde") {
        res = picard_mtilde(graded_grid(c.lambda_max, c.grid_intervals, c.grid_power).nodes, po, q);
    } else {
        const double mag = c.xi.norm();
        const double t_max = c.t_max > 0.0 ? c.t_max : c.lambda_max / (mag * mag);
        res = picard_m_ns(mag, graded_grid(t_max, c.grid_intervals, c.grid_power).nodes, po, q);
        variable = "t";
    }
    o.csv << variable << ",value\n";
    for (std::size_t i = 0; i < res.grid.nodes.size(); ++i) {
        o.csv << num(res.grid.nodes[i]) << ',' << num(res.grid.values[i]) << '\n';
    }
    o.summary = base_summary(c, 0);
    o.summary["picard"] = Json{{"variable", variable},
                               {"nodes", res.grid.nodes.size()},
                               {"iterations", res.iterations},
                               {"converged", res.converged},
                               {"sup_residual", res.sup_residual},
                               {"monotone_flag", res.monotone_flag},
                               {"flat_extension", res.flat_extension},
                               {"residual_history", res.residual_history}};
}

bool run_verify(const RunConfig& c, Output& o)
{
    const auto records = run_verification_suite(c.suite, c.seed, c.scale, c.threads);
    o.csv << "test,params,statistic,threshold,pass\n";
    Json list = Json::array();
    bool all = true;
    for (const auto& r : records) {
        std::string param_text;
        for (const auto& [k, v] : r.params) {
            param_text += (param_text.empty() ? "" : ";") + k + "=" + num(v);
        }
        o.csv << csv_field(r.test) << ',' << csv_field(param_text) << ',' << num(r.statistic) << ','
              << num(r.threshold) << ',' << (r.pass ? 1 : 0)
              << '\n';
        Json params = Json::object();
        for (const auto& [k, v] : r.params) {
            params[k] = v;
        }
        list.push_back(Json{{"test", r.test},
                            {"params", params},
                            {"statistic", std::isfinite(r.statistic) ? Json(r.statistic) : Json("inf")},
                            {"threshold", r.threshold},
                            {"pass", r.pass}});
        all = all && r.pass;
    }
    o.summary = base_summary(c, records.size());
    o.summary["pass"] = all;
    o.summary["records"] = list;
    return all;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("out-dir: cannot write " + path.string());
    }
    f << text;
    if (!f) {
        throw ConfigError("out-dir: failed writing " + path.string());
    }
}

} // namespace

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"sample",  "cascade", "explosion", "estimate",
                                                "selfsim", "picard",  "verify"};
    return names;
}

bool parse_config(const std::vector<std::string>& args, RunConfig& c, std::ostream& out)
{
    CLI::App app{"Stochastic cascades for the Navier-Stokes equations in Fourier space", "nscascade"};
    app.allow_config_extras(false);
    app.set_config("--config", "", "Read key = value lines; keys are the long flag names");

    app.add_option("command", c.command, "One of: sample cascade explosion estimate selfsim picard verify")
        ->required()
        ->check(CLI::IsMember(commands()));
    app.add_option("--kernel", c.kernel, "dilog | bessel")->check(CLI::IsMember({"dilog", "bessel"}))->capture_default_str();
    std::vector<double> xi;
    auto* xi_opt = app.add_option("--xi", xi, "Wavenumber x,y,z")->delimiter(',')->expected(3);
    double xi_mag = 0.0;
    auto* mag_opt = app.add_option("--xi-mag", xi_mag, "Wavenumber magnitude (direction e_z)");
    mag_opt->excludes(xi_opt);
    app.add_option("--t", c.t, "Time horizon")->capture_default_str();
    app.add_option("--lambda", c.lambda, "Similarity horizon for selfsim")->capture_default_str();
    app.add_option("--depth", c.depth, "Generation n for explosion")->capture_default_str();
    app.add_option("--reps", c.reps, "Replicates")->capture_default_str();
    app.add_option("--nu", c.nu, "Viscosity")->capture_default_str();
    app.add_option("--mode", c.mode, "nonthinned | thinned")
        ->check(CLI::IsMember({"thinned", "nonthinned"}))
        ->capture_default_str();
    app.add_option("--max-nodes", c.budget.max_nodes, "Node budget per tree")->capture_default_str();
    app.add_option("--max-depth", c.budget.max_depth, "Depth budget per tree")->capture_default_str();
    app.add_option("--seed", c.seed, "Master seed (env NSCASCADE_SEED)")->envname("NSCASCADE_SEED")->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads; results do not depend on it")->capture_default_str();
    app.add_option("--out-dir", c.out_dir, "Directory for CSV/JSON output")->capture_default_str();
    app.add_option("--amplitude", c.amplitude, "Initial data amplitude a")->capture_default_str();
    app.add_option("--initial-data", c.initial_data, "aligned | helical | zero")
        ->check(CLI::IsMember({"aligned", "helical", "zero"}))
        ->capture_default_str();
    app.add_option("--prune-tol", c.prune_tol, "Subtree pruning tolerance (0 = off)")->capture_default_str();
    app.add_option("--cascade", c.cascade, "ns | selfsimilar (explosion)")
        ->check(CLI::IsMember({"ns", "selfsimilar"}))
        ->capture_default_str();
    app.add_option("--equation", c.equation, "mtilde | ns (picard)")
        ->check(CLI::IsMember({"mtilde", "ns"}))
        ->capture_default_str();
    app.add_option("--lambda-max", c.lambda_max, "Largest grid lambda")->capture_default_str();
    app.add_option("--t-max", c.t_max, "Largest grid t for --equation ns (default lambda-max/|xi|^2)");
    app.add_option("--grid-intervals", c.grid_intervals, "Grid intervals")->capture_default_str();
    app.add_option("--grid-power", c.grid_power, "Grid grading exponent toward 0")->capture_default_str();
    app.add_option("--tol", c.tol, "Picard sup-change tolerance")->capture_default_str();
    app.add_option("--max-iters", c.max_iters, "Picard iteration cap")->capture_default_str();
    app.add_option("--picard-start", c.picard_start, "zero | one")
        ->check(CLI::IsMember({"zero", "one"}))
        ->capture_default_str();
    app.add_option("--gauss-order", c.gauss_order, "Gauss-Legendre points per radial panel")->capture_default_str();
    app.add_option("--singular-levels", c.singular_levels, "Graded panels on each side of r = 1")->capture_default_str();
    app.add_option("--r-max", c.r_max, "Radial truncation")->capture_default_str();
    app.add_option("--suite", c.suite, "Verification suite")
        ->check(CLI::IsMember(verification_suites()))
        ->capture_default_str();
    app.add_option("--scale", c.scale, "Multiplier on verification replicate counts")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return false;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    if (!xi.empty()) {
        c.xi = {xi[0], xi[1], xi[2]};
    }
    if (mag_opt->count() > 0) {
        c.xi = {0.0, 0.0, xi_mag};
        c.xi_from_magnitude = true;
    }
    return true;
}

void validate(const RunConfig& c)
{
    auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(field) + ": must be positive and finite");
        }
    };
    const double mag = c.xi.norm();
    if (!(mag > 0.0) || !std::isfinite(mag)) {
        throw ConfigError("xi: wavenumber must be nonzero and finite");
    }
    positive(c.t, "t");
    positive(c.lambda, "lambda");
    positive(c.nu, "nu");
    positive(c.lambda_max, "lambda-max");
    positive(c.tol, "tol");
    positive(c.scale, "scale");
    positive(c.r_max, "r-max");
    if (c.depth < 0 || c.depth > kDefaultZetaDepth) {
        throw ConfigError("depth: " + std::to_string(c.depth) + " is outside [0, " +
                          std::to_string(kDefaultZetaDepth) + "], the branch-and-bound maximum");
    }
    if (c.reps < 1) {
        throw ConfigError("reps: must be at least 1");
    }
    if (c.budget.max_nodes < 1) {
        throw ConfigError("max-nodes: must be positive");
    }
    if (c.budget.max_depth < 1 || c.budget.max_depth > kMaxTreeDepth) {
        throw ConfigError("max-depth: must lie in [1, " + std::to_string(kMaxTreeDepth) + "]");
    }
    if (c.threads < 1 || c.threads > 1024) {
        throw ConfigError("threads: must lie in [1, 1024]");
    }
    if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude)) {
        throw ConfigError("amplitude: must be finite and non-negative");
    }
    if (!(c.prune_tol >= 0.0) || !std::isfinite(c.prune_tol)) {
        throw ConfigError("prune-tol: must be finite and non-negative");
    }
    if (!(c.t_max >= 0.0) || !std::isfinite(c.t_max)) {
        throw ConfigError("t-max: must be finite and non-negative");
    }
    if (c.grid_intervals < 1 || c.grid_intervals > 100000) {
        throw ConfigError("grid-intervals: must lie in [1, 100000]");
    }
    if (!(c.grid_power >= 1.0 && c.grid_power <= 4.0)) {
        throw ConfigError("grid-power: must lie in [1, 4]");
    }
    if (c.max_iters < 1) {
        throw ConfigError("max-iters: must be at least 1");
    }
    if (c.gauss_order < 1 || c.gauss_order > 200) {
        throw ConfigError("gauss-order: must lie in [1, 200]");
    }
    if (c.singular_levels < 1 || c.singular_levels > 50) {
        throw ConfigError("singular-levels: must lie in [1, 50]");
    }
    if (!(c.r_max > 2.0)) {
        throw ConfigError("r-max: must exceed 2");
    }
    if (c.command == "selfsim" && c.kernel != "dilog") {
        throw ConfigError("kernel: the self-similar cascade uses the dilog kernel only");
    }
    if (c.command == "explosion" && c.cascade == "selfsimilar" && c.kernel != "dilog") {
        throw ConfigError("kernel: the self-similar cascade uses the dilog kernel only");
    }
}

int run(const RunConfig& c, std::ostream& log)
{
    const auto start = std::chrono::steady_clock::now();
    Output o;
    bool passed = true;
    if (c.command == "sample") {
        run_sample(c, o);
    } else if (c.command == "cascade") {
        run_cascade(c, o);
    } else if (c.command == "explosion") {
        run_explosion(c, o);
    } else if (c.command == "estimate") {
        run_estimate(c, o);
    } else if (c.command == "selfsim") {
        run_selfsim(c, o);
    } else if (c.command == "picard") {
        run_picard(c, o);
    } else if (c.command == "verify") {
        passed = run_verify(c, o);
    } else {
        throw ConfigError("command: unknown '" + c.command + "'");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) {
        throw ConfigError("out-dir: cannot create " + c.out_dir + ": " + ec.message());
    }
    const fs::path dir(c.out_dir);
    write_file(dir / (c.command + ".csv"), o.csv.str());
    write_file(dir / (c.command + ".json"), o.summary.dump(2) + "\n");
    const Json timing{{"command", c.command}, {"wall_seconds", wall}, {"threads", c.threads}, {"out_dir", c.out_dir}};
    write_file(dir / (c.command + ".timing.json"), timing.dump(2) + "\n");
    log << c.command << ": wrote " << (dir / (c.command + ".csv")).string() << " and "
        << (dir / (c.command + ".json")).string() << '\n';
    if (c.command == "verify") {
        log << "verify: " << (passed ? "all checks passed" : "some checks FAILED") << '\n';
    }
    return passed ? kExitOk : kExitFailed;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    try {
        RunConfig config;
        if (!parse_config(args, config, out)) {
            return kExitOk;
        }
        validate(config);
        return run(config, out);
    } catch (const ConfigError& e) {
        err << "nscascade: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "nscascade: error: " << e.what() << '\n';
        return kExitUsage;
    } catch (...) {
        err << "nscascade: unknown error\n";
        return kExitUsage;
    }
}

} // namespace nscascade::cli
