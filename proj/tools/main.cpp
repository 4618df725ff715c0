#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "moubo/bench.hpp"
#include "moubo/csv.hpp"
#include "moubo/engine.hpp"
#include "moubo/metrics.hpp"
#include "moubo/problems.hpp"
#include "moubo/rng.hpp"
#include "moubo/sobol.hpp"
#include "moubo/uncertainty.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEvaluator = 3;
constexpr int kExitMissing = 4;

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw moubo::ConfigError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw moubo::ConfigError(path + ": " + e.what());
    }
}

struct CoverageOptions {
    std::string problem;
    std::string run_dir;
    int grid = 0;
    int points = 0;
    int n_u = 2048;
    std::uint64_t seed = 1;
    double top_quantile = 0.0;
    std::string out = "coverage.csv";
    int threads = 1;
};

int cmd_coverage(const CoverageOptions& opt) {
    using namespace moubo;
    if (opt.problem.empty() == opt.run_dir.empty())
        throw ConfigError("coverage: give exactly one of --problem or --run");

    ProblemDefinition problem;
    GpSurrogate model;
    bool plugin = false;
    if (!opt.problem.empty()) {
        problem = find_problem(opt.problem);
    } else {
        const std::filesystem::path dir(opt.run_dir);
        if (!std::filesystem::exists(dir / "config.json"))
            throw MissingArtifactError("coverage: no config.json under " + opt.run_dir);
        RunConfig rc = RunConfig::from_json(load_json_file((dir / "config.json").string()));
        problem = rc.resolve_problem();
        if (!std::filesystem::exists(dir / "model.json"))
            throw MissingArtifactError("coverage: no model.json under " + opt.run_dir);
        model = GpSurrogate::from_json(load_json_file((dir / "model.json").string()));
        plugin = true;
    }

    CandidateSet candidates;
    const std::size_t nx = problem.x_box.dim();
    if (opt.grid > 0 && opt.points > 0) throw ConfigError("coverage: --grid and --points conflict");
    if (opt.grid > 0) {
        double total = 1;
        for (std::size_t k = 0; k < nx; ++k) total *= opt.grid;
        if (total > 1e7)
            throw ConfigError("coverage: grid of " + std::to_string(total) +
                              " candidates exceeds the 1e7 limit; use --points for a "
                              "low-discrepancy set instead");
        candidates = grid_candidates(problem.x_box, static_cast<std::size_t>(opt.grid));
    } else if (opt.points > 0) {
        if (opt.points > 10000000) throw ConfigError("coverage: more than 1e7 candidates refused");
        candidates = sobol_candidates(problem.x_box, static_cast<std::size_t>(opt.points),
                                      derive_seed(opt.seed, 7));
    } else if (nx <= 3) {
        candidates = grid_candidates(problem.x_box, 64);
    } else {
        candidates = sobol_candidates(problem.x_box, 4096, derive_seed(opt.seed, 7));
    }

    USampleSet u_samples =
        sample_u(problem.u_dist, static_cast<std::size_t>(opt.n_u), derive_seed(opt.seed, 8));

    CoverageField field = plugin
                              ? coverage_probability_plugin(model, candidates, u_samples, opt.threads)
                              : coverage_probability(problem.evaluate, candidates, u_samples,
                                                     opt.threads);

    if (opt.top_quantile > 0.0) {
        const double thr = quantile(field.probabilities, 1.0 - opt.top_quantile / 100.0);
        CoverageField filtered;
        filtered.candidates.bounds = field.candidates.bounds;
        filtered.n_u = field.n_u;
        filtered.estimator = field.estimator;
        for (std::size_t i = 0; i < field.probabilities.size(); ++i) {
            if (field.probabilities[i] >= thr) {
                filtered.candidates.points.push_back(field.candidates.points[i]);
                filtered.probabilities.push_back(field.probabilities[i]);
            }
        }
        field = std::move(filtered);
    }

    std::ofstream out(opt.out);
    if (!out) throw ConfigError("coverage: cannot write " + opt.out);
    write_coverage_csv(field, out);
    std::cout << opt.out << "\n";
    return kExitOk;
}

struct MetricsOptions {
    std::string run_dir;
    int n_u = 512;
    int n_x_test = 5000;
    std::uint64_t seed = 1;
    std::string out;
    int threads = 1;
};

int cmd_metrics(const MetricsOptions& opt) {
    using namespace moubo;
    const std::filesystem::path dir(opt.run_dir);
    if (!std::filesystem::exists(dir / "config.json"))
        throw MissingArtifactError("metrics: no config.json under " + opt.run_dir);
    RunConfig rc = RunConfig::from_json(load_json_file((dir / "config.json").string()));
    ProblemDefinition problem = rc.resolve_problem();
    if (!std::filesystem::exists(dir / "model.json"))
        throw MissingArtifactError("metrics: no model.json under " + opt.run_dir);
    GpSurrogate model = GpSurrogate::from_json(load_json_file((dir / "model.json").string()));

    USampleSet u_samples =
        sample_u(problem.u_dist, static_cast<std::size_t>(opt.n_u), derive_seed(opt.seed, 11));
    CandidateSet x_test = sobol_candidates(problem.x_box, static_cast<std::size_t>(opt.n_x_test),
                                           derive_seed(opt.seed, 12));

    MetricReport report = delta_distribution(model, problem, u_samples, x_test, opt.threads);
    report.run_id = opt.run_dir;
    report.x_test_spec = "sobol:" + std::to_string(opt.n_x_test) + ":seed" + std::to_string(opt.seed);

    CoverageField truth = coverage_probability(problem.evaluate, x_test, u_samples, opt.threads);
    CoverageField plugin = coverage_probability_plugin(model, x_test, u_samples, opt.threads);
    report.coverage_l2_value = coverage_l2(truth, plugin);

    const std::filesystem::path out_dir = opt.out.empty() ? dir : std::filesystem::path(opt.out);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "metrics.json");
        out << report.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(out_dir / "deltas.csv");
        write_deltas_csv(report, out);
    }
    std::cout << (out_dir / "metrics.json").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiobjective Bayesian optimization under parametric uncertainty"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::string out;
    int threads = 1;
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--out", out, "output directory or file");
    app.add_option("--threads", threads, "worker threads")->capture_default_str();

    auto* run_cmd = app.add_subcommand("run", "execute a Bayesian optimization run");
    std::string run_config_path;
    run_cmd->add_option("config", run_config_path, "run configuration JSON")->required();

    auto* cov_cmd = app.add_subcommand("coverage", "estimate the coverage probability field");
    CoverageOptions cov;
    cov_cmd->add_option("--problem", cov.problem, "catalog problem name (true-function field)");
    cov_cmd->add_option("--run", cov.run_dir, "run directory (GP plug-in field)");
    cov_cmd->add_option("--grid", cov.grid, "regular grid points per dimension");
    cov_cmd->add_option("--points", cov.points, "low-discrepancy candidate count");
    cov_cmd->add_option("--n-u", cov.n_u, "number of U samples")->capture_default_str();
    cov_cmd->add_option("--top-quantile", cov.top_quantile,
                        "write only candidates in the top q% of probabilities");

    auto* met_cmd = app.add_subcommand("metrics", "front-quality metrics for a finished run");
    MetricsOptions met;
    met_cmd->add_option("run_dir", met.run_dir, "run directory")->required();
    met_cmd->add_option("--n-u", met.n_u, "number of U samples")->capture_default_str();
    met_cmd->add_option("--x-test", met.n_x_test, "test candidate count")->capture_default_str();

    auto* bench_cmd = app.add_subcommand("bench", "replicated acquisition comparison");
    std::string bench_spec_path;
    bench_cmd->add_option("spec", bench_spec_path, "bench specification JSON")->required();

    auto* problems_cmd = app.add_subcommand("problems", "list the built-in problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) {
            moubo::RunConfig rc = moubo::RunConfig::from_json(load_json_file(run_config_path));
            if (!out.empty()) rc.out_dir = out;
            if (app.count("--seed")) {
                rc.seeds.design = moubo::derive_seed(seed, 1);
                rc.seeds.u = moubo::derive_seed(seed, 2);
                rc.seeds.optimizer = moubo::derive_seed(seed, 3);
            }
            moubo::RunOutcome outcome = moubo::run(rc, threads);
            std::cout << outcome.dir.string() << "\n";
            return kExitOk;
        }
        if (cov_cmd->parsed()) {
            cov.seed = seed;
            cov.threads = threads;
            if (!out.empty()) cov.out = out;
            return cmd_coverage(cov);
        }
        if (met_cmd->parsed()) {
            met.seed = seed;
            met.threads = threads;
            met.out = out;
            return cmd_metrics(met);
        }
        if (bench_cmd->parsed()) {
            moubo::BenchSpec spec = moubo::BenchSpec::from_json(load_json_file(bench_spec_path));
            if (!out.empty()) spec.out_dir = out;
            if (app.count("--seed")) spec.master_seed = seed;
            moubo::BenchSummary summary = moubo::run_bench(spec, threads);
            std::filesystem::create_directories(spec.out_dir);
            const std::filesystem::path summary_path =
                std::filesystem::path(spec.out_dir) / "summary.json";
            std::ofstream sout(summary_path);
            sout << summary.to_json().dump(2) << "\n";
            std::cout << summary_path.string() << "\n";
            return kExitOk;
        }
        if (problems_cmd->parsed()) {
            for (const auto& p : moubo::problem_catalog()) {
                std::cout << p.name << "  x:" << p.x_box.dim() << "d u:" << p.u_box.dim()
                          << "d objectives:" << p.n_objectives << "\n";
            }
            return kExitOk;
        }
    } catch (const moubo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const moubo::EvaluatorError& e) {
        std::cerr << "evaluator error: " << e.what() << "\n";
        return kExitEvaluator;
    } catch (const moubo::MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitMissing;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
