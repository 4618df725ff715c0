#include "moubo/bench.hpp"

#include <algorithm>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "moubo/metrics.hpp"
#include "moubo/rng.hpp"
#include "moubo/sobol.hpp"
#include "moubo/uncertainty.hpp"

namespace moubo {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError(context + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace

nlohmann::json BenchSpec::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["problem"] = problem;
    nlohmann::json ks = nlohmann::json::array();
    for (auto k : kinds) ks.push_back(to_string(k));
    j["kinds"] = ks;
    j["replications"] = replications;
    j["n_initial"] = n_initial;
    j["budget"] = budget;
    j["evaluation"] = {{"n_u", eval_n_u}, {"n_x_test", eval_n_x_test}};
    j["acquisition"] = {{"beta", acquisition.beta},
                        {"n_pareto", acquisition.n_pareto},
                        {"n_u", acquisition.n_u},
                        {"crn", acquisition.crn},
                        {"resample_pareto", acquisition.resample_pareto}};
    j["optimizer"] = {{"n_probes", optimizer.n_probes},
                      {"top_k", optimizer.top_k},
                      {"refine_iters", optimizer.refine_iters}};
    j["master_seed"] = master_seed;
    j["out_dir"] = out_dir;
    return j;
}

BenchSpec BenchSpec::from_json(const nlohmann::json& j) {
    check_keys(j,
               {"schema_version", "problem", "kinds", "replications", "n_initial", "budget",
                "evaluation", "acquisition", "optimizer", "master_seed", "out_dir"},
               "bench");
    BenchSpec s;
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != 1) throw ConfigError("bench: unsupported schema_version");
    s.problem = j.at("problem").get<std::string>();
    for (const auto& k : j.at("kinds")) s.kinds.push_back(acquisition_kind_from_string(k.get<std::string>()));
    if (s.kinds.empty()) throw ConfigError("bench: kinds must be non-empty");
    s.replications = j.value("replications", 1);
    if (s.replications < 1) throw ConfigError("bench: replications must be >= 1");
    s.n_initial = j.value("n_initial", 0);
    s.budget = j.value("budget", 0);
    if (j.contains("evaluation")) {
        const auto& e = j.at("evaluation");
        check_keys(e, {"n_u", "n_x_test"}, "bench.evaluation");
        s.eval_n_u = e.value("n_u", 128);
        s.eval_n_x_test = e.value("n_x_test", 2000);
    }
    if (j.contains("acquisition")) {
        const auto& a = j.at("acquisition");
        check_keys(a, {"beta", "n_pareto", "n_u", "crn", "resample_pareto"}, "bench.acquisition");
        s.acquisition.beta = a.value("beta", 10.0);
        s.acquisition.n_pareto = a.value("n_pareto", 256);
        s.acquisition.n_u = a.value("n_u", 64);
        s.acquisition.crn = a.value("crn", true);
        s.acquisition.resample_pareto = a.value("resample_pareto", true);
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        check_keys(o, {"n_probes", "top_k", "refine_iters"}, "bench.optimizer");
        s.optimizer.n_probes = o.value("n_probes", 512);
        s.optimizer.top_k = o.value("top_k", 5);
        s.optimizer.refine_iters = o.value("refine_iters", 100);
    }
    s.master_seed = j.value("master_seed", 1);
    s.out_dir = j.value("out_dir", std::string());
    return s;
}

const BenchKindResult& BenchSummary::result_for(AcquisitionKind kind) const {
    for (const auto& r : kinds)
        if (r.kind == kind) return r;
    throw std::invalid_argument("bench summary: kind not present");
}

nlohmann::json BenchSummary::to_json() const {
    nlohmann::json j;
    j["spec"] = spec.to_json();
    nlohmann::json out = nlohmann::json::object();
    for (const auto& kr : kinds) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& r : kr.runs) {
            nlohmann::json rj;
            rj["dir"] = r.dir;
            if (r.error.empty()) {
                rj["median_delta"] = r.median_delta;
                rj["mean_delta"] = r.mean_delta;
                rj["coverage_l2"] = r.coverage_l2;
            } else {
                rj["error"] = r.error;
            }
            runs.push_back(rj);
        }
        nlohmann::json kj;
        kj["runs"] = runs;
        kj["complete"] = kr.complete;
        if (kr.complete) {
            kj["median_delta"] = kr.median_delta;
            kj["median_coverage_l2"] = kr.median_coverage_l2;
        }
        out[to_string(kr.kind)] = kj;
    }
    j["kinds"] = out;
    return j;
}

BenchSummary run_bench(const BenchSpec& spec, int threads) {
    if (spec.out_dir.empty()) throw ConfigError("bench: out_dir must be set");
    const ProblemDefinition problem = find_problem(spec.problem);

    BenchSummary summary;
    summary.spec = spec;
    summary.kinds.resize(spec.kinds.size());

    struct Task {
        std::size_t kind_index;
        int replication;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < spec.kinds.size(); ++ki) {
        summary.kinds[ki].kind = spec.kinds[ki];
        summary.kinds[ki].runs.resize(static_cast<std::size_t>(spec.replications));
        for (int r = 0; r < spec.replications; ++r) tasks.push_back({ki, r});
    }

    parallel_for(tasks.size(), threads, [&](std::size_t t) {
        const Task task = tasks[t];
        const AcquisitionKind kind = spec.kinds[task.kind_index];
        BenchRun& out = summary.kinds[task.kind_index].runs[static_cast<std::size_t>(task.replication)];

        const std::uint64_t rep_seed =
            derive_seed(derive_seed(spec.master_seed, task.kind_index), static_cast<std::uint64_t>(task.replication));
        // Evaluation streams depend only on the replication index so the
        // comparison across kinds is paired.
        const std::uint64_t eval_seed =
            derive_seed(spec.master_seed, 0xE7A1u + static_cast<std::uint64_t>(task.replication));

        RunConfig rc;
        rc.problem = spec.problem;
        rc.n_initial = spec.n_initial;
        rc.budget = spec.budget;
        rc.acquisition = spec.acquisition;
        rc.acquisition.kind = kind;
        rc.optimizer = spec.optimizer;
        rc.seeds.design = derive_seed(rep_seed, 1);
        rc.seeds.u = derive_seed(rep_seed, 2);
        rc.seeds.optimizer = derive_seed(rep_seed, 3);
        rc.out_dir = (std::filesystem::path(spec.out_dir) / to_string(kind) /
                      ("rep_" + std::to_string(task.replication)))
                         .string();
        out.dir = rc.out_dir;

        try {
            RunOutcome outcome = run(rc);

            USampleSet u_eval =
                sample_u(problem.u_dist, static_cast<std::size_t>(spec.eval_n_u), derive_seed(eval_seed, 1));
            CandidateSet x_test = sobol_candidates(
                problem.x_box, static_cast<std::size_t>(spec.eval_n_x_test), derive_seed(eval_seed, 2));

            MetricReport report = delta_distribution(outcome.model, problem, u_eval, x_test);
            out.median_delta = report.delta_median;
            out.mean_delta = report.delta_mean;

            CoverageField truth = coverage_probability(problem.evaluate, x_test, u_eval);
            CoverageField plugin = coverage_probability_plugin(outcome.model, x_test, u_eval);
            out.coverage_l2 = coverage_l2(truth, plugin);
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });

    for (auto& kr : summary.kinds) {
        std::vector<double> medians, l2s;
        bool complete = true;
        for (const auto& r : kr.runs) {
            if (!r.error.empty()) {
                complete = false;
                continue;
            }
            medians.push_back(r.median_delta);
            l2s.push_back(r.coverage_l2);
        }
        kr.complete = complete && !medians.empty();
        if (!medians.empty()) {
            kr.median_delta = quantile(medians, 0.5);
            kr.median_coverage_l2 = quantile(l2s, 0.5);
        }
    }
    return summary;
}

}  // namespace moubo
