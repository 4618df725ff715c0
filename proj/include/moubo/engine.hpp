#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "moubo/acquisition.hpp"
#include "moubo/gp.hpp"
#include "moubo/problems.hpp"
#include "moubo/types.hpp"

namespace moubo {

struct OptimizerSettings {
    int n_probes = 512;     // random initial probes
    int top_k = 5;          // probes refined by local search
    int refine_iters = 100; // Nelder-Mead iterations per start
};

struct AcquisitionConfig {
    AcquisitionKind kind = AcquisitionKind::iehvi;
    double beta = 10.0;
    int n_pareto = 256;           // conditional-front support points
    int n_u = 64;                 // iehvi Monte Carlo samples over U
    bool crn = true;              // keep the u sample set fixed across iterations
    bool resample_pareto = true;  // fresh X_pareto each iteration
};

struct SeedConfig {
    std::uint64_t design = 1;
    std::uint64_t u = 2;
    std::uint64_t optimizer = 3;
};

// External simulator description for runs not using the built-in catalog.
struct ExternalProblemConfig {
    std::string command;
    Box x_box;
    Box u_box;
    std::size_t n_objectives = 2;
    std::string u_kind = "uniform";  // "uniform" or "gaussian"
    Point u_center;
    std::vector<double> u_variances;
};

struct RunConfig {
    int schema_version = 1;
    std::string problem;  // catalog name; empty when external is set
    std::optional<ExternalProblemConfig> external;
    int n_initial = 0;  // 0 -> 10 * dim(X x U)
    int budget = 0;
    AcquisitionConfig acquisition;
    OptimizerSettings optimizer;
    SeedConfig seeds;
    std::string out_dir;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);  // unknown keys rejected
    ProblemDefinition resolve_problem() const;
    int resolved_n_initial(const ProblemDefinition& p) const;
};

struct HistoryRecord {
    int iteration = 0;
    Point x;
    Point u;
    double acquisition_value = 0.0;
    bool fallback = false;  // acquisition was flat zero, max-uncertainty point used
    std::vector<std::vector<double>> log_params;  // per objective, empty for random kind
    std::vector<double> jitters;

    nlohmann::json to_json() const;
    static HistoryRecord from_json(const nlohmann::json& j);
};

// Low-discrepancy design in the joint box, evaluated by the true function.
DesignOfExperiments initial_design(const ProblemDefinition& problem, int n0, std::uint64_t seed);

struct MaximizeResult {
    Point point;
    double value = 0.0;
};

// Random multistart followed by Nelder-Mead refinement of the best probes,
// clamped to the box. Deterministic given the seed, including under threads.
MaximizeResult maximize_scalar(const std::function<double(const Point&)>& f, const Box& box,
                               const OptimizerSettings& settings, std::uint64_t seed,
                               int threads = 1);

struct SelectionResult {
    Point x;
    Point u;
    double acquisition_value = 0.0;
    bool fallback = false;
};

// Next point per acquisition kind: joint argmax for pehvi/wpehvi, argmax over
// X plus a U draw for iehvi, a uniform joint draw for random.
SelectionResult select_next(const GpSurrogate& model, const AcquisitionSpec& spec,
                            const ProblemDefinition& problem, const OptimizerSettings& settings,
                            std::uint64_t iter_seed, int threads = 1);

struct RunOutcome {
    std::filesystem::path dir;
    GpSurrogate model;
    DesignOfExperiments doe;
};

// Executes (or resumes) the optimization loop; persists config.json, doe.csv,
// history.jsonl and model.json under the run directory.
RunOutcome run(const RunConfig& config, int threads = 1);

}  // namespace moubo
