#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "moubo/engine.hpp"

namespace moubo {

// Replicated comparison of acquisition kinds on one problem. Per-replication
// seeds derive from the master seed; evaluation seeds are shared across kinds
// so replications are paired.
struct BenchSpec {
    int schema_version = 1;
    std::string problem;
    std::vector<AcquisitionKind> kinds;
    int replications = 1;
    int n_initial = 0;  // 0 -> 10 * dim(X x U)
    int budget = 0;
    int eval_n_u = 128;
    int eval_n_x_test = 2000;
    AcquisitionConfig acquisition;  // kind field ignored; per-kind copy made
    OptimizerSettings optimizer;
    std::uint64_t master_seed = 1;
    std::string out_dir;

    nlohmann::json to_json() const;
    static BenchSpec from_json(const nlohmann::json& j);
};

struct BenchRun {
    std::string dir;
    double median_delta = 0.0;
    double mean_delta = 0.0;
    double coverage_l2 = 0.0;
    std::string error;  // non-empty when the replication failed
};

struct BenchKindResult {
    AcquisitionKind kind = AcquisitionKind::random;
    std::vector<BenchRun> runs;
    bool complete = false;
    double median_delta = 0.0;  // median over replications of per-run medians
    double median_coverage_l2 = 0.0;
};

struct BenchSummary {
    BenchSpec spec;
    std::vector<BenchKindResult> kinds;

    const BenchKindResult& result_for(AcquisitionKind kind) const;
    nlohmann::json to_json() const;
};

BenchSummary run_bench(const BenchSpec& spec, int threads = 1);

}  // namespace moubo
