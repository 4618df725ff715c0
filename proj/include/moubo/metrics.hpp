#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "moubo/gp.hpp"
#include "moubo/problems.hpp"
#include "moubo/types.hpp"
#include "moubo/uncertainty.hpp"

namespace moubo {

// Generational distance: mean p-th power of point-to-set distances from the
// approximation to the reference, to the 1/p.
double gd_p(const FrontEstimate& approx, const FrontEstimate& reference, double p = 2.0);

// Same average taken over the reference front.
double igd_p(const FrontEstimate& approx, const FrontEstimate& reference, double p = 2.0);

// Averaged Hausdorff distance: max(gd_p, igd_p).
double delta_p(const FrontEstimate& approx, const FrontEstimate& reference, double p = 2.0);

// Mean squared difference of the two fields over identical candidates.
double coverage_l2(const CoverageField& truth, const CoverageField& estimate);

struct MetricReport {
    std::vector<double> per_u_delta;
    double delta_mean = 0.0;
    double delta_median = 0.0;
    double delta_q25 = 0.0;
    double delta_q75 = 0.0;
    double coverage_l2_value = -1.0;  // < 0 when not computed
    std::size_t n_u = 0;
    std::string run_id;
    std::string x_test_spec;

    nlohmann::json to_json() const;
};

// For each u sample: averaged Hausdorff distance between the true conditional
// front and its GP-mean plug-in estimate, both discretized over x_test.
MetricReport delta_distribution(const GpSurrogate& model, const ProblemDefinition& problem,
                                const USampleSet& u_samples, const CandidateSet& x_test,
                                int threads = 1);

// deltas.csv: columns u_index,delta.
void write_deltas_csv(const MetricReport& report, std::ostream& os);

double quantile(std::vector<double> values, double q);

}  // namespace moubo
