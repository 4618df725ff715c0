#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "moubo/gp.hpp"
#include "moubo/types.hpp"

namespace moubo {

// Distribution of the uncertain variable U: a uniform box or a diagonal
// Gaussian truncated to a box.
struct UDistribution {
    enum class Kind { uniform_box, diagonal_gaussian };

    Kind kind = Kind::uniform_box;
    Box box;                        // support (uniform) or truncation box (gaussian)
    Point center;                   // gaussian only
    std::vector<double> variances;  // gaussian only, diagonal

    static UDistribution uniform(Box support);
    static UDistribution gaussian(Point center, std::vector<double> variances, Box truncation);

    std::size_t dim() const { return box.dim(); }

    // Truncated (renormalized) density; 0 outside the box.
    double density(const Point& u) const;
};

struct USampleSet {
    std::vector<Point> samples;
    std::uint64_t seed = 0;
    bool crn = true;  // fixed across BO iterations vs resampled

    std::size_t size() const { return samples.size(); }
};

// i.i.d. samples, deterministic per seed. The Gaussian variant truncates to its
// box by rejection and fails if the acceptance rate drops below 1e-3.
USampleSet sample_u(const UDistribution& dist, std::size_t n, std::uint64_t seed);

using Evaluator = std::function<ObjectiveVector(const Point& x, const Point& u)>;

// Conditional Pareto front and set at a fixed u, discretized over candidates.
std::pair<FrontEstimate, std::vector<std::size_t>> conditional_front_and_set(
    const Evaluator& evaluator, const CandidateSet& candidates, const Point& u);

enum class CoverageEstimator { true_function, gp_plugin };

// Per-candidate estimate of the probability that the candidate lies in the
// conditional Pareto set of a random U.
struct CoverageField {
    CandidateSet candidates;
    std::vector<double> probabilities;
    std::size_t n_u = 0;
    CoverageEstimator estimator = CoverageEstimator::true_function;
};

CoverageField coverage_probability(const Evaluator& evaluator, const CandidateSet& candidates,
                                   const USampleSet& u_samples, int threads = 1);

// Same field, with the GP posterior mean standing in for the true function.
CoverageField coverage_probability_plugin(const GpSurrogate& model, const CandidateSet& candidates,
                                          const USampleSet& u_samples, int threads = 1);

// CSV export: header x1..x_nx,probability, one row per candidate, full
// double precision.
void write_coverage_csv(const CoverageField& field, std::ostream& os);

// Deterministic parallel-for used for per-u computations: results land in
// caller-indexed slots so the outcome is independent of the schedule.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace moubo
