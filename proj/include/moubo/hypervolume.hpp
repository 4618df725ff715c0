#pragma once

#include <cstdint>
#include <vector>

#include "moubo/types.hpp"

namespace moubo {

// Upper corner of the region the hypervolume is measured against. Should be
// dominated by the nadir of the front it bounds.
struct ReferencePoint {
    ObjectiveVector values;
};

// Lebesgue measure of the region dominated by the front inside the box bounded
// above by ref. Points not dominating ref contribute only their intersection
// with the box. Exact for d in {2, 3}; throws for d >= 4.
double hv(const FrontEstimate& front, const ReferencePoint& ref);

// hv(front + {y}) - hv(front); 0 when y adds no dominated volume inside the box.
double hvi(const ObjectiveVector& y, const FrontEstimate& front, const ReferencePoint& ref);

// Closed-form expected hypervolume improvement for d == 2 with independent
// Gaussian objectives. stddev entries <= 0 are treated as deterministic
// coordinates (the zero-variance limit).
double ehvi_2d(const ObjectiveVector& mean, const std::vector<double>& stddev,
               const FrontEstimate& front, const ReferencePoint& ref);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Plain Monte Carlo EHVI over independent Gaussian draws; counter-based
// substreams make the result a function of (inputs, seed) only.
McEstimate ehvi_mc(const ObjectiveVector& mean, const std::vector<double>& stddev,
                   const FrontEstimate& front, const ReferencePoint& ref, std::size_t n_samples,
                   std::uint64_t seed);

// Quasi-Monte Carlo EHVI (digitally shifted Sobol Gaussian draws); used as the
// d == 3 fallback where no analytic path is provided.
double ehvi_qmc(const ObjectiveVector& mean, const std::vector<double>& stddev,
                const FrontEstimate& front, const ReferencePoint& ref, std::size_t n_samples,
                std::uint64_t seed);

// Dispatch: analytic for d == 2, qMC (default 4096 draws) for d == 3.
double ehvi(const ObjectiveVector& mean, const std::vector<double>& stddev,
            const FrontEstimate& front, const ReferencePoint& ref, std::uint64_t qmc_seed = 0,
            std::size_t qmc_samples = 4096);

}  // namespace moubo
