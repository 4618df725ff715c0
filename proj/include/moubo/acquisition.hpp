#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "moubo/gp.hpp"
#include "moubo/hypervolume.hpp"
#include "moubo/types.hpp"
#include "moubo/uncertainty.hpp"

namespace moubo {

// Rule producing the hypervolume reference point from the current front.
struct ReferencePolicy {
    std::optional<ObjectiveVector> fixed;  // user-supplied ref passes through unchanged
    double margin = 0.1;                   // fraction of (nadir - ideal) added beyond the nadir
    double floor_offset = 1e-6;            // used where nadir == ideal in a coordinate
};

enum class AcquisitionKind { pehvi, wpehvi, iehvi, random };

AcquisitionKind acquisition_kind_from_string(const std::string& s);
std::string to_string(AcquisitionKind kind);

struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::iehvi;
    double beta = 10.0;
    CandidateSet pareto_candidates;  // conditional-front estimation support
    USampleSet u_samples;            // iehvi only
    ReferencePolicy ref_policy;
    std::uint64_t qmc_seed = 0;      // d == 3 EHVI fallback

    void validate() const {
        if (kind != AcquisitionKind::random && pareto_candidates.points.empty())
            throw ConfigError("acquisition: pareto_candidates must be non-empty");
        if (kind == AcquisitionKind::iehvi && u_samples.samples.empty())
            throw ConfigError("iehvi: u_samples must be non-empty");
    }
};

// Non-dominated points of { m(x,u) + beta * sigma(x,u) : x in pareto_candidates }.
// beta > 0 is the pessimistic (conservative) front, beta < 0 the optimistic one.
FrontEstimate beta_front(const GpSurrogate& model, const Point& u,
                         const CandidateSet& pareto_candidates, double beta);

ReferencePoint reference_point(const FrontEstimate& front, const ReferencePolicy& policy);

// EHVI of the prediction at (x, u) against the beta-front at that u.
double pehvi(const GpSurrogate& model, const Point& x, const Point& u, const AcquisitionSpec& spec);

// pehvi weighted by the density of U at u; 0 outside the support.
double wpehvi(const GpSurrogate& model, const Point& x, const Point& u, const AcquisitionSpec& spec,
              const UDistribution& dist);

// Per-u conditional fronts and reference points, computed once per model fit
// and shared by every x probed during one acquisition-maximization pass.
class ConditionalFrontCache {
public:
    ConditionalFrontCache(const GpSurrogate& model, const AcquisitionSpec& spec, int threads = 1);

    double iehvi(const Point& x) const;

    // Average over the cached u of the summed predictive stddev at (x, u_i);
    // the fallback objective when the acquisition is flat zero.
    double mean_uncertainty(const Point& x) const;

    const std::vector<FrontEstimate>& fronts() const { return fronts_; }
    const std::vector<ReferencePoint>& refs() const { return refs_; }

private:
    const GpSurrogate& model_;
    std::vector<Point> u_samples_;
    std::vector<FrontEstimate> fronts_;
    std::vector<ReferencePoint> refs_;
    std::uint64_t qmc_seed_ = 0;
};

// Monte Carlo average of pehvi over the u sample set. Prefer the cache for
// repeated probes; this convenience rebuilds the fronts each call.
double iehvi(const GpSurrogate& model, const Point& x, const USampleSet& u_samples,
             const AcquisitionSpec& spec);

}  // namespace moubo
