#include "moubo/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "moubo/pareto.hpp"

namespace moubo {

AcquisitionKind acquisition_kind_from_string(const std::string& s) {
    if (s == "pehvi") return AcquisitionKind::pehvi;
    if (s == "wpehvi") return AcquisitionKind::wpehvi;
    if (s == "iehvi") return AcquisitionKind::iehvi;
    if (s == "random") return AcquisitionKind::random;
    throw ConfigError("unknown acquisition kind '" + s + "' (expected pehvi, wpehvi, iehvi or random)");
}

std::string to_string(AcquisitionKind kind) {
    switch (kind) {
        case AcquisitionKind::pehvi: return "pehvi";
        case AcquisitionKind::wpehvi: return "wpehvi";
        case AcquisitionKind::iehvi: return "iehvi";
        case AcquisitionKind::random: return "random";
    }
    return "?";
}

FrontEstimate beta_front(const GpSurrogate& model, const Point& u,
                         const CandidateSet& pareto_candidates, double beta) {
    if (!model.fitted()) throw std::logic_error("beta_front: unfitted model");
    if (pareto_candidates.points.empty()) throw std::invalid_argument("beta_front: no candidates");

    std::vector<Point> joints(pareto_candidates.points.size());
    for (std::size_t i = 0; i < joints.size(); ++i) {
        Point z = pareto_candidates.points[i];
        z.insert(z.end(), u.begin(), u.end());
        joints[i] = std::move(z);
    }

    std::vector<ObjectiveVector> values;
    if (beta == 0.0) {
        values = model.predict_mean(joints);
    } else {
        std::vector<ObjectiveVector> means, stddevs;
        model.predict(joints, means, stddevs);
        values = std::move(means);
        for (std::size_t i = 0; i < values.size(); ++i)
            for (std::size_t k = 0; k < values[i].size(); ++k) values[i][k] += beta * stddevs[i][k];
    }
    return make_front(values, FrontProvenance::gp_mean_beta, beta);
}

ReferencePoint reference_point(const FrontEstimate& front, const ReferencePolicy& policy) {
    if (policy.fixed) return ReferencePoint{*policy.fixed};
    if (front.empty()) throw std::invalid_argument("reference_point: empty front");
    auto [ideal, nadir] = ideal_nadir(front.points);
    ReferencePoint ref;
    ref.values.resize(nadir.size());
    for (std::size_t k = 0; k < nadir.size(); ++k) {
        const double range = nadir[k] - ideal[k];
        ref.values[k] = nadir[k] + (range > 0 ? policy.margin * range : policy.floor_offset);
    }
    return ref;
}

double pehvi(const GpSurrogate& model, const Point& x, const Point& u, const AcquisitionSpec& spec) {
    const FrontEstimate front = beta_front(model, u, spec.pareto_candidates, spec.beta);
    const ReferencePoint ref = reference_point(front, spec.ref_policy);
    Point z = x;
    z.insert(z.end(), u.begin(), u.end());
    ObjectiveVector mean, stddev;
    model.predict_one(z, mean, stddev);
    return ehvi(mean, stddev, front, ref, spec.qmc_seed);
}

double wpehvi(const GpSurrogate& model, const Point& x, const Point& u, const AcquisitionSpec& spec,
              const UDistribution& dist) {
    const double density = dist.density(u);
    if (density == 0.0) return 0.0;
    return pehvi(model, x, u, spec) * density;
}

ConditionalFrontCache::ConditionalFrontCache(const GpSurrogate& model, const AcquisitionSpec& spec,
                                             int threads)
    : model_(model), u_samples_(spec.u_samples.samples), qmc_seed_(spec.qmc_seed) {
    if (u_samples_.empty()) throw std::invalid_argument("front cache: empty u_samples");
    fronts_.resize(u_samples_.size());
    refs_.resize(u_samples_.size());
    parallel_for(u_samples_.size(), threads, [&](std::size_t i) {
        fronts_[i] = beta_front(model, u_samples_[i], spec.pareto_candidates, spec.beta);
        refs_[i] = reference_point(fronts_[i], spec.ref_policy);
    });
}

double ConditionalFrontCache::iehvi(const Point& x) const {
    std::vector<Point> joints(u_samples_.size());
    for (std::size_t i = 0; i < u_samples_.size(); ++i) {
        Point z = x;
        z.insert(z.end(), u_samples_[i].begin(), u_samples_[i].end());
        joints[i] = std::move(z);
    }
    std::vector<ObjectiveVector> means, stddevs;
    model_.predict(joints, means, stddevs);
    double sum = 0.0;
    for (std::size_t i = 0; i < u_samples_.size(); ++i)
        sum += ehvi(means[i], stddevs[i], fronts_[i], refs_[i], qmc_seed_);
    return sum / static_cast<double>(u_samples_.size());
}

double ConditionalFrontCache::mean_uncertainty(const Point& x) const {
    std::vector<Point> joints(u_samples_.size());
    for (std::size_t i = 0; i < u_samples_.size(); ++i) {
        Point z = x;
        z.insert(z.end(), u_samples_[i].begin(), u_samples_[i].end());
        joints[i] = std::move(z);
    }
    std::vector<ObjectiveVector> means, stddevs;
    model_.predict(joints, means, stddevs);
    double sum = 0.0;
    for (const auto& s : stddevs)
        for (double v : s) sum += v;
    return sum / static_cast<double>(u_samples_.size());
}

double iehvi(const GpSurrogate& model, const Point& x, const USampleSet& u_samples,
             const AcquisitionSpec& spec) {
    if (u_samples.samples.empty()) throw std::invalid_argument("iehvi: empty u_samples");
    AcquisitionSpec local = spec;
    local.u_samples = u_samples;
    ConditionalFrontCache cache(model, local);
    return cache.iehvi(x);
}

}  // namespace moubo
