#include "moubo/uncertainty.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "moubo/csv.hpp"
#include "moubo/pareto.hpp"
#include "moubo/rng.hpp"

namespace moubo {

UDistribution UDistribution::uniform(Box support) {
    if (support.empty()) throw ConfigError("uniform U: empty support box");
    UDistribution d;
    d.kind = Kind::uniform_box;
    d.box = std::move(support);
    return d;
}

UDistribution UDistribution::gaussian(Point center, std::vector<double> variances, Box truncation) {
    UDistribution d;
    d.kind = Kind::diagonal_gaussian;
    d.box = std::move(truncation);
    d.center = std::move(center);
    d.variances = std::move(variances);
    require_same_dim(d.center.size(), d.box.dim(), "gaussian U center");
    require_same_dim(d.variances.size(), d.box.dim(), "gaussian U variances");
    for (double v : d.variances)
        if (!(v > 0.0)) throw ConfigError("gaussian U: variances must be > 0");
    if (!d.box.contains(d.center)) throw ConfigError("gaussian U: truncation box must contain center");
    return d;
}

double UDistribution::density(const Point& u) const {
    require_same_dim(u.size(), dim(), "u density");
    if (!box.contains(u)) return 0.0;
    if (kind == Kind::uniform_box) {
        double vol = 1.0;
        for (std::size_t k = 0; k < dim(); ++k) vol *= box.hi[k] - box.lo[k];
        return 1.0 / vol;
    }
    double p = 1.0;
    for (std::size_t k = 0; k < dim(); ++k) {
        const double s = std::sqrt(variances[k]);
        const double mass =
            normal_cdf((box.hi[k] - center[k]) / s) - normal_cdf((box.lo[k] - center[k]) / s);
        p *= normal_pdf((u[k] - center[k]) / s) / (s * mass);
    }
    return p;
}

USampleSet sample_u(const UDistribution& dist, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_u: n must be >= 1");
    USampleSet set;
    set.seed = seed;
    set.samples.reserve(n);
    const std::size_t m = dist.dim();

    if (dist.kind == UDistribution::Kind::uniform_box) {
        for (std::size_t i = 0; i < n; ++i) {
            Point u(m);
            for (std::size_t k = 0; k < m; ++k)
                u[k] = dist.box.lo[k] + (dist.box.hi[k] - dist.box.lo[k]) * counter_uniform(seed, i, k);
            set.samples.push_back(std::move(u));
        }
        return set;
    }

    // Rejection against the truncation box; the attempt counter keeps the
    // stream a pure function of (seed, sample index).
    constexpr std::uint64_t kMaxAttempts = 100000;  // acceptance ~1e-3 floor
    for (std::size_t i = 0; i < n; ++i) {
        Point u(m);
        bool accepted = false;
        for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
            for (std::size_t k = 0; k < m; ++k)
                u[k] = dist.center[k] +
                       std::sqrt(dist.variances[k]) * counter_normal(seed, i, attempt * m + k);
            if (dist.box.contains(u)) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw std::runtime_error("sample_u: rejection acceptance rate below 1e-3; "
                                     "truncation box too small for the Gaussian");
        set.samples.push_back(u);
    }
    return set;
}

std::pair<FrontEstimate, std::vector<std::size_t>> conditional_front_and_set(
    const Evaluator& evaluator, const CandidateSet& candidates, const Point& u) {
    if (candidates.points.empty()) throw std::invalid_argument("conditional front: no candidates");
    std::vector<ObjectiveVector> values(candidates.points.size());
    for (std::size_t i = 0; i < candidates.points.size(); ++i) {
        values[i] = evaluator(candidates.points[i], u);
        for (double v : values[i]) {
            if (!std::isfinite(v))
                throw EvaluatorError("evaluator returned a non-finite objective at candidate " +
                                     std::to_string(i));
        }
    }
    std::vector<std::size_t> set_indices = non_dominated(values);
    FrontEstimate front;
    front.provenance = FrontProvenance::true_evaluations;
    front.points.reserve(set_indices.size());
    for (std::size_t i : set_indices) front.points.push_back(values[i]);
    return {std::move(front), std::move(set_indices)};
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    const int workers = std::max(1, threads);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), count));
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

CoverageField coverage_common(const std::function<std::vector<ObjectiveVector>(const Point& u)>& batch_eval,
                              const CandidateSet& candidates, const USampleSet& u_samples,
                              CoverageEstimator tag, int threads) {
    if (candidates.points.empty()) throw std::invalid_argument("coverage: no candidates");
    if (u_samples.samples.empty()) throw std::invalid_argument("coverage: no u samples");

    const std::size_t nx = candidates.points.size();
    const std::size_t nu = u_samples.samples.size();
    std::vector<std::vector<std::size_t>> members(nu);

    parallel_for(nu, threads, [&](std::size_t i) {
        std::vector<ObjectiveVector> values = batch_eval(u_samples.samples[i]);
        for (std::size_t c = 0; c < values.size(); ++c) {
            for (double v : values[c]) {
                if (!std::isfinite(v))
                    throw EvaluatorError("coverage: non-finite objective at candidate " +
                                         std::to_string(c));
            }
        }
        members[i] = non_dominated(values);
    });

    std::vector<double> counts(nx, 0.0);
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t c : members[i]) counts[c] += 1.0;

    CoverageField field;
    field.candidates = candidates;
    field.n_u = nu;
    field.estimator = tag;
    field.probabilities.resize(nx);
    for (std::size_t c = 0; c < nx; ++c) field.probabilities[c] = counts[c] / static_cast<double>(nu);
    return field;
}

}  // namespace

CoverageField coverage_probability(const Evaluator& evaluator, const CandidateSet& candidates,
                                   const USampleSet& u_samples, int threads) {
    auto batch = [&](const Point& u) {
        std::vector<ObjectiveVector> values(candidates.points.size());
        for (std::size_t c = 0; c < candidates.points.size(); ++c)
            values[c] = evaluator(candidates.points[c], u);
        return values;
    };
    return coverage_common(batch, candidates, u_samples, CoverageEstimator::true_function, threads);
}

CoverageField coverage_probability_plugin(const GpSurrogate& model, const CandidateSet& candidates,
                                          const USampleSet& u_samples, int threads) {
    if (!model.fitted()) throw std::logic_error("coverage: unfitted model");
    auto batch = [&](const Point& u) {
        std::vector<Point> joints(candidates.points.size());
        for (std::size_t c = 0; c < candidates.points.size(); ++c) {
            Point z = candidates.points[c];
            z.insert(z.end(), u.begin(), u.end());
            joints[c] = std::move(z);
        }
        return model.predict_mean(joints);
    };
    return coverage_common(batch, candidates, u_samples, CoverageEstimator::gp_plugin, threads);
}

void write_coverage_csv(const CoverageField& field, std::ostream& os) {
    const std::size_t nx = field.candidates.bounds.dim();
    for (std::size_t k = 0; k < nx; ++k) os << "x" << (k + 1) << ",";
    os << "probability\n";
    for (std::size_t c = 0; c < field.candidates.points.size(); ++c) {
        for (std::size_t k = 0; k < nx; ++k)
            os << format_double(field.candidates.points[c][k]) << ",";
        os << format_double(field.probabilities[c]) << "\n";
    }
}

}  // namespace moubo
