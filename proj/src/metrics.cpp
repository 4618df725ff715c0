#include "moubo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "moubo/csv.hpp"
#include "moubo/pareto.hpp"

namespace moubo {

namespace {

double point_to_set(const ObjectiveVector& y, const std::vector<ObjectiveVector>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : set) {
        double s = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = y[k] - z[k];
            s += d * d;
        }
        best = std::min(best, s);
    }
    return std::sqrt(best);
}

double directed_average(const std::vector<ObjectiveVector>& from,
                        const std::vector<ObjectiveVector>& to, double p) {
    double sum = 0.0;
    for (const auto& y : from) sum += std::pow(point_to_set(y, to), p);
    return std::pow(sum / static_cast<double>(from.size()), 1.0 / p);
}

void check_fronts(const FrontEstimate& a, const FrontEstimate& b, double p) {
    if (a.empty() || b.empty()) throw std::invalid_argument("front metric: empty front");
    if (!(p > 0)) throw std::invalid_argument("front metric: p must be > 0");
    require_same_dim(a.dim(), b.dim(), "front metric");
}

}  // namespace

double gd_p(const FrontEstimate& approx, const FrontEstimate& reference, double p) {
    check_fronts(approx, reference, p);
    return directed_average(approx.points, reference.points, p);
}

double igd_p(const FrontEstimate& approx, const FrontEstimate& reference, double p) {
    check_fronts(approx, reference, p);
    return directed_average(reference.points, approx.points, p);
}

double delta_p(const FrontEstimate& approx, const FrontEstimate& reference, double p) {
    return std::max(gd_p(approx, reference, p), igd_p(approx, reference, p));
}

double coverage_l2(const CoverageField& truth, const CoverageField& estimate) {
    if (truth.probabilities.size() != estimate.probabilities.size())
        throw std::invalid_argument("coverage_l2: field size mismatch");
    if (truth.candidates.points != estimate.candidates.points)
        throw std::invalid_argument("coverage_l2: candidate sets differ (must be identical and in "
                                    "the same order)");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.probabilities.size(); ++i) {
        const double d = truth.probabilities[i] - estimate.probabilities[i];
        sum += d * d;
    }
    return sum / static_cast<double>(truth.probabilities.size());
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

MetricReport delta_distribution(const GpSurrogate& model, const ProblemDefinition& problem,
                                const USampleSet& u_samples, const CandidateSet& x_test,
                                int threads) {
    if (!model.fitted()) throw MissingArtifactError("delta_distribution: no fitted model");
    if (u_samples.samples.empty()) throw std::invalid_argument("delta_distribution: no u samples");
    if (x_test.points.empty()) throw std::invalid_argument("delta_distribution: empty x_test");

    const std::size_t nu = u_samples.size();
    MetricReport report;
    report.per_u_delta.resize(nu);
    report.n_u = nu;

    parallel_for(nu, threads, [&](std::size_t i) {
        const Point& u = u_samples.samples[i];

        std::vector<ObjectiveVector> truth(x_test.points.size());
        for (std::size_t c = 0; c < x_test.points.size(); ++c)
            truth[c] = problem.evaluate(x_test.points[c], u);
        FrontEstimate true_front = make_front(truth, FrontProvenance::true_evaluations);

        std::vector<Point> joints(x_test.points.size());
        for (std::size_t c = 0; c < x_test.points.size(); ++c) {
            Point z = x_test.points[c];
            z.insert(z.end(), u.begin(), u.end());
            joints[c] = std::move(z);
        }
        FrontEstimate plugin_front =
            make_front(model.predict_mean(joints), FrontProvenance::gp_mean_beta);

        report.per_u_delta[i] = delta_p(plugin_front, true_front, 2.0);
    });

    double sum = 0.0;
    for (double v : report.per_u_delta) sum += v;
    report.delta_mean = sum / static_cast<double>(nu);
    report.delta_median = quantile(report.per_u_delta, 0.5);
    report.delta_q25 = quantile(report.per_u_delta, 0.25);
    report.delta_q75 = quantile(report.per_u_delta, 0.75);
    return report;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["n_u"] = n_u;
    j["delta"] = {{"mean", delta_mean},
                  {"median", delta_median},
                  {"q25", delta_q25},
                  {"q75", delta_q75}};
    if (coverage_l2_value >= 0.0) j["coverage_l2"] = coverage_l2_value;
    if (!run_id.empty()) j["run_id"] = run_id;
    if (!x_test_spec.empty()) j["x_test"] = x_test_spec;
    return j;
}

void write_deltas_csv(const MetricReport& report, std::ostream& os) {
    os << "u_index,delta\n";
    for (std::size_t i = 0; i < report.per_u_delta.size(); ++i)
        os << i << "," << format_double(report.per_u_delta[i]) << "\n";
}

}  // namespace moubo
