#include "moubo/hypervolume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "moubo/pareto.hpp"
#include "moubo/rng.hpp"
#include "moubo/sobol.hpp"

namespace moubo {

namespace {

// Points strictly inside the reference box; anything else has zero measure
// after clipping.
std::vector<ObjectiveVector> contributing(const std::vector<ObjectiveVector>& pts,
                                          const ObjectiveVector& ref) {
    std::vector<ObjectiveVector> out;
    for (const auto& p : pts) {
        bool inside = p.size() == ref.size();
        for (std::size_t k = 0; inside && k < p.size(); ++k) inside = p[k] < ref[k];
        if (inside) out.push_back(p);
    }
    return out;
}

// Non-dominated, sorted ascending by the first objective (second strictly
// descending as a consequence).
std::vector<ObjectiveVector> staircase_2d(std::vector<ObjectiveVector> pts) {
    std::vector<ObjectiveVector> nd;
    for (std::size_t i : non_dominated(pts)) nd.push_back(pts[i]);
    std::sort(nd.begin(), nd.end());
    // exact duplicates collapse to one step
    nd.erase(std::unique(nd.begin(), nd.end()), nd.end());
    return nd;
}

double hv_2d(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& ref) {
    const auto nd = staircase_2d(contributing(pts, ref));
    double area = 0.0;
    for (std::size_t i = 0; i < nd.size(); ++i) {
        const double next_f1 = (i + 1 < nd.size()) ? nd[i + 1][0] : ref[0];
        area += (next_f1 - nd[i][0]) * (ref[1] - nd[i][1]);
    }
    return area;
}

double hv_3d(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& ref) {
    auto inside = contributing(pts, ref);
    if (inside.empty()) return 0.0;
    // Sweep slabs along the third objective; each slab's cross-section is the
    // 2D dominated area of the points at or below that level.
    std::sort(inside.begin(), inside.end(),
              [](const ObjectiveVector& a, const ObjectiveVector& b) { return a[2] < b[2]; });
    const ObjectiveVector ref2{ref[0], ref[1]};
    double volume = 0.0;
    std::vector<ObjectiveVector> active;
    std::size_t i = 0;
    while (i < inside.size()) {
        const double z = inside[i][2];
        while (i < inside.size() && inside[i][2] == z) {
            active.push_back({inside[i][0], inside[i][1]});
            ++i;
        }
        const double z_next = (i < inside.size()) ? inside[i][2] : ref[2];
        volume += hv_2d(active, ref2) * (z_next - z);
    }
    return volume;
}

double hv_dispatch(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& ref) {
    require_finite(ref, "reference point");
    if (ref.size() == 2) return hv_2d(pts, ref);
    if (ref.size() == 3) return hv_3d(pts, ref);
    throw std::invalid_argument("hv: exact hypervolume supports d in {2,3}; use ehvi_mc/ehvi_qmc "
                                "style Monte Carlo estimates for higher dimensions");
}

// One-sided integral of the Gaussian CDF: int_{-inf}^t Phi((s-mu)/sigma) ds.
// Collapses to max(t - mu, 0) as sigma -> 0.
double psi(double t, double mu, double sigma) {
    if (sigma <= 0.0) return std::max(t - mu, 0.0);
    const double z = (t - mu) / sigma;
    return sigma * (z * normal_cdf(z) + normal_pdf(z));
}

}  // namespace

double hv(const FrontEstimate& front, const ReferencePoint& ref) {
    if (front.empty()) return 0.0;
    for (const auto& p : front.points) require_same_dim(p.size(), ref.values.size(), "hv");
    return hv_dispatch(front.points, ref.values);
}

double hvi(const ObjectiveVector& y, const FrontEstimate& front, const ReferencePoint& ref) {
    require_same_dim(y.size(), ref.values.size(), "hvi");
    std::vector<ObjectiveVector> extended = front.points;
    extended.push_back(y);
    const double with = hv_dispatch(extended, ref.values);
    const double without = hv_dispatch(front.points, ref.values);
    return std::max(0.0, with - without);
}

double ehvi_2d(const ObjectiveVector& mean, const std::vector<double>& stddev,
               const FrontEstimate& front, const ReferencePoint& ref) {
    if (ref.values.size() != 2) throw std::invalid_argument("ehvi_2d: d must be 2");
    require_same_dim(mean.size(), 2, "ehvi_2d mean");
    require_same_dim(stddev.size(), 2, "ehvi_2d stddev");

    const auto nd = staircase_2d(contributing(front.points, ref.values));
    const double r1 = ref.values[0];
    const double r2 = ref.values[1];

    // The non-dominated part of the reference box splits into vertical strips
    // (y1_i, y1_{i+1}) x (-inf, b_i); the Gaussian CDF product integrates over
    // each strip as a product of one-dimensional psi terms.
    double total = 0.0;
    const std::size_t m = nd.size();
    double psi_lo = 0.0;  // psi at the strip's left edge; 0 at -inf
    for (std::size_t i = 0; i <= m; ++i) {
        const double hi_edge = (i < m) ? nd[i][0] : r1;
        const double b = (i == 0) ? r2 : std::min(nd[i - 1][1], r2);
        const double psi_hi = psi(hi_edge, mean[0], stddev[0]);
        total += (psi_hi - psi_lo) * psi(b, mean[1], stddev[1]);
        psi_lo = psi_hi;
    }
    return std::max(0.0, total);
}

McEstimate ehvi_mc(const ObjectiveVector& mean, const std::vector<double>& stddev,
                   const FrontEstimate& front, const ReferencePoint& ref, std::size_t n_samples,
                   std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("ehvi_mc: n_samples must be >= 2");
    const std::size_t d = ref.values.size();
    require_same_dim(mean.size(), d, "ehvi_mc mean");
    require_same_dim(stddev.size(), d, "ehvi_mc stddev");

    double sum = 0.0;
    double sum_sq = 0.0;
    ObjectiveVector y(d);
    for (std::size_t i = 0; i < n_samples; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double s = std::max(stddev[k], 0.0);
            y[k] = mean[k] + s * counter_normal(seed, i, k);
        }
        const double v = hvi(y, front, ref);
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(n_samples);
    McEstimate est;
    est.estimate = sum / n;
    const double var = std::max(0.0, (sum_sq - n * est.estimate * est.estimate) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
    return est;
}

double ehvi_qmc(const ObjectiveVector& mean, const std::vector<double>& stddev,
                const FrontEstimate& front, const ReferencePoint& ref, std::size_t n_samples,
                std::uint64_t seed) {
    const std::size_t d = ref.values.size();
    require_same_dim(mean.size(), d, "ehvi_qmc mean");
    require_same_dim(stddev.size(), d, "ehvi_qmc stddev");
    SobolSequence seq(d, seed == 0 ? 0x51D5C0DEull : seed);
    double sum = 0.0;
    ObjectiveVector y(d);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Point p = seq.point(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double s = std::max(stddev[k], 0.0);
            const double t = std::min(std::max(p[k], 0x1.0p-33), 1.0 - 0x1.0p-33);
            y[k] = mean[k] + s * normal_inverse_cdf(t);
        }
        sum += hvi(y, front, ref);
    }
    return sum / static_cast<double>(n_samples);
}

double ehvi(const ObjectiveVector& mean, const std::vector<double>& stddev,
            const FrontEstimate& front, const ReferencePoint& ref, std::uint64_t qmc_seed,
            std::size_t qmc_samples) {
    if (ref.values.size() == 2) return ehvi_2d(mean, stddev, front, ref);
    if (ref.values.size() == 3) return ehvi_qmc(mean, stddev, front, ref, qmc_samples, qmc_seed);
    throw std::invalid_argument("ehvi: supported for d in {2,3}");
}

}  // namespace moubo
