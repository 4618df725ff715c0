#include "moubo/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace moubo {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    require_same_dim(a.size(), b.size(), "dominates");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

namespace {

// O(n log n) sweep for d == 2. Same contract as the pairwise scan: weak
// dominance, exact duplicates all retained.
std::vector<std::size_t> non_dominated_2d(const std::vector<ObjectiveVector>& pts) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a][0] != pts[b][0]) return pts[a][0] < pts[b][0];
        return pts[a][1] < pts[b][1];
    });

    std::vector<std::size_t> keep;
    double best_f2 = std::numeric_limits<double>::infinity();  // min f2 among strictly smaller f1
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && pts[order[j]][0] == pts[order[i]][0]) ++j;
        const double group_min = pts[order[i]][1];
        for (std::size_t k = i; k < j; ++k) {
            const double f2 = pts[order[k]][1];
            if (f2 < best_f2 && f2 == group_min) keep.push_back(order[k]);
        }
        best_f2 = std::min(best_f2, group_min);
        i = j;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

std::vector<std::size_t> non_dominated_scan(const std::vector<ObjectiveVector>& pts) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j != i && dominates(pts[j], pts[i])) {
                dominated = true;
                break;
            }
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

}  // namespace

std::vector<std::size_t> non_dominated(const std::vector<ObjectiveVector>& points) {
    if (points.empty()) return {};
    const std::size_t d = points.front().size();
    for (const auto& p : points) require_same_dim(p.size(), d, "non_dominated");
    if (d == 2) return non_dominated_2d(points);
    return non_dominated_scan(points);
}

std::vector<std::size_t> epsilon_non_dominated(const std::vector<ObjectiveVector>& points,
                                               double epsilon) {
    if (epsilon < 0 || std::isnan(epsilon)) throw std::invalid_argument("epsilon must be >= 0");
    if (points.empty()) return {};
    if (epsilon == 0) return non_dominated(points);
    const std::size_t d = points.front().size();
    for (const auto& p : points) require_same_dim(p.size(), d, "epsilon_non_dominated");

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < points.size(); ++i) {
        ObjectiveVector shifted = points[i];
        for (double& v : shifted) v -= epsilon;
        bool excluded = false;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (dominates(points[j], shifted)) {
                excluded = true;
                break;
            }
        }
        if (!excluded) keep.push_back(i);
    }
    return keep;
}

std::pair<ObjectiveVector, ObjectiveVector> ideal_nadir(const std::vector<ObjectiveVector>& points) {
    if (points.empty()) throw std::invalid_argument("ideal_nadir: empty input");
    ObjectiveVector ideal = points.front();
    ObjectiveVector nadir = points.front();
    for (const auto& p : points) {
        require_same_dim(p.size(), ideal.size(), "ideal_nadir");
        for (std::size_t k = 0; k < p.size(); ++k) {
            ideal[k] = std::min(ideal[k], p[k]);
            nadir[k] = std::max(nadir[k], p[k]);
        }
    }
    return {ideal, nadir};
}

double maximin_distance(const CandidateSet& design, const CandidateSet& probe) {
    if (design.points.empty() || probe.points.empty())
        throw std::invalid_argument("maximin_distance: empty set");
    const std::size_t d = design.points.front().size();
    double worst = 0.0;
    for (const auto& q : probe.points) {
        require_same_dim(q.size(), d, "maximin_distance");
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : design.points) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = p[k] - q[k];
                s += diff * diff;
            }
            best = std::min(best, s);
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

FrontEstimate make_front(const std::vector<ObjectiveVector>& points, FrontProvenance provenance,
                         double beta) {
    FrontEstimate front;
    front.provenance = provenance;
    front.beta = beta;
    for (std::size_t i : non_dominated(points)) front.points.push_back(points[i]);
    return front;
}

}  // namespace moubo
