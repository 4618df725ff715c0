#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace moubo {

// Objective values follow the minimization convention throughout.
using ObjectiveVector = std::vector<double>;
using Point = std::vector<double>;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EvaluatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Axis-aligned box [lo_i, hi_i] per dimension.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size()) throw ConfigError("box: lo/hi dimension mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!(lo[i] <= hi[i])) throw ConfigError("box: lo > hi in dimension " + std::to_string(i));
        }
    }

    std::size_t dim() const { return lo.size(); }
    bool empty() const { return lo.empty(); }

    bool contains(const Point& p, double tol = 0.0) const {
        if (p.size() != dim()) return false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (std::isnan(p[i])) return false;
            const double span = hi[i] - lo[i];
            const double slack = tol * (span > 0 ? span : 1.0);
            if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
        }
        return true;
    }

    Point clamp(const Point& p) const {
        Point q = p;
        for (std::size_t i = 0; i < q.size() && i < dim(); ++i) {
            if (q[i] < lo[i]) q[i] = lo[i];
            if (q[i] > hi[i]) q[i] = hi[i];
        }
        return q;
    }

    // Concatenation of dimensions, e.g. the joint X x U box.
    static Box join(const Box& a, const Box& b) {
        Box j;
        j.lo = a.lo;
        j.hi = a.hi;
        j.lo.insert(j.lo.end(), b.lo.begin(), b.lo.end());
        j.hi.insert(j.hi.end(), b.hi.begin(), b.hi.end());
        return j;
    }
};

// A pair (x, u): the surrogate's input and the simulator's argument.
struct JointPoint {
    Point x;
    Point u;

    Point flat() const {
        Point z = x;
        z.insert(z.end(), u.begin(), u.end());
        return z;
    }
};

enum class FrontProvenance { true_evaluations, gp_mean_beta, external };

// Finite, mutually non-dominated approximation of a (conditional) Pareto front.
struct FrontEstimate {
    std::vector<ObjectiveVector> points;
    FrontProvenance provenance = FrontProvenance::external;
    double beta = 0.0;  // only meaningful for gp_mean_beta provenance

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
};

struct CandidateSet {
    std::vector<Point> points;
    Box bounds;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return bounds.dim(); }

    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!bounds.contains(points[i], 1e-12))
                throw ConfigError("candidate " + std::to_string(i) + " outside bounds or NaN");
        }
    }
};

inline void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
    }
}

}  // namespace moubo
