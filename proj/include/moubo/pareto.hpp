#pragma once

#include <utility>
#include <vector>

#include "moubo/types.hpp"

namespace moubo {

// Weak dominance: a <= b componentwise with strict inequality somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Indices of points dominated by no other point. Duplicates are all retained
// (equal vectors do not dominate each other). Output is in ascending order.
std::vector<std::size_t> non_dominated(const std::vector<ObjectiveVector>& points);

// Indices i such that no j with points[j] dominating points[i] shifted down by
// epsilon in every objective. epsilon = 0 reduces exactly to non_dominated.
std::vector<std::size_t> epsilon_non_dominated(const std::vector<ObjectiveVector>& points,
                                               double epsilon);

// Componentwise min (ideal) and max (nadir) over a non-empty set.
std::pair<ObjectiveVector, ObjectiveVector> ideal_nadir(const std::vector<ObjectiveVector>& points);

// Max over probe points of the Euclidean distance to the nearest design point.
// With a Lipschitz constant L this certifies an L*delta-accurate discretized front.
double maximin_distance(const CandidateSet& design, const CandidateSet& probe);

// Non-dominated filter packaged as a FrontEstimate.
FrontEstimate make_front(const std::vector<ObjectiveVector>& points, FrontProvenance provenance,
                         double beta = 0.0);

}  // namespace moubo
