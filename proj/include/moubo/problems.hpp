#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "moubo/types.hpp"
#include "moubo/uncertainty.hpp"

namespace moubo {

struct ProblemDefinition {
    std::string name;
    Box x_box;
    Box u_box;
    std::size_t n_objectives = 2;
    Evaluator evaluate;  // strict box enforcement
    UDistribution u_dist;
    // Closed-form E_U[f(x, U)] when available.
    std::function<ObjectiveVector(const Point& x)> mean_objective;

    Box joint_box() const { return Box::join(x_box, u_box); }
};

// Two controls in [0,1]x[1,2], two uncertain inputs in [2,3]x[3,4].
ObjectiveVector f2x2(const Point& x, const Point& u);

// Expectation of f2x2 over uniform U.
ObjectiveVector f2x2_mean(const Point& x);

// Five controls and five uncertain inputs, all in [0,1].
ObjectiveVector f5x5(const Point& x, const Point& u);

// Built-in problems: "4d", "10d" (uniform U) and "10d-bis" (truncated Gaussian U).
const std::vector<ProblemDefinition>& problem_catalog();

const ProblemDefinition& find_problem(const std::string& name);

// Wraps an external executable speaking one JSON object per line:
// in  {"x":[...],"u":[...]}
// out {"f":[...]}
// The process is spawned once and reused for every evaluation.
ProblemDefinition external_problem(const std::string& command, Box x_box, Box u_box,
                                   std::size_t n_objectives, UDistribution u_dist);

}  // namespace moubo
