#pragma once

#include <cstdint>
#include <vector>

#include "moubo/types.hpp"

namespace moubo {

// Sobol low-discrepancy sequence with optional digital-shift scrambling.
// Supports up to 21 dimensions; points are random-access by index.
class SobolSequence {
public:
    static constexpr std::size_t max_dimension = 21;

    // scramble_seed == 0 gives the plain (unshifted) sequence, whose first
    // point is the origin.
    explicit SobolSequence(std::size_t dim, std::uint64_t scramble_seed = 0);

    std::size_t dim() const { return dim_; }

    // index-th point of the sequence, in [0, 1)^dim.
    Point point(std::uint64_t index) const;

    std::vector<Point> generate(std::uint64_t first_index, std::size_t count) const;

    // count points mapped into box, starting at first_index.
    std::vector<Point> generate_in_box(const Box& box, std::uint64_t first_index,
                                       std::size_t count) const;

private:
    std::size_t dim_;
    std::vector<std::vector<std::uint32_t>> dirs_;  // [dim][bit] direction numbers
    std::vector<std::uint32_t> shift_;              // digital shift per dimension
};

// Low-discrepancy candidate set in a box. Skips the origin point when the
// sequence is unscrambled.
CandidateSet sobol_candidates(const Box& box, std::size_t count, std::uint64_t scramble_seed);

// Axis-aligned regular grid with cell-centered points, points_per_dim^dim total.
CandidateSet grid_candidates(const Box& box, std::size_t points_per_dim);

}  // namespace moubo
