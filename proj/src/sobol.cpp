#include "moubo/sobol.hpp"

#include <array>

#include "moubo/rng.hpp"

namespace moubo {

namespace {

// Joe & Kuo primitive polynomials and initial direction numbers for
// dimensions 2..21 (dimension 1 is the van der Corput sequence in base 2).
struct JoeKuoRow {
    std::uint32_t s;                    // polynomial degree
    std::uint32_t a;                    // encoded polynomial coefficients
    std::array<std::uint32_t, 7> m;     // initial m_1..m_s (odd)
};

constexpr std::array<JoeKuoRow, 20> kJoeKuo = {{
    {1, 0, {1, 0, 0, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0, 0, 0}},
    {4, 4, {1, 3, 5, 13, 0, 0, 0}},
    {5, 2, {1, 1, 5, 5, 17, 0, 0}},
    {5, 4, {1, 1, 5, 5, 5, 0, 0}},
    {5, 7, {1, 1, 7, 11, 19, 0, 0}},
    {5, 11, {1, 1, 5, 1, 1, 0, 0}},
    {5, 13, {1, 1, 1, 3, 11, 0, 0}},
    {5, 14, {1, 3, 5, 5, 31, 0, 0}},
    {6, 1, {1, 3, 3, 9, 7, 49, 0}},
    {6, 13, {1, 1, 1, 15, 21, 21, 0}},
    {6, 16, {1, 3, 1, 13, 27, 49, 0}},
    {6, 19, {1, 1, 1, 15, 7, 5, 0}},
    {6, 22, {1, 3, 1, 15, 13, 25, 0}},
    {6, 25, {1, 1, 5, 5, 19, 61, 0}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

constexpr int kBits = 32;

}  // namespace

SobolSequence::SobolSequence(std::size_t dim, std::uint64_t scramble_seed) : dim_(dim) {
    if (dim == 0) throw ConfigError("sobol: dimension must be >= 1");
    if (dim > max_dimension)
        throw ConfigError("sobol: dimension " + std::to_string(dim) + " exceeds supported maximum " +
                          std::to_string(max_dimension));

    dirs_.assign(dim, std::vector<std::uint32_t>(kBits, 0));

    // First dimension: v_b = 2^(31-b).
    for (int b = 0; b < kBits; ++b) dirs_[0][b] = 1u << (31 - b);

    for (std::size_t d = 1; d < dim; ++d) {
        const JoeKuoRow& row = kJoeKuo[d - 1];
        const std::uint32_t s = row.s;
        auto& v = dirs_[d];
        for (std::uint32_t j = 0; j < s; ++j) v[j] = row.m[j] << (31 - j);
        for (std::uint32_t j = s; j < kBits; ++j) {
            v[j] = v[j - s] ^ (v[j - s] >> s);
            for (std::uint32_t k = 1; k < s; ++k) {
                if ((row.a >> (s - 1 - k)) & 1u) v[j] ^= v[j - k];
            }
        }
    }

    shift_.assign(dim, 0);
    if (scramble_seed != 0) {
        std::uint64_t state = scramble_seed;
        for (std::size_t d = 0; d < dim; ++d)
            shift_[d] = static_cast<std::uint32_t>(splitmix64(state) >> 32);
    }
}

Point SobolSequence::point(std::uint64_t index) const {
    // Gray-code order: coordinate = XOR of direction numbers over set bits.
    const std::uint64_t gray = index ^ (index >> 1);
    Point p(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
        std::uint32_t acc = shift_[d];
        std::uint64_t g = gray;
        int b = 0;
        while (g) {
            if (g & 1ull) acc ^= dirs_[d][b];
            g >>= 1;
            ++b;
        }
        p[d] = static_cast<double>(acc) * 0x1.0p-32;
    }
    return p;
}

std::vector<Point> SobolSequence::generate(std::uint64_t first_index, std::size_t count) const {
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(point(first_index + i));
    return out;
}

std::vector<Point> SobolSequence::generate_in_box(const Box& box, std::uint64_t first_index,
                                                  std::size_t count) const {
    if (box.dim() != dim_) throw ConfigError("sobol: box dimension mismatch");
    std::vector<Point> out = generate(first_index, count);
    for (auto& p : out) {
        for (std::size_t d = 0; d < dim_; ++d) p[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * p[d];
    }
    return out;
}

CandidateSet sobol_candidates(const Box& box, std::size_t count, std::uint64_t scramble_seed) {
    SobolSequence seq(box.dim(), scramble_seed);
    CandidateSet cs;
    cs.bounds = box;
    cs.points = seq.generate_in_box(box, scramble_seed == 0 ? 1 : 0, count);
    return cs;
}

CandidateSet grid_candidates(const Box& box, std::size_t points_per_dim) {
    if (points_per_dim == 0) throw ConfigError("grid: points_per_dim must be >= 1");
    const std::size_t nd = box.dim();
    std::size_t total = 1;
    for (std::size_t d = 0; d < nd; ++d) {
        if (total > 100000000 / points_per_dim) throw ConfigError("grid: too many candidates");
        total *= points_per_dim;
    }
    CandidateSet cs;
    cs.bounds = box;
    cs.points.reserve(total);
    std::vector<std::size_t> idx(nd, 0);
    for (std::size_t i = 0; i < total; ++i) {
        Point p(nd);
        for (std::size_t d = 0; d < nd; ++d) {
            const double t = (static_cast<double>(idx[d]) + 0.5) / static_cast<double>(points_per_dim);
            p[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * t;
        }
        cs.points.push_back(std::move(p));
        for (std::size_t d = nd; d-- > 0;) {
            if (++idx[d] < points_per_dim) break;
            idx[d] = 0;
        }
    }
    return cs;
}

}  // namespace moubo
