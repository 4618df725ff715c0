#pragma once

#include <cmath>
#include <cstdint>

namespace moubo {

// SplitMix64 step; also used as the mixing primitive for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// k-th child stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (k + 1));
    return splitmix64(s);
}

// Map to the open interval (0, 1); never returns 0 or 1.
inline double to_unit_open(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Counter-based substream: sample i / slot j of a seeded stream, independent of
// call order, so Monte Carlo estimators are reproducible under any schedule.
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0) {
    std::uint64_t s = seed;
    s ^= splitmix64(i += 0x632BE59BD9B4E019ull);
    s ^= splitmix64(j += 0xD1B54A32D192ED03ull);
    return splitmix64(s);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0) {
    return to_unit_open(counter_bits(seed, i, j));
}

double normal_inverse_cdf(double p);

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

inline double normal_pdf(double z) { return 0.39894228040143267794 * std::exp(-0.5 * z * z); }

inline double counter_normal(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0) {
    return normal_inverse_cdf(counter_uniform(seed, i, j));
}

// Small sequential generator for code that wants a stateful stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }
    double uniform() { return to_unit_open(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return normal_inverse_cdf(uniform()); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

private:
    std::uint64_t state_;
};

}  // namespace moubo
