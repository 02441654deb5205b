#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace testsupport {

// Seeded generator shared by the property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    double signed_magnitude(double lo, double hi) { return coin() ? uniform(lo, hi) : -uniform(lo, hi); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
}

}  // namespace testsupport
