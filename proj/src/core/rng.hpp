#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fuzzyboost {

// Portable seeded generator. std::mt19937_64 output is fixed by the standard;
// the distributions below are implemented here because the std:: ones are
// not bit-reproducible across standard library implementations.
//
// Streams: a named stream is seeded with splitmix64(seed ^ fnv1a(name)), so
// each class gets an independent stream that does not depend on which other
// classes are trained alongside it.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view stream);

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01();

    // Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t bound);

    // Standard normal via Box-Muller; caches the second variate.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace fuzzyboost
