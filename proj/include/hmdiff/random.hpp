#pragma once

// Seeded, version-pinned random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Everything layered on top (seed mixing, bounded integers, unit
// doubles) is implemented here rather than through <random> distributions,
// whose algorithms are implementation-defined.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hmdiff {

// Bumped whenever the derivation of any stream changes.
inline constexpr int kRandomStreamVersion = 1;

std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a, used to turn stream names into seed salt.
std::uint64_t fnv1a64(std::string_view bytes);

class RandomStream {
public:
    // Independent stream derived from (seed, name). Adding a new named stream
    // never changes the draws of an existing one.
    RandomStream(std::uint64_t seed, std::string_view name);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform();

    // Uniform integer in [0, bound), bound > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    // Exponential with the given mean (inverse CDF).
    double exponential(double mean);

    // Index drawn from a discrete distribution given by `weights` (need not be
    // normalized), via inverse CDF against a single uniform draw.
    std::size_t categorical(const std::vector<double>& weights);

private:
    std::mt19937_64 engine_;
};

}  // namespace hmdiff
