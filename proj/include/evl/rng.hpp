#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace evl {

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Combines a seed with a path of stream indices into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Seedable, splittable generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the standard.
/// Distributions are computed here from raw 64-bit draws rather than through
/// <random> distribution objects, whose algorithms are implementation-defined, so
/// that a seed reproduces the same reals on every platform.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

    /// Independent stream identified by `path`; does not depend on draws made so far.
    Rng substream(std::initializer_list<std::uint64_t> path) const {
        return Rng(derive_seed(seed_, path));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    result_type operator()() { return engine_(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal by the Box-Muller transform.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Exponential with the given rate.
    double exponential(double rate);
    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace evl
