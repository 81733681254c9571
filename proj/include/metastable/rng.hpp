#pragma once

#include <cstdint>

namespace metastable {

/// Counter-based pseudo-randomness. Every draw is a pure function of
/// (seed, stream, counter), so any sub-window of any stream can be
/// regenerated independently of generation order and thread schedule.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

/// SplitMix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = mix(seed ^ (stream * 0xda942042e4dd58b5ull));
    return mix(h ^ (counter * kGolden));
}

/// Uniform draw in [0, 1) with 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(keyed(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Fixed stream ids; a (seed, stream) pair never serves two purposes.
enum Stream : std::uint64_t {
    kPathSymbols = 1,    // driving-symbol sequence, counter = fiber index
    kInitialPoint = 2,   // Monte Carlo initial conditions, counter = sample id
    kMarkovChain = 3,    // direct jump-chain simulation
    kPropertyCases = 4,  // randomized property-test configurations
    kReplicaPath = 5,    // per-replica path seeds for annealed sampling
};

/// Stateful convenience wrapper over the keyed generator; consumption
/// order within one (seed, stream) is still reproducible by counter.
class Sequence {
public:
    Sequence(std::uint64_t seed, std::uint64_t stream, std::uint64_t start = 0)
        : seed_(seed), stream_(stream), counter_(start) {}

    double uniform01() { return rng::uniform01(seed_, stream_, counter_++); }
    std::uint64_t bits() { return keyed(seed_, stream_, counter_++); }

    /// Uniform draw on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

}  // namespace rng
}  // namespace metastable
