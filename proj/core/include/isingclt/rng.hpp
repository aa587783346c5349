#pragma once

#include <cstdint>
#include <limits>

namespace isingclt {

/// Counter-based 64-bit generator.
///
/// Output number c of a stream is mix(key + (c + 1) * kGamma), where mix is the
/// SplitMix64 finalizer. A stream is fully determined by its key, so streams
/// can be created in any order and on any thread. Keys for sub-streams are
/// derived with `CounterRng::stream(seed, id)`; distinct (seed, id) pairs give
/// distinct keys with overwhelming probability.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

    /// Stream `id` of the family rooted at `seed`.
    static CounterRng stream(std::uint64_t seed, std::uint64_t id) {
        return CounterRng(mix(mix(seed) ^ (id * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL)));
    }

    /// Nested stream: stream(seed, a) then sub-stream b.
    static CounterRng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        return stream(stream(seed, a).key_, b);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix(key_ + counter_ * kGamma);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Multiply-high reduction; bias below bound / 2^64.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * bound) >> 64);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace isingclt
