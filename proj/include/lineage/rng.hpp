#pragma once

// Deterministic, splittable random streams.
//
// Every consumer of randomness owns an RngStream identified by
// (seed, stream_id). The state is derived by running splitmix64 over the
// seed and then folding in the stream id, so streams with distinct ids are
// decorrelated even under identical seeds, and the same (seed, stream_id)
// pair replays the same draw sequence on any platform. Draw order within a
// stream is part of the reproducibility contract; never share a stream
// between two logical purposes.

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace lineage {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Stream purposes. Combined with member/lane indices into a stream id so
// that, e.g., instance sampling never shares draws with action sampling.
enum class StreamPurpose : std::uint64_t {
    InstanceContent = 1,
    InstanceLayout,
    OracleCorruption,
    Visibility,
    PolicySampling,
    DemoSampling,
    ParamInit,
    LayerReset,
    MinibatchShuffle,
    EvalInstance,
    EvalPolicy,
    EvalEpisode,
};

// Folds (purpose, a, b) into a single 64-bit stream id. FNV-style mixing;
// collisions across the handful of tuples a run uses are not a concern.
inline std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ static_cast<std::uint64_t>(purpose);
    h = (h ^ (a + 0x9E3779B97F4A7C15ULL)) * 0x100000001B3ULL;
    h = (h ^ (b + 0xC2B2AE3D27D4EB4FULL)) * 0x100000001B3ULL;
    return h;
}

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t id) {
        std::uint64_t sm = seed;
        detail::splitmix64_next(sm);
        sm ^= detail::rotl64(id, 17) + 0x9E3779B97F4A7C15ULL;
        for (auto& word : state_) word = detail::splitmix64_next(sm);
    }

    // xoshiro256++ step.
    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is below 2^-40 for any n that
    // fits this codebase; not worth a rejection loop.
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller without caching: consumes exactly two uniforms per draw so
    // the stream position stays a pure function of the draw count.
    double normal() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
            const int j = uniform_int(i + 1);
            std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)]);
        }
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        shuffle(p);
        return p;
    }

private:
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace lineage
