#ifndef SWARMSYNC_RNG_HPP
#define SWARMSYNC_RNG_HPP

#include <cstdint>
#include <random>

namespace swarmsync {

// Deterministic random source. mt19937_64 raw output is specified by the
// standard, and all sampling below is done with explicit arithmetic on raw
// draws, so sequences are reproducible across platforms and stdlib versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [lo, hi], both inclusive. Rejection sampled, exact.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span =
            static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1u;
        if (span == 0u) {  // full 64-bit range
            return static_cast<std::int64_t>(next_u64());
        }
        const std::uint64_t rem = (UINT64_MAX % span + 1u) % span;  // 2^64 mod span
        const std::uint64_t bound = UINT64_MAX - rem;
        std::uint64_t x = next_u64();
        while (x > bound) {
            x = next_u64();
        }
        return lo + static_cast<std::int64_t>(x % span);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform_real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_real01() < p; }

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from (seed, stream, salt). splitmix64.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
    std::uint64_t s = seed;
    auto next = [&s]() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = next();
    s ^= stream + 0x9e3779b97f4a7c15ULL;
    h ^= next();
    s ^= salt * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
    h ^= next();
    return h;
}

// Stream ids for the simulator's independent substreams.
inline constexpr std::uint64_t kStreamNodeInit = 1;
inline constexpr std::uint64_t kStreamNodeProtocol = 2;
inline constexpr std::uint64_t kStreamRadio = 3;
inline constexpr std::uint64_t kStreamFault = 4;

}  // namespace swarmsync

#endif
