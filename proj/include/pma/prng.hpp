#ifndef PMA_PRNG_HPP
#define PMA_PRNG_HPP

#include <cstdint>

namespace pma {

// splitmix64: tiny, fast, and good enough for deterministic benchmark
// streams. The same seed always yields the same stream, which is what keeps
// every implementation variant of a workload byte-identical.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// The splitmix64 finalizer on its own: a cheap 64-bit mixer, used to fold
// key sequences into order-sensitive hashes.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Salt added to a workload seed to derive the GUPS update stream, so that
// table fill and update indices come from independent streams.
inline constexpr std::uint64_t kGupsUpdateSalt = 0x632BE59BD9B4E019ull;

} // namespace pma

#endif
