#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace nnlab {

// SplitMix64 finalizer (Steele/Lea/Flood). Also usable as a standalone
// 64-bit mixing function.
constexpr uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

// Deterministic random stream keyed by (seed, stream_id).
//
// The generator is xoshiro256++ 1.0 (Blackman & Vigna), state-seeded through
// SplitMix64 from mix64(seed) ^ mix64(~stream_id). All draws are integer
// operations plus IEEE-754 double arithmetic, so identical (seed, stream_id)
// pairs replay identical sequences on every platform. Distinct stream ids
// derived from the same seed give statistically independent streams, which is
// what lets experiment cells and runs execute in parallel without draw-order
// coupling.
//
// The pinned algorithms (do not change without bumping every frozen
// regression value in the tests):
//   engine:   xoshiro256++ 1.0
//   seeding:  SplitMix64 over mix64(seed) ^ mix64(~stream_id)
//   doubles:  53-bit mantissa, (x >> 11) * 2^-53, range [0, 1)
//   integers: unbiased rejection sampling on top of next_u64
//   normals:  Marsaglia polar method, second value cached
class RngStream {
public:
    explicit RngStream(uint64_t seed, uint64_t stream_id = 0);

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

    uint64_t next_u64();

    // Uniform double in [0, 1).
    double next_double();

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    // Uniform integer in [0, bound). bound must be >= 1.
    uint64_t uniform_int(uint64_t bound);

    // Standard normal draw.
    double normal();

private:
    std::array<uint64_t, 4> state_;
    uint64_t seed_ = 0;
    uint64_t stream_id_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// Stable stream id for a named experiment cell: FNV-1a 64 over the name bytes
// followed by each index encoded as 8 little-endian bytes. Used to derive
// per-cell and per-run streams so parallel runs never share draw sequences.
uint64_t stream_id_for(std::string_view name,
                       std::initializer_list<uint64_t> indices = {});

}  // namespace nnlab
