#include "nnlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nnlab {

namespace {

constexpr uint64_t rotl64(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    SplitMix64 sm(mix64(seed) ^ mix64(~stream_id));
    do {
        for (auto& word : state_) {
            word = sm.next();
        }
    } while (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 &&
             state_[3] == 0);
}

uint64_t RngStream::next_u64() {
    // xoshiro256++ 1.0
    const uint64_t result = rotl64(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl64(state_[3], 45);
    return result;
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

uint64_t RngStream::uniform_int(uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform_int: bound must be >= 1");
    }
    // Reject draws below 2^64 mod bound to remove modulo bias.
    const uint64_t threshold = (-bound) % bound;
    for (;;) {
        const uint64_t x = next_u64();
        if (x >= threshold) {
            return x % bound;
        }
    }
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * f;
    has_cached_normal_ = true;
    return u * f;
}

uint64_t stream_id_for(std::string_view name,
                       std::initializer_list<uint64_t> indices) {
    // FNV-1a 64
    uint64_t h = 14695981039346656037ULL;
    auto feed = [&h](uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (char c : name) {
        feed(static_cast<uint8_t>(c));
    }
    for (uint64_t idx : indices) {
        for (int b = 0; b < 8; ++b) {
            feed(static_cast<uint8_t>(idx >> (8 * b)));
        }
    }
    return h;
}

}  // namespace nnlab
