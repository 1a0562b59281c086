#pragma once

#include <array>
#include <cstdint>
#include <string_view>

// Pinned pseudo-random primitives. Every algorithm in this header is part of
// the reproducibility contract: an independent implementation in another
// language must be able to regenerate identical trial sets from the same
// master seed, so nothing here may change without versioning the log format.

namespace moeval::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 output finalizer (Steele/Lea/Flood, Vigna's public-domain code).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    // Jump the stream forward by n steps in O(1); state advances linearly.
    constexpr void discard(std::uint64_t n) noexcept { state_ += n * kGolden; }

    constexpr std::uint64_t operator()() noexcept { return next(); }

    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return ~0ull; }

private:
    std::uint64_t state_;
};

// xoshiro256** 1.0 (Blackman/Vigna), seeded from four successive SplitMix64
// outputs as recommended by the authors. Used for all shuffling.
class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256ss(std::uint64_t seed) noexcept : s_{} {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    constexpr std::uint64_t operator()() noexcept { return next(); }

    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return ~0ull; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_;
};

// Unbiased draw from [0, m) via modulo rejection: discard raw values below
// 2^64 mod m, then reduce. Rejection keeps the draw exactly uniform and the
// procedure is trivial to restate for a reimplementation.
template <typename Gen>
std::uint64_t bounded(Gen& gen, std::uint64_t m) {
    const std::uint64_t reject_below = (0 - m) % m;  // 2^64 mod m
    for (;;) {
        const std::uint64_t x = gen.next();
        if (x >= reject_below) return x % m;
    }
}

// FNV-1a 64-bit over bytes; used to fold string ids into seed material.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Partial Fisher-Yates over indices [0, n): after the call the first `take`
// slots hold a uniform without-replacement sample. Consumes exactly `take`
// bounded draws.
template <typename T, typename Gen>
void partial_shuffle(T* data, std::size_t n, std::size_t take, Gen& gen) {
    for (std::size_t i = 0; i < take && i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(gen, n - i));
        std::swap(data[i], data[j]);
    }
}

template <typename T, typename Gen>
void shuffle_all(T* data, std::size_t n, Gen& gen) {
    if (n < 2) return;
    partial_shuffle(data, n, n - 1, gen);
}

}  // namespace moeval::rng
