#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace pdsde::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (key, counter), so draws can be addressed by
// (seed, particle, step) regardless of evaluation order.
using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter ctr, Key key) noexcept {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

inline Key key_of(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// SplitMix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(seed ^ mix64(tag));
}

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller pair from two uniforms in (0, 1).
inline std::array<double, 2> box_muller(double u1, double u2) noexcept {
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Two standard normals addressed by a 96-bit position (a, b, c) under `seed`.
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                                         std::uint32_t c) noexcept {
    const Counter out = philox4x32({a, b, c, 0x4E4F524Du}, key_of(seed));
    const std::uint64_t x = (std::uint64_t{out[0]} << 32) | out[1];
    const std::uint64_t y = (std::uint64_t{out[2]} << 32) | out[3];
    return box_muller(to_unit_open(x), to_unit_open(y));
}

// Sequential stream on top of Philox: stream `id` under `seed`.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t id) noexcept : key_(key_of(seed)), id_(id) {}

    std::uint64_t next_u64() noexcept {
        if (have_ == 0) {
            block_ = philox4x32({static_cast<std::uint32_t>(pos_), static_cast<std::uint32_t>(pos_ >> 32),
                                 static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
                                key_);
            ++pos_;
            have_ = 2;
        }
        const std::size_t k = 2 - have_;
        --have_;
        return (std::uint64_t{block_[2 * k]} << 32) | block_[2 * k + 1];
    }

    double uniform() noexcept { return to_unit_open(next_u64()); }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double normal() noexcept {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const auto z = box_muller(u1, u2);
        spare_ = z[1];
        spare_valid_ = true;
        return z[0];
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    Key key_;
    std::uint64_t id_;
    std::uint64_t pos_ = 0;
    Counter block_{};
    std::size_t have_ = 0;
    double spare_ = 0.0;
    bool spare_valid_ = false;
};

}  // namespace pdsde::rng
