#include "reuse/rng.hpp"

#include <cmath>
#include <numbers>

namespace reuse {

namespace {

constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

// splitmix64 finalizer, used only to spread seeds over the key space.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return static_cast<double>(bits & ((1ull << 53) - 1)) * 0x1.0p-53;
}

}  // namespace

Philox::Block Philox::block(std::uint64_t counter) const {
    Block ctr{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), lane_,
              0x5EEDu};
    std::uint32_t k0 = static_cast<std::uint32_t>(key_);
    std::uint32_t k1 = static_cast<std::uint32_t>(key_ >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kM0, ctr[0], lo0, hi0);
        mulhilo(kM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kW0;
        k1 += kW1;
    }
    return ctr;
}

std::uint64_t derive_key(std::uint64_t seed, StreamPurpose purpose, std::uint64_t sub) {
    return mix64(mix64(seed) ^ mix64((static_cast<std::uint64_t>(purpose) << 40) ^ sub));
}

void Stream::seek(std::uint64_t counter) {
    counter_ = counter;
    ucount_ = 0;
    ncount_ = 0;
}

void Stream::refill_uniform() {
    const auto b = gen_.block(counter_++);
    ucache_[0] = to_unit(b[0], b[1]);
    ucache_[1] = to_unit(b[2], b[3]);
    ucount_ = 2;
}

void Stream::refill_normal() {
    const auto b = gen_.block(counter_++);
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - to_unit(b[0], b[1]);
    const double u2 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    ncache_[0] = r * std::cos(phi);
    ncache_[1] = r * std::sin(phi);
    ncount_ = 2;
}

double Stream::uniform() {
    if (ucount_ == 0) refill_uniform();
    return ucache_[2 - ucount_--];
}

double Stream::normal() {
    if (ncount_ == 0) refill_normal();
    return ncache_[2 - ncount_--];
}

std::uint64_t Stream::next_u64() {
    const auto b = gen_.block(counter_++);
    return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

std::uint64_t Stream::below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~0ull - (~0ull % n);
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v < limit) return v % n;
    }
}

void Stream::fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
}

}  // namespace reuse
