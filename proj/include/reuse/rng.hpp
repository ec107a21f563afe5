#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace reuse {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key (derived from the run seed and a
/// purpose tag) and addressed by a 64-bit block counter plus a 32-bit lane.
/// Any block can be generated independently, so parallel consumers only need
/// disjoint counter ranges to reproduce the serial draw sequence bit for bit.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox(std::uint64_t key, std::uint32_t lane = 0) : key_(key), lane_(lane) {}

    Block block(std::uint64_t counter) const;

    std::uint64_t key() const { return key_; }
    std::uint32_t lane() const { return lane_; }

private:
    std::uint64_t key_;
    std::uint32_t lane_;
};

/// Purposes get disjoint key spaces so changing one phase's draw count never
/// perturbs another phase.
enum class StreamPurpose : std::uint32_t {
    Direction = 1,
    Data = 2,
    Init = 3,
    Activation = 4,
    Bias = 5,
    Ridge = 6,
    Test = 7,
    MonteCarlo = 8,
    Probe = 9,
};

std::uint64_t derive_key(std::uint64_t seed, StreamPurpose purpose, std::uint64_t sub = 0);

/// Sequential view over a Philox stream. Each block yields two doubles in
/// [0,1) with 53-bit resolution, or two standard normals (Box-Muller).
class Stream {
public:
    Stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t sub = 0,
           std::uint64_t counter = 0)
        : gen_(derive_key(seed, purpose, sub)), counter_(counter) {}

    double uniform();
    double normal();
    std::uint64_t next_u64();
    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    bool coin() { return (next_u64() >> 63) != 0; }

    void fill_normal(std::span<double> out);

    // Counter of the next unconsumed block.
    std::uint64_t counter() const { return counter_; }
    // Jump to an absolute block counter, discarding any cached values.
    void seek(std::uint64_t counter);

    // Number of blocks fill_normal consumes for n values when the cache is empty.
    static std::uint64_t blocks_for_normals(std::uint64_t n) { return (n + 1) / 2; }

private:
    void refill_uniform();
    void refill_normal();

    Philox gen_;
    std::uint64_t counter_;
    std::array<double, 2> ucache_{};
    int ucount_ = 0;
    std::array<double, 2> ncache_{};
    int ncount_ = 0;
};

}  // namespace reuse
