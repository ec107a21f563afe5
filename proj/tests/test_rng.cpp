#include <array>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "reuse/rng.hpp"

using namespace reuse;

namespace {

// Textbook philox4x32-10, written out independently of the library.
std::array<std::uint32_t, 4> reference_philox(std::array<std::uint32_t, 4> c, std::uint32_t k0, std::uint32_t k1) {
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return c;
}

}  // namespace

TEST(Philox, ReferenceKnownAnswer) {
    // Random123 known-answer vectors for philox4x32-10.
    const auto z = reference_philox({0, 0, 0, 0}, 0, 0);
    EXPECT_EQ(z, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    const auto f = reference_philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, 0xffffffffu, 0xffffffffu);
    EXPECT_EQ(f, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, MatchesReference) {
    const std::uint64_t key = 0x0123456789abcdefull;
    Philox p(key, 3);
    for (std::uint64_t ctr : {0ull, 1ull, 0x100000000ull, 0xfedcba9876543210ull}) {
        const auto want = reference_philox({static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32), 3u, 0x5EEDu},
                                           static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32));
        EXPECT_EQ(p.block(ctr), want);
    }
}

TEST(Stream, RandomAccessMatchesSequential) {
    Stream a(42, StreamPurpose::Data);
    std::vector<double> seq(20);
    for (auto& v : seq) v = a.normal();
    Stream b(42, StreamPurpose::Data, 0, 5);
    EXPECT_EQ(b.normal(), seq[10]);
    EXPECT_EQ(b.normal(), seq[11]);
}

TEST(Stream, PurposesAreIndependent) {
    Stream a(1, StreamPurpose::Data), b(1, StreamPurpose::Init), c(1, StreamPurpose::Data, 1);
    const double x = a.uniform(), y = b.uniform(), z = c.uniform();
    EXPECT_NE(x, y);
    EXPECT_NE(x, z);
    EXPECT_NE(derive_key(1, StreamPurpose::Data), derive_key(2, StreamPurpose::Data));
}

TEST(Stream, MomentsLookGaussian) {
    Stream s(7, StreamPurpose::MonteCarlo);
    const int n = 200000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    EXPECT_NEAR(m1 / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.01);
    EXPECT_NEAR(m4 / n, 3.0, 0.06);
}

TEST(Stream, UniformRangeAndBelow) {
    Stream s(3, StreamPurpose::Test);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const auto k = s.below(7);
        ASSERT_LT(k, 7u);
        seen.insert(k);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(Stream, FillNormalBlockAccounting) {
    Stream s(9, StreamPurpose::Data);
    std::vector<double> v(7);
    s.fill_normal(v);
    EXPECT_EQ(s.counter(), Stream::blocks_for_normals(7));
}
