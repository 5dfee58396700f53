#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "tailshift/parallel.hpp"
#include "tailshift/rng.hpp"

using namespace tailshift;

TEST(Philox, KnownAnswerVectors) {
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
              (PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, UniformFollowsDocumentedLayout) {
    const std::uint64_t seed = 0x0123456789abcdefULL, stream = 77;
    RandomStream s(seed, stream);
    const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (std::uint32_t block = 0; block < 3; ++block) {
        const auto w = philox4x32_10({block, 0, static_cast<std::uint32_t>(stream), 0}, key);
        for (int half = 0; half < 2; ++half) {
            const std::uint64_t a = w[2 * half], b = w[2 * half + 1];
            const double expect = (static_cast<double>((a << 21) ^ (b >> 11)) + 0.5) * 0x1p-53;
            EXPECT_EQ(s.uniform(), expect);
        }
    }
}

TEST(RandomStream, DeterministicAndStreamsDiffer) {
    RandomStream a(7, 1), b(7, 1), c(7, 2), d(8, 1);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        same_c += x == c.normal();
        same_d += x == d.normal();
    }
    EXPECT_EQ(same_c, 0);
    EXPECT_EQ(same_d, 0);
}

TEST(RandomStream, UniformInOpenUnitInterval) {
    RandomStream s(1, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RandomStream, NormalMoments) {
    RandomStream s(3, 0);
    const int n = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 0.01);
    EXPECT_NEAR(m2, 1.0, 0.01);
    EXPECT_NEAR(m4, 3.0, 0.06);
}

TEST(RandomStream, ChiSquareAndGammaMeans) {
    RandomStream s(4, 0);
    for (double v : {0.5, 3.0, 16.5, 100.0}) {
        const int n = 200000;
        double m = 0, m2 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = s.chi_square(v);
            ASSERT_GE(x, 0.0);
            m += x;
            m2 += x * x;
        }
        m /= n;
        const double var = m2 / n - m * m;
        EXPECT_NEAR(m / v, 1.0, 0.02) << v;
        EXPECT_NEAR(var / (2 * v), 1.0, 0.05) << v;
    }
}

TEST(RandomStream, StudentTTailProbability) {
    // P(T_3 > 3) = 0.0288
    RandomStream s(5, 0);
    const int n = 400000;
    int above = 0;
    for (int i = 0; i < n; ++i) above += s.student_t(3.0) > 3.0;
    EXPECT_NEAR(static_cast<double>(above) / n, 0.02883444, 0.0015);
}

TEST(SubstreamId, DistinctAcrossPurposeAndIndex) {
    std::set<std::uint64_t> ids;
    for (std::uint32_t purpose = 0; purpose < 20; ++purpose) {
        for (std::uint64_t i = 0; i < 1000; ++i) ids.insert(substream_id(purpose, i));
    }
    EXPECT_EQ(ids.size(), 20000u);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, ResultIndependentOfThreadCount) {
    auto run = [](unsigned threads) {
        std::vector<double> out(200);
        parallel_for(out.size(), threads, [&](std::size_t i) {
            RandomStream s(11, substream_id(1, i));
            out[i] = s.normal();
        });
        return out;
    };
    EXPECT_EQ(run(1), run(3));
    EXPECT_EQ(run(1), run(8));
}

TEST(ParallelFor, RethrowsBodyException) {
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::size_t i) {
                                  if (i == 37) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}
