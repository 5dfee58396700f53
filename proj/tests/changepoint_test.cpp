#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "changepoint_oracles.hpp"
#include "oracles.hpp"
#include "tailshift/changepoint.hpp"
#include "tailshift/dgp.hpp"
#include "tailshift/error.hpp"
#include "tailshift/estimators.hpp"
#include "tailshift/kernels.hpp"

using namespace tailshift;
using oracle::brute_gn;
using oracle::brute_hn;

namespace {

CriticalValueTable fixed_table(FunctionalId id, double param, double q95) {
    CriticalValueTable t;
    t.functional = {id, param};
    t.steps = 100;
    t.paths = 100;
    t.quantiles = {{0.9, 0.8 * q95}, {0.95, q95}, {0.99, 1.3 * q95}};
    return t;
}

}  // namespace

TEST(TrimPolicy, Defaults) {
    const auto t = TrimPolicy::defaults(0.9);
    EXPECT_EQ(t.i_min, 11u);
    EXPECT_EQ(t.n_min, 11u);
    const auto u = TrimPolicy::defaults(0.5);
    EXPECT_EQ(u.i_min, 3u);
    EXPECT_EQ(u.n_min, 8u);
    EXPECT_THROW((TrimPolicy{2, 3}.validate()), Error);
    EXPECT_THROW((TrimPolicy{2, 0}.validate()), Error);
}

TEST(Gn, MatchesBruteForceOnRandomSeries) {
    std::mt19937_64 gen(21);
    for (int r = 0; r < 200; ++r) {
        const double p = r % 2 == 0 ? 0.9 : 0.75;
        const TrimPolicy trim = TrimPolicy::defaults(p);
        const std::size_t n = 2 * trim.n_min + gen() % (201 - 2 * trim.n_min);
        auto x = oracle::random_series(gen, n);
        if (r % 5 == 0) {
            for (std::size_t i = n / 2; i < n; ++i) x[i] += 2.0;
        }
        const auto g = gn_statistic(TimeSeries(x), RiskSpec(p), trim);
        const auto b = brute_gn(x, p, trim);
        ASSERT_TRUE(oracle::close(g.value, b.value, 1e-9)) << g.value << " vs " << b.value << " n=" << n;
        ASSERT_EQ(g.trace.ratio.size(), b.ratio.size());
        for (std::size_t i = 0; i < b.ratio.size(); ++i) ASSERT_TRUE(oracle::close(g.trace.ratio[i], b.ratio[i], 1e-9));
        ASSERT_EQ(g.trace.ratio[g.argmax - trim.n_min], g.value);
        EXPECT_GE(g.value, 0.0);
        EXPECT_GE(g.argmax, trim.n_min);
        EXPECT_LE(g.argmax, n - trim.n_min);
    }
}

TEST(Gn, ArgmaxTiesGoToSmallestIndex) {
    std::mt19937_64 gen(22);
    const auto x = oracle::random_series(gen, 100);
    const auto g = gn_statistic(TimeSeries(x), RiskSpec(0.9), TrimPolicy::defaults(0.9));
    for (std::size_t i = 0; i < g.trace.ratio.size(); ++i) {
        if (g.trace.k[i] < g.argmax) EXPECT_LT(g.trace.ratio[i], g.value);
    }
}

TEST(Gn, ConstantSeriesIsDegenerate) {
    try {
        gn_statistic(TimeSeries(std::vector<double>(100, 3.0)), RiskSpec(0.9), TrimPolicy::defaults(0.9));
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Degenerate);
        EXPECT_DOUBLE_EQ(e.center(), 30.0);
    }
}

TEST(Gn, TooShort) {
    EXPECT_THROW(gn_statistic(TimeSeries(std::vector<double>(21, 1.0)), RiskSpec(0.9), TrimPolicy::defaults(0.9)), Error);
}

TEST(Gn, ScaleInvariance) {
    std::mt19937_64 gen(23);
    for (int r = 0; r < 50; ++r) {
        const auto x = oracle::random_series(gen, 60 + gen() % 300);
        const TimeSeries s(x);
        const auto base = gn_statistic(s, RiskSpec(0.9), TrimPolicy::defaults(0.9));
        for (double lambda : {0.125, 4.0, 1024.0}) {
            const auto g = gn_statistic(s.scaled(lambda), RiskSpec(0.9), TrimPolicy::defaults(0.9));
            EXPECT_EQ(g.value, base.value);
            EXPECT_EQ(g.argmax, base.argmax);
        }
        for (double lambda : {0.37, 3.0, 1234.5}) {
            const auto g = gn_statistic(s.scaled(lambda), RiskSpec(0.9), TrimPolicy::defaults(0.9));
            EXPECT_TRUE(oracle::close(g.value, base.value, 1e-12)) << g.value << " vs " << base.value;
            EXPECT_EQ(g.argmax, base.argmax);
        }
    }
}

TEST(Gn, ReversalMapsCandidateRatios) {
    std::mt19937_64 gen(24);
    for (int r = 0; r < 50; ++r) {
        const std::size_t n = 60 + gen() % 200;
        const auto x = oracle::random_series(gen, n);
        const TimeSeries s(x);
        const TrimPolicy trim = TrimPolicy::defaults(0.9);
        const auto a = gn_statistic(s, RiskSpec(0.9), trim);
        const auto b = gn_statistic(s.reversed(), RiskSpec(0.9), trim);
        ASSERT_EQ(a.trace.k.size(), b.trace.k.size());
        const std::size_t c = a.trace.k.size();
        for (std::size_t i = 0; i < c; ++i) {
            ASSERT_EQ(a.trace.k[i], n - b.trace.k[c - 1 - i]);
            ASSERT_TRUE(oracle::close(a.trace.ratio[i], b.trace.ratio[c - 1 - i], 1e-10));
        }
        EXPECT_TRUE(oracle::close(a.value, b.value, 1e-10));
    }
}

TEST(Gn, LargeShiftIsDetected) {
    const auto table = fixed_table(FunctionalId::G, 11.0 / 400.0, 40.1);
    int rejected = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomStream rng(seed, 0);
        std::vector<double> x(400);
        for (std::size_t i = 0; i < 400; ++i) x[i] = rng.normal() + (i >= 200 ? 10.0 : 0.0);
        const auto t = single_test(TimeSeries(x), RiskSpec(0.9), 0.05, TrimPolicy::defaults(0.9), table);
        rejected += t.reject;
    }
    EXPECT_GE(rejected, 99);
}

TEST(Gn, ArchMidpointShiftIsLocated) {
    const auto table = fixed_table(FunctionalId::G, 11.0 / 400.0, 40.1);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = inject_location_shift(generate(DgpSpec::arch1(1.0, 0.3, 400, seed)), 0.5, 1.0);
        const auto t = single_test(x, RiskSpec(0.9), 0.05, TrimPolicy::defaults(0.9), table);
        const long loc = static_cast<long>(*t.location);
        good += t.reject && std::abs(loc - 200) <= 40;
    }
    EXPECT_GT(good, 50);
}

TEST(SingleTest, RejectIffStatisticExceedsCritical) {
    std::mt19937_64 gen(25);
    const auto x = oracle::random_series(gen, 200);
    const TimeSeries s(x);
    const auto g = gn_statistic(s, RiskSpec(0.9), TrimPolicy::defaults(0.9));
    for (double cv : {g.value * 0.5, g.value, g.value * 2.0}) {
        const auto t = single_test(s, RiskSpec(0.9), 0.05, TrimPolicy::defaults(0.9),
                                   fixed_table(FunctionalId::G, 0.055, cv));
        EXPECT_EQ(t.critical_value, cv);
        EXPECT_EQ(t.reject, t.statistic > cv);
        EXPECT_EQ(*t.location, g.argmax);
        EXPECT_EQ(t.test, "single");
    }
    EXPECT_THROW(single_test(s, RiskSpec(0.9), 0.05, TrimPolicy::defaults(0.9),
                             fixed_table(FunctionalId::Htilde, 0.1, 1.0)),
                 Error);
    try {
        single_test(s, RiskSpec(0.9), 0.02, TrimPolicy::defaults(0.9), fixed_table(FunctionalId::G, 0.055, 1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::MissingTable);
    }
}

TEST(SingleTest, LowerTailMirrorsUpperTail) {
    std::mt19937_64 gen(26);
    const auto x = oracle::random_series(gen, 300);
    const TimeSeries s(x);
    const auto table = fixed_table(FunctionalId::G, 0.03, 40.1);
    const auto up = single_test(s.negated(), RiskSpec(0.9), 0.05, TrimPolicy::defaults(0.9), table);
    const auto lo = single_test(s, RiskSpec(0.1, TailSide::Lower), 0.05, TrimPolicy::defaults(0.9), table);
    EXPECT_TRUE(oracle::close(up.statistic, lo.statistic, 1e-12));
    EXPECT_EQ(up.location, lo.location);
}

TEST(Hn, GridMatchesBruteForceOnRandomSeries) {
    std::mt19937_64 gen(27);
    const double ps[] = {0.5, 0.6, 0.75, 0.8};
    for (int r = 0; r < 200; ++r) {
        const double p = ps[r % 4];
        const std::size_t i_min = 1 + r % 3;
        const double delta = r % 2 == 0 ? 0.1 : 0.15;
        const std::size_t lo = static_cast<std::size_t>(std::ceil(2.0 * i_min / delta));
        const std::size_t n = std::max<std::size_t>(lo, 40) + gen() % (201 - std::max<std::size_t>(lo, 40));
        auto x = oracle::random_series(gen, n);
        if (r % 4 == 1) {
            for (std::size_t i = n / 3; i < 2 * n / 3; ++i) x[i] *= 3.0;
        }
        const auto h = hn_statistic(TimeSeries(x), RiskSpec(p), delta, HnMode::Grid, i_min);
        const auto b = brute_hn(x, p, delta, i_min, false);
        ASSERT_TRUE(oracle::close(h.forward, b.forward, 1e-9)) << h.forward << " vs " << b.forward << " n=" << n;
        ASSERT_TRUE(oracle::close(h.backward, b.backward, 1e-9)) << h.backward << " vs " << b.backward << " n=" << n;
        ASSERT_TRUE(oracle::close(h.value, b.value(), 1e-9));
        EXPECT_GE(h.value, 0.0);
    }
}

TEST(Hn, FullMatchesBruteForceAndDominatesGrid) {
    std::mt19937_64 gen(28);
    for (int r = 0; r < 12; ++r) {
        const std::size_t n = 40 + gen() % 60;
        const auto x = oracle::random_series(gen, n);
        const TimeSeries s(x);
        const auto full = hn_statistic(s, RiskSpec(0.75), 0.1, HnMode::Full, 2);
        const auto grid = hn_statistic(s, RiskSpec(0.75), 0.1, HnMode::Grid, 2);
        const auto b = brute_hn(x, 0.75, 0.1, 2, true);
        ASSERT_TRUE(oracle::close(full.value, b.value(), 1e-9)) << full.value << " vs " << b.value();
        EXPECT_LE(grid.forward, full.forward);
        EXPECT_LE(grid.backward, full.backward);
        EXPECT_GT(full.candidates, grid.candidates);
    }
}

TEST(Hn, TraceRecordsEveryCandidate) {
    std::mt19937_64 gen(29);
    const auto x = oracle::random_series(gen, 120);
    const auto h = hn_statistic(TimeSeries(x), RiskSpec(0.75), 0.1, HnMode::Grid, 2, true);
    EXPECT_EQ(h.trace.size(), h.candidates);
    double f = -1.0, b = -1.0;
    for (const auto& c : h.trace) {
        if (std::isnan(c.d)) continue;
        (c.forward ? f : b) = std::max(c.forward ? f : b, c.c / c.d);
    }
    EXPECT_EQ(f, h.forward);
    EXPECT_EQ(b, h.backward);
}

TEST(Hn, ScaleInvariance) {
    std::mt19937_64 gen(30);
    for (int r = 0; r < 10; ++r) {
        const auto x = oracle::random_series(gen, 300 + gen() % 200);
        const TimeSeries s(x);
        const auto base = hn_statistic(s, RiskSpec(0.9), 0.1);
        for (double lambda : {0.25, 8.0}) {
            const auto h = hn_statistic(s.scaled(lambda), RiskSpec(0.9), 0.1);
            EXPECT_EQ(h.value, base.value);
            EXPECT_EQ(h.forward_k1, base.forward_k1);
            EXPECT_EQ(h.backward_j2, base.backward_j2);
        }
        for (double lambda : {0.37, 3.0, 1234.5}) {
            const auto h = hn_statistic(s.scaled(lambda), RiskSpec(0.9), 0.1);
            EXPECT_TRUE(oracle::close(h.value, base.value, 1e-12)) << h.value << " vs " << base.value;
        }
    }
}

TEST(Hn, BackendsAgree) {
    std::mt19937_64 gen(31);
    const auto x = oracle::random_series(gen, 400);
    const kernels::Backend before = kernels::active_backend();
    kernels::set_backend(kernels::Backend::Scalar);
    const auto a = hn_statistic(TimeSeries(x), RiskSpec(0.9), 0.1);
    kernels::set_backend(kernels::Backend::Avx2);
    const auto b = hn_statistic(TimeSeries(x), RiskSpec(0.9), 0.1);
    kernels::set_backend(before);
    EXPECT_TRUE(oracle::close(a.value, b.value, 1e-12));
}

TEST(Hn, Errors) {
    std::mt19937_64 gen(32);
    const TimeSeries s(oracle::random_series(gen, 100));
    EXPECT_THROW(hn_statistic(s, RiskSpec(0.9), 0.1), Error);  // n delta < 2 i_min
    EXPECT_THROW(hn_statistic(s, RiskSpec(0.5), 0.4), Error);
    EXPECT_THROW(hn_statistic(s, RiskSpec(0.5), 0.0), Error);
    EXPECT_THROW(hn_statistic(TimeSeries(std::vector<double>(300, 1.0)), RiskSpec(0.9), 0.1), DegenerateError);
}

TEST(MultipleTest, TableDeltaMustMatch) {
    std::mt19937_64 gen(33);
    const TimeSeries s(oracle::random_series(gen, 400));
    const auto ok = multiple_test(s, RiskSpec(0.9), 0.05, 0.1, fixed_table(FunctionalId::Htilde, 0.1, 136.0));
    EXPECT_EQ(ok.reject, ok.statistic > 136.0);
    EXPECT_FALSE(ok.location.has_value());
    EXPECT_EQ(ok.test, "multiple");
    try {
        multiple_test(s, RiskSpec(0.9), 0.05, 0.1, fixed_table(FunctionalId::Htilde, 0.05, 136.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::MissingTable);
    }
}

TEST(HnMode, Names) {
    EXPECT_EQ(parse_hn_mode(hn_mode_name(HnMode::Grid)), HnMode::Grid);
    EXPECT_EQ(parse_hn_mode(hn_mode_name(HnMode::Full)), HnMode::Full);
    EXPECT_THROW(parse_hn_mode("coarse"), Error);
}
