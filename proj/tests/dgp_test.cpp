#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "tailshift/dgp.hpp"
#include "tailshift/error.hpp"
#include "tailshift/estimators.hpp"

using namespace tailshift;

namespace {

double mean(std::span<const double> x) {
    long double s = 0.0L;
    for (double v : x) s += v;
    return static_cast<double>(s / x.size());
}

double variance(std::span<const double> x) {
    const double m = mean(x);
    long double s = 0.0L;
    for (double v : x) s += (v - m) * (v - m);
    return static_cast<double>(s / (x.size() - 1));
}

double lag1(std::span<const double> x) {
    const double m = mean(x);
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
    }
    return static_cast<double>(num / den);
}

// Two-sample Kolmogorov-Smirnov distance.
double ks2(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST(Ar1, WhiteNoiseHasNoAutocorrelation) {
    const auto x = gen_ar1(DgpSpec::ar1(0.0, 100000, 1));
    EXPECT_NEAR(lag1(x.values()), 0.0, 0.01);
}

TEST(Ar1, StationaryVariance) {
    const auto x = gen_ar1(DgpSpec::ar1(0.5, 1000000, 2));
    const double v = variance(x.values());
    EXPECT_GE(v, 1.31);
    EXPECT_LE(v, 1.36);
    EXPECT_NEAR(lag1(x.values()), 0.5, 0.01);
}

TEST(Ar1, VarMatchesGaussianClosedForm) {
    // Stationary law N(0, 1/(1 - phi^2)): VaR(0.95) = 1.6448536 * sqrt(4/3).
    const auto x = gen_ar1(DgpSpec::ar1(0.5, 1000000, 3));
    EXPECT_NEAR(var_estimate(x.values(), 0.95), 1.6448536 * std::sqrt(4.0 / 3.0), 0.02);
}

TEST(Ar1, ThreeRegimeIsDeterministic) {
    const auto a = generate(DgpSpec::three_regime_ar1(2.1, 1500, 9));
    const auto b = generate(DgpSpec::three_regime_ar1(2.1, 1500, 9));
    const auto c = generate(DgpSpec::three_regime_ar1(2.1, 1500, 10));
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(Ar1, RegimeOnlyChangesMiddleInnovations) {
    // Same stream, different middle df: the first third is untouched.
    const auto a = generate(DgpSpec::three_regime_ar1(2.1, 1500, 4));
    const auto b = generate(DgpSpec::three_regime_ar1(16.5, 1500, 4));
    for (std::size_t i = 0; i <= 500; ++i) ASSERT_EQ(a[i], b[i]) << i;
    EXPECT_NE(a[501], b[501]);
}

TEST(Ar1, RegimeSwitchIncreasesMiddleSpread) {
    double inner = 0.0, outer = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto x = generate(DgpSpec::three_regime_ar1(2.1, 3000, s));
        const auto v = x.values();
        inner += var_estimate(v.subspan(1100, 800), 0.99);
        outer += var_estimate(v.subspan(100, 800), 0.99);
    }
    EXPECT_GT(inner, outer);
}

TEST(Ar1, Validation) {
    EXPECT_THROW(gen_ar1(DgpSpec::ar1(1.0, 10, 1)), Error);
    auto t = DgpSpec::ar1(0.5, 10, 1);
    t.innovation = Innovation::StudentT;
    EXPECT_THROW(gen_ar1(t), Error);  // stationary start needs normal innovations
    t.init = InitMode::BurnIn;
    EXPECT_NO_THROW(gen_ar1(t));
    auto r = DgpSpec::ar1(0.5, 10, 1);
    r.regimes = {{0.5, 3.0}};
    EXPECT_THROW(gen_ar1(r), Error);
    auto o = DgpSpec::three_regime_ar1(3.0, 100, 1);
    o.regimes = {{0.6, 3.0}, {0.4, 16.5}};
    EXPECT_THROW(gen_ar1(o), Error);
}

TEST(Arch1, ConstantVolatilityIsGaussian) {
    const auto x = gen_arch1(DgpSpec::arch1(2.0, 0.0, 200000, 5));
    EXPECT_NEAR(variance(x.values()), 2.0, 0.03);
    EXPECT_NEAR(lag1(x.values()), 0.0, 0.01);
}

TEST(Arch1, SecondMomentMatchesClosedForm) {
    const auto x = gen_arch1(DgpSpec::arch1(1.0, 0.3, 1000000, 6));
    EXPECT_NEAR(variance(x.values()) / (1.0 / 0.7), 1.0, 0.05);
}

TEST(Arch1, SameSeedSameOutput) {
    const auto a = gen_arch1(DgpSpec::arch1(1.0, 0.3, 500, 7));
    const auto b = gen_arch1(DgpSpec::arch1(1.0, 0.3, 500, 7));
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST(Arch1, LambdaRegime) {
    auto spec = DgpSpec::arch1(1.0, 0.2, 200000, 8);
    spec.regimes = {{0.5, 0.6}};
    const auto x = gen_arch1(spec);
    const double before = variance(x.values().subspan(0, 100000));
    const double after = variance(x.values().subspan(100100));
    EXPECT_NEAR(before, 1.0 / 0.8, 0.05);
    EXPECT_NEAR(after, 1.0 / 0.4, 0.25);
}

TEST(Shift, Examples) {
    const auto s = inject_location_shift(TimeSeries({0, 0, 0, 0}), 0.5, 1.0);
    EXPECT_EQ(std::vector<double>(s.values().begin(), s.values().end()), (std::vector<double>{0, 0, 1, 1}));
    const TimeSeries x({1.5, -2.0, 3.0});
    const auto z = inject_location_shift(x, 0.3, 0.0);
    EXPECT_TRUE(std::equal(z.values().begin(), z.values().end(), x.values().begin()));
    EXPECT_THROW(inject_location_shift(x, 1.0, 1.0), Error);
}

TEST(Shift, PostMinusPreMeanIsMagnitude) {
    const auto x = inject_location_shift(gen_ar1(DgpSpec::ar1(0.5, 100000, 11)), 0.5, 0.7);
    const auto v = x.values();
    const double diff = mean(v.subspan(50000)) - mean(v.subspan(0, 50000));
    // Long-run variance of AR(1) with phi = 0.5 is 4; se of the difference is sqrt(2 * 4 / 50000).
    EXPECT_NEAR(diff, 0.7, 3.0 * std::sqrt(8.0 / 50000.0));
}

TEST(Samplers, NormalMoments) {
    RandomStream rng(12, 0);
    std::vector<double> v(1000000);
    for (double& x : v) x = sample_normal(rng);
    EXPECT_NEAR(mean(v), 0.0, 0.004);
    EXPECT_GE(variance(v), 0.99);
    EXPECT_LE(variance(v), 1.01);
}

TEST(Samplers, StudentTVariance) {
    RandomStream rng(13, 0);
    std::vector<double> v(1000000);
    for (double& x : v) x = sample_student_t(16.5, rng);
    EXPECT_NEAR(variance(v) / (16.5 / 14.5), 1.0, 0.03);
    EXPECT_THROW(sample_student_t(0.0, rng), Error);
}

TEST(Samplers, LargeDfApproachesNormal) {
    RandomStream a(14, 0), b(15, 0);
    std::vector<double> t(200000), z(200000);
    for (double& x : t) x = sample_student_t(1e6, a);
    for (double& x : z) x = sample_normal(b);
    EXPECT_LT(ks2(t, z), 0.005);
}

TEST(DgpFamily, Names) {
    EXPECT_EQ(parse_dgp_family(dgp_family_name(DgpFamily::AR1)), DgpFamily::AR1);
    EXPECT_EQ(parse_dgp_family(dgp_family_name(DgpFamily::ARCH1)), DgpFamily::ARCH1);
    EXPECT_THROW(parse_dgp_family("garch"), Error);
}
