#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "rbeta/errors.hpp"
#include "rbeta/rng.hpp"

namespace {

using namespace rbeta;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, ZeroCounterAndKey) {
    const auto r = rng::philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r, (rng::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, AllOnes) {
    const auto r = rng::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                      {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(r, (rng::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, PiDigits) {
    const auto r = rng::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(r, (rng::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, DependsOnlyOnSeedPathAndStream) {
    rng::Stream a(5, 9, 1);
    rng::Stream b(5, 9, 1);
    rng::Stream c(5, 10, 1);
    rng::Stream d(5, 9, 2);
    bool differs_c = false;
    bool differs_d = false;
    for (int k = 0; k < 100; ++k) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs_c |= x != c.next_u64();
        differs_d |= x != d.next_u64();
    }
    EXPECT_TRUE(differs_c);
    EXPECT_TRUE(differs_d);
}

TEST(Stream, UniformOpenIntervalAndNormalMoments) {
    rng::Stream g(1, 0);
    double m = 0.0;
    double m2 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double u = g.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double z = g.normal();
        m += z;
        m2 += z * z;
    }
    EXPECT_NEAR(m / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.01);
}

TEST(StudentT, VarianceNormalized) {
    rng::Stream g(2024, 0);
    const int n = 1000000;
    double s = 0.0;
    double s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = rng::student_t_scaled(3, 1.0, g);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    EXPECT_NEAR(sd, 1.0, 0.01);
    EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(StudentT, LargeDofApproachesGaussianKurtosis) {
    rng::Stream g(7, 0);
    const int n = 400000;
    double s2 = 0.0;
    double s4 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = rng::student_t_scaled(200, 1.0, g);
        s2 += x * x;
        s4 += x * x * x * x;
    }
    EXPECT_NEAR((s4 / n) / ((s2 / n) * (s2 / n)), 3.0, 0.1);
}

TEST(StudentT, RejectsInfiniteVariance) {
    rng::Stream g(1, 1);
    EXPECT_THROW(rng::student_t_scaled(2, 1.0, g), ConfigError);
}

TEST(Ou, NoVolVolDecaysDeterministically) {
    rng::Stream g(3, 0);
    double x = 1.0;
    for (int k = 0; k < 10; ++k) x = rng::ou_step(x, 100.0, 0.0, g);
    EXPECT_NEAR(x, std::pow(0.99, 10), 1e-15);
}

TEST(Ou, StationaryStdAndAutocorrelation) {
    rng::Stream g(11, 0);
    const double relax = 100.0;
    const double volvol = 0.04;
    double x = std::sqrt(rng::ou_stationary_variance(relax, volvol)) * g.normal();
    std::vector<double> xs(400000);
    for (double& v : xs) {
        x = rng::ou_step(x, relax, volvol, g);
        v = x;
    }
    double m2 = 0.0;
    for (double v : xs) m2 += v * v;
    m2 /= static_cast<double>(xs.size());
    EXPECT_NEAR(std::sqrt(m2) / (volvol * std::sqrt(relax / 2.0)), 1.0, 0.05);
    for (std::size_t lag : {10u, 50u}) {
        double c = 0.0;
        for (std::size_t t = lag; t < xs.size(); ++t) c += xs[t] * xs[t - lag];
        c /= static_cast<double>(xs.size() - lag);
        EXPECT_NEAR(c / m2, std::pow(1.0 - 1.0 / relax, static_cast<double>(lag)), 0.05);
    }
}

TEST(Ou, RejectsNonPositiveRelaxation) {
    rng::Stream g(1, 1);
    EXPECT_THROW(rng::ou_step(0.0, 0.0, 0.1, g), ConfigError);
}

}  // namespace
