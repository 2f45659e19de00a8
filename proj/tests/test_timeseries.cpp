#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rbeta/errors.hpp"
#include "rbeta/timeseries.hpp"

namespace {

using namespace rbeta;

TEST(Ema, HalfWeightAveragesValueAndInput) {
    auto s = ts::make_ema(0.5);
    s = ts::ema_update(s, 1.0);
    s = ts::ema_update(s, 2.0);
    EXPECT_DOUBLE_EQ(s.value, 1.5);
}

TEST(Ema, UnitWeightTracksInput) {
    auto s = ts::make_ema(1.0);
    s = ts::ema_update(s, 7.0);
    s = ts::ema_update(s, 3.0);
    EXPECT_EQ(s.value, 3.0);
}

TEST(Ema, ConstantInputIsFixedPoint) {
    auto s = ts::make_ema(0.0241);
    for (int t = 0; t < 1000; ++t) s = ts::ema_update(s, 42.5);
    EXPECT_NEAR(s.value, 42.5, 1e-12);
}

TEST(Ema, SeedsWithFirstObservation) {
    auto s = ts::make_ema(0.1);
    EXPECT_FALSE(s.initialized);
    s = ts::ema_update(s, -3.0);
    EXPECT_TRUE(s.initialized);
    EXPECT_EQ(s.value, -3.0);
}

TEST(Ema, RejectsNonFiniteInputAndBadWeight) {
    auto s = ts::make_ema(0.5);
    EXPECT_THROW(ts::ema_update(s, std::numeric_limits<double>::quiet_NaN()), InputError);
    EXPECT_THROW(ts::ema_update(s, std::numeric_limits<double>::infinity()), InputError);
    EXPECT_THROW(ts::make_ema(0.0), ConfigError);
    EXPECT_THROW(ts::make_ema(1.5), ConfigError);
}

TEST(Returns, SingleStep) {
    const std::vector<double> p{100.0, 101.0};
    const auto r = ts::arithmetic_returns(p);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_DOUBLE_EQ(r[0], 0.01);
}

TEST(Returns, ConstantPriceGivesZeros) {
    const auto r = ts::arithmetic_returns(std::vector<double>{100.0, 100.0, 100.0});
    EXPECT_EQ(r, (std::vector<double>{0.0, 0.0}));
}

TEST(Returns, GeometricGrowth) {
    std::vector<double> p;
    for (int t = 0; t < 5; ++t) p.push_back(100.0 * std::pow(1.02, t));
    const auto r = ts::arithmetic_returns(p);
    ASSERT_EQ(r.size(), 4u);
    for (double v : r) EXPECT_NEAR(v, 0.02, 1e-12);
}

TEST(Returns, RejectsNonPositiveAndShortInput) {
    EXPECT_THROW(ts::arithmetic_returns(std::vector<double>{100.0, 0.0}), DomainError);
    EXPECT_THROW(ts::arithmetic_returns(std::vector<double>{100.0, -1.0}), DomainError);
    EXPECT_THROW(ts::arithmetic_returns(std::vector<double>{100.0}), InputError);
}

TEST(Series, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(ts::Series::make({}), InputError);
    EXPECT_THROW(ts::Series::make({1.0, std::numeric_limits<double>::infinity()}), InputError);
    EXPECT_EQ(ts::Series::make({1.0, 2.0}, "x").size(), 2u);
}

TEST(RollingCorrelation, PerfectDependence) {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z;
    std::vector<double> x(50), y(50), n(50);
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = z(g);
        y[t] = 2.0 * x[t];
        n[t] = -x[t];
    }
    for (std::size_t window : {2u, 7u, 50u}) {
        const auto pos = ts::rolling_correlation(x, y, window);
        const auto neg = ts::rolling_correlation(x, n, window);
        ASSERT_EQ(pos.size(), x.size() - window + 1);
        for (std::size_t k = 0; k < pos.size(); ++k) {
            ASSERT_TRUE(pos[k] && neg[k]);
            EXPECT_NEAR(*pos[k], 1.0, 1e-12);
            EXPECT_NEAR(*neg[k], -1.0, 1e-12);
        }
    }
}

TEST(RollingCorrelation, IndependentGaussiansHaveTheoreticalDispersion) {
    std::mt19937_64 g(17);
    std::normal_distribution<double> z;
    const std::size_t window = 90;
    const std::size_t windows = 10000;
    std::vector<double> x(window + windows - 1), y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = z(g);
        y[t] = z(g);
    }
    const auto c = ts::rolling_correlation(x, y, window);
    const auto s = ts::summarize_defined(c);
    EXPECT_EQ(s.count, windows);
    EXPECT_NEAR(s.stddev, 1.0 / std::sqrt(90.0), 0.01);
}

TEST(RollingCorrelation, ZeroVarianceWindowIsUndefinedAndSkipped) {
    const std::vector<double> x{1, 1, 1, 2, 3};
    const std::vector<double> y{5, 4, 3, 2, 1};
    const auto c = ts::rolling_correlation(x, y, 3);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_FALSE(c[0].has_value());
    ASSERT_TRUE(c[2].has_value());
    EXPECT_NEAR(*c[2], -1.0, 1e-12);
    const auto s = ts::summarize_defined(c);
    EXPECT_EQ(s.skipped, 1u);
    EXPECT_EQ(s.count, 2u);
}

TEST(RollingCorrelation, RejectsBadShapes) {
    const std::vector<double> x{1, 2, 3};
    EXPECT_THROW(ts::rolling_correlation(x, x, 1), InputError);
    EXPECT_THROW(ts::rolling_correlation(x, x, 4), InputError);
    EXPECT_THROW(ts::rolling_correlation(x, std::vector<double>{1, 2}, 2), InputError);
}

TEST(WeightedMoments, ConstantSeries) {
    const std::vector<double> x(20, 3.25);
    const auto m = ts::exp_weighted_moments(x, x, 0.1);
    EXPECT_NEAR(m.mean_x, 3.25, 1e-15);
    EXPECT_NEAR(m.var_x, 0.0, 1e-28);
}

TEST(WeightedMoments, UnitVarianceNoise) {
    std::mt19937_64 g(5);
    std::normal_distribution<double> z;
    std::vector<double> x(10000);
    for (double& v : x) v = z(g);
    const auto m = ts::exp_weighted_moments(x, x, 1e-4);
    EXPECT_NEAR(m.var_x, 1.0, 0.05);
}

TEST(WeightedMoments, TwoPointsMatchHandWeights) {
    const std::vector<double> x{1.0, 4.0};
    const std::vector<double> y{2.0, -2.0};
    const auto m = ts::exp_weighted_moments(x, y, 0.5);
    // weights 0.5 and 1, normalized to 1/3 and 2/3
    EXPECT_NEAR(m.mean_x, 1.0 / 3 + 8.0 / 3, 1e-15);
    EXPECT_NEAR(m.mean_y, 2.0 / 3 - 4.0 / 3, 1e-15);
    EXPECT_NEAR(m.var_x, (1.0 / 3) * 4.0 + (2.0 / 3) * 1.0, 1e-14);
    EXPECT_NEAR(m.cov, (1.0 / 3) * (-2.0) * (8.0 / 3) + (2.0 / 3) * 1.0 * (-4.0 / 3), 1e-14);
}

TEST(WeightedMoments, MatchesExplicitWeightOracle) {
    std::mt19937_64 g(8);
    std::normal_distribution<double> z;
    std::vector<double> x(300), y(300);
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = z(g);
        y[t] = 0.5 * x[t] + z(g);
    }
    const double lambda = 1.0 / 90.0;
    const auto w = testkit::explicit_weights(x.size(), lambda);
    long double sw = 0, mx = 0, my = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sw += w[t];
        mx += w[t] * x[t];
        my += w[t] * y[t];
    }
    mx /= sw;
    my /= sw;
    long double vx = 0, c = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        vx += w[t] * (x[t] - mx) * (x[t] - mx);
        c += w[t] * (x[t] - mx) * (y[t] - my);
    }
    const auto m = ts::exp_weighted_moments(x, y, lambda);
    EXPECT_NEAR(m.mean_x, static_cast<double>(mx), 1e-13);
    EXPECT_NEAR(m.var_x, static_cast<double>(vx / sw), 1e-13);
    EXPECT_NEAR(m.cov, static_cast<double>(c / sw), 1e-13);
}

TEST(WeightedMoments, RejectsEmptyAndMismatched) {
    EXPECT_THROW(ts::exp_weighted_moments(std::vector<double>{}, std::vector<double>{}, 0.1),
                 InputError);
    EXPECT_THROW(ts::exp_weighted_moments(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, 0.1),
                 InputError);
    EXPECT_THROW(ts::exp_weights(3, 1.0), ConfigError);
}

}  // namespace
