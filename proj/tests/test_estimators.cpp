#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rbeta/errors.hpp"
#include "rbeta/estimators.hpp"
#include "rbeta/montecarlo.hpp"
#include "rbeta/study.hpp"

namespace {

using namespace rbeta;
using est::WeightedRegressionProblem;

WeightedRegressionProblem gaussian_problem(std::size_t n, double slope, std::uint64_t seed,
                                           double noise = 1.0) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z;
    WeightedRegressionProblem p;
    p.lambda = 1.0 / 90.0;
    for (std::size_t t = 0; t < n; ++t) {
        p.x.push_back(z(g));
        p.y.push_back(slope * p.x.back() + noise * z(g));
    }
    return p;
}

// ------------------------------------------------------------------ OLS ----

TEST(Ols, ExactLine) {
    WeightedRegressionProblem p;
    p.x = {0.01, -0.02, 0.005, 0.03};
    for (double x : p.x) p.y.push_back(2.0 * x);
    EXPECT_NEAR(*est::ols_beta(p), 2.0, 1e-14);
}

TEST(Ols, ConstantResponse) {
    WeightedRegressionProblem p;
    p.x = {0.01, -0.02, 0.005, 0.03};
    p.y.assign(4, 0.7);
    EXPECT_NEAR(*est::ols_beta(p), 0.0, 1e-14);
}

TEST(Ols, MatchesNormalEquations) {
    for (bool intercept : {true, false}) {
        auto p = gaussian_problem(1000, 0.8, 12);
        p.intercept = intercept;
        const auto ref = testkit::ols_normal_equations(p.x, p.y, p.lambda, intercept);
        ASSERT_TRUE(ref);
        EXPECT_NEAR(*est::ols_beta(p), ref->beta, 1e-10);
    }
}

TEST(Ols, ZeroVarianceIsUndefined) {
    WeightedRegressionProblem p;
    p.x.assign(5, 0.01);
    p.y = {1, 2, 3, 4, 5};
    EXPECT_FALSE(est::ols_beta(p).has_value());
}

TEST(Ols, ValidatesProblem) {
    WeightedRegressionProblem p;
    p.x = {1.0};
    p.y = {1.0};
    EXPECT_THROW(est::ols_beta(p), InputError);
    p.x = {1.0, 2.0};
    p.y = {1.0};
    EXPECT_THROW(est::ols_beta(p), InputError);
    p.y = {1.0, 2.0};
    p.lambda = 0.0;
    EXPECT_THROW(est::ols_beta(p), ConfigError);
}

TEST(Ols, StreamingCovarianceMatchesBatch) {
    const auto p = gaussian_problem(500, 1.3, 4);
    est::ExpWeightedCovariance c(p.lambda);
    for (std::size_t t = 0; t < p.x.size(); ++t) c.update(p.x[t], p.y[t]);
    EXPECT_NEAR(*c.beta(), *est::ols_beta(p), 1e-12);
    const auto m = ts::exp_weighted_moments(p.x, p.y, p.lambda);
    EXPECT_NEAR(c.var_y(), m.var_y, 1e-12);
}

// ------------------------------------------------------------- quantile ----

TEST(Quantile, ExactLineAnyLevel) {
    WeightedRegressionProblem p;
    p.x = {-2, -1, 0.5, 1, 3, 4};
    for (double x : p.x) p.y.push_back(3.0 * x);
    for (double theta : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const auto f = est::quantile_beta(p, theta);
        ASSERT_TRUE(f);
        EXPECT_NEAR(f->beta, 3.0, 1e-8);
        EXPECT_NEAR(f->alpha, 0.0, 1e-8);
    }
    EXPECT_NEAR(*est::mad_beta(p), 3.0, 1e-8);
    EXPECT_NEAR(*est::trimean_beta(p), 3.0, 1e-8);
}

TEST(Quantile, MedianIgnoresSymmetricOutliers) {
    WeightedRegressionProblem p;
    p.lambda = 1e-6;
    for (int k = -10; k <= 10; ++k) {
        p.x.push_back(k);
        p.y.push_back(k);
    }
    for (double x : {-3.0, 2.0, 5.0}) {
        p.x.push_back(x);
        p.y.push_back(x + 40.0);
        p.x.push_back(x);
        p.y.push_back(x - 40.0);
    }
    EXPECT_NEAR(*est::mad_beta(p), 1.0, 1e-8);
}

TEST(Quantile, SevenPointsMatchPairsOracle) {
    std::mt19937_64 g(7);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 200; ++rep) {
        WeightedRegressionProblem p;
        p.lambda = 0.2;
        for (int k = 0; k < 7; ++k) {
            p.x.push_back(z(g));
            p.y.push_back(0.5 * p.x.back() + z(g));
        }
        for (double theta : {0.25, 0.5, 0.75}) {
            const auto f = est::quantile_beta(p, theta);
            const auto ref = testkit::quantile_pairs(p.x, p.y, p.lambda, theta);
            ASSERT_TRUE(f && ref);
            const double obj = testkit::check_loss(p.x, p.y, p.lambda, theta, f->alpha, f->beta);
            EXPECT_LE(obj, ref->objective + 1e-8 * (1 + ref->objective));
        }
    }
}

TEST(Quantile, AllEqualRegressorIsUndefined) {
    WeightedRegressionProblem p;
    p.x.assign(6, 1.0);
    p.y = {1, 2, 3, 4, 5, 6};
    EXPECT_FALSE(est::quantile_beta(p, 0.5).has_value());
    EXPECT_FALSE(est::trimean_beta(p).has_value());
}

TEST(Quantile, RejectsLevelOutsideUnitInterval) {
    const auto p = gaussian_problem(10, 1.0, 1);
    EXPECT_THROW(est::quantile_beta(p, 0.0), ConfigError);
    EXPECT_THROW(est::quantile_beta(p, 1.0), ConfigError);
}

TEST(Trimean, CombinesQuartileSlopes) { EXPECT_DOUBLE_EQ(est::trimean_combine(1, 2, 3), 2.0); }

TEST(Trimean, AgreesWithOlsUnderGaussianResiduals) {
    auto p = gaussian_problem(1000, 1.2, 31, 0.5);
    p.lambda = 1e-4;
    EXPECT_NEAR(*est::trimean_beta(p), *est::ols_beta(p), 0.05);
}

// ------------------------------------------------------------------ DCC ----

est::DccModel model_from(const est::DccCoefficients& c, double si, double sI, double rho) {
    return c.with_unconditionals(si, sI, rho);
}

TEST(Dcc, PublishedCoefficients) {
    const auto d = est::DccCoefficients::published_dcc();
    EXPECT_EQ(d.a, 0.099);
    EXPECT_EQ(d.b, 0.89);
    EXPECT_EQ(d.a_rho, 0.0079);
    EXPECT_EQ(d.b_rho, 0.9261);
    const auto a = est::DccCoefficients::published_adcc();
    EXPECT_EQ(a.b, 0.901);
    EXPECT_EQ(a.gamma, 0.171);
    EXPECT_EQ(a.a_rho, 0.0020);
    EXPECT_EQ(a.b_rho, 0.9512);
    EXPECT_EQ(a.gamma_rho, 0.0040);
}

TEST(Dcc, VarianceWithoutShocksConvergesToUnconditional) {
    est::DccCoefficients c;
    c.b = 0.9;
    auto m = model_from(c, 0.02, 0.01, 0.3);
    auto s = est::dcc_init(m);
    s.sigma_i = 0.2;
    s.sigma_I = 0.001;
    for (int t = 0; t < 500; ++t) s = est::dcc_step(s, 0.0, 0.0, m);
    EXPECT_NEAR(s.sigma_i, 0.02, 1e-12);
    EXPECT_NEAR(s.sigma_I, 0.01, 1e-12);
}

TEST(Dcc, CorrelationStaysAtUnconditionalWithoutInnovationTerms) {
    est::DccCoefficients c = est::DccCoefficients::published_dcc();
    c.a_rho = 0.0;
    c.gamma_rho = 0.0;
    const auto m = model_from(c, 0.025, 0.01, 0.375);
    auto s = est::dcc_init(m);
    std::mt19937_64 g(2);
    std::normal_distribution<double> z;
    for (int t = 0; t < 300; ++t) {
        s = est::dcc_step(s, 0.025 * z(g), 0.01 * z(g), m);
        ASSERT_NEAR(s.rho, 0.375, 1e-12);
    }
}

TEST(Dcc, MatchesScalarReimplementation) {
    std::mt19937_64 g(44);
    std::normal_distribution<double> z;
    for (int variant = 0; variant < 3; ++variant) {
        const auto c = variant == 0 ? est::DccCoefficients::published_dcc()
                                    : est::DccCoefficients::published_adcc();
        auto m = model_from(c, 0.4 / std::sqrt(255.0), 0.15 / std::sqrt(255.0), 0.375);
        m.asymmetry = variant == 2 ? est::Asymmetry::PositiveShocks : est::Asymmetry::NegativeShocks;
        testkit::ScalarDcc o{c.a, c.b, c.gamma, c.a_rho, c.b_rho, c.gamma_rho,
                             m.stock.unconditional_sigma, m.index.unconditional_sigma, 0.375,
                             variant != 2};
        o.reset();
        auto s = est::dcc_init(m);
        for (int t = 0; t < 10; ++t) {
            const double ri = 0.03 * z(g);
            const double rI = 0.012 * z(g);
            s = est::dcc_step(s, ri, rI, m);
            o.step(ri, rI);
            EXPECT_NEAR(s.sigma_i, std::sqrt(o.h_i), 1e-12);
            EXPECT_NEAR(s.sigma_I, std::sqrt(o.h_I), 1e-12);
            EXPECT_NEAR(s.q_iI, o.qiI, 1e-12);
            EXPECT_NEAR(s.rho, o.rho, 1e-12);
            EXPECT_NEAR(s.beta, o.beta(), 1e-12);
        }
    }
}

TEST(Dcc, AsymmetricPartFollowsConvention) {
    EXPECT_EQ(est::asymmetric_part(-1.5, est::Asymmetry::NegativeShocks), -1.5);
    EXPECT_EQ(est::asymmetric_part(1.5, est::Asymmetry::NegativeShocks), 0.0);
    EXPECT_EQ(est::asymmetric_part(1.5, est::Asymmetry::PositiveShocks), 1.5);
    EXPECT_EQ(est::asymmetric_part(-1.5, est::Asymmetry::PositiveShocks), 0.0);
}

TEST(Dcc, RejectsNonStationaryParameters) {
    est::GarchParams g{0.2, 0.85, 0.0, 0.01};
    EXPECT_THROW(g.validate(), ConfigError);
    est::DccParams d{0.05, 0.9, 0.3, 0.2};
    EXPECT_THROW(d.validate(), ConfigError);
    d = {0.01, 0.9, 0.0, 1.0};
    EXPECT_THROW(d.validate(), ConfigError);
}

std::vector<mc::McPath> dcc_paths(std::size_t n, std::size_t T) {
    mc::McConfig c;
    c.model = mc::Model::MC6;
    c.T = T;
    c.seed = 77;
    c.n_paths = n;
    return mc::generate(c, 0, n, 0);
}

TEST(DccCalibration, RecoversGeneratingUnconditionals) {
    const auto paths = dcc_paths(500, 1000);
    const auto coeffs = est::DccCoefficients::published_dcc();
    std::vector<double> si, sI, rho;
    for (const auto& p : paths) {
        const auto r = est::dcc_calibrate(p.r_i, p.r_I, coeffs, 1e-6);
        si.push_back(r.sigma_bar_i);
        sI.push_back(r.sigma_bar_I);
        rho.push_back(r.rho_bar);
    }
    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    EXPECT_NEAR(median(si) / (0.4 / std::sqrt(255.0)), 1.0, 0.10);
    EXPECT_NEAR(median(sI) / (0.15 / std::sqrt(255.0)), 1.0, 0.10);
    EXPECT_NEAR(median(rho) / 0.375, 1.0, 0.10);
}

TEST(DccCalibration, ConstantVolatilityMatchesWeightedStd) {
    std::mt19937_64 g(5);
    std::normal_distribution<double> z;
    std::vector<double> ri(2000), rI(2000);
    for (std::size_t t = 0; t < ri.size(); ++t) {
        rI[t] = 0.01 * z(g);
        ri[t] = 0.5 * rI[t] + 0.02 * z(g);
    }
    const double lambda = 1.0 / 90.0;
    const auto r = est::dcc_calibrate(ri, rI, est::DccCoefficients{}, lambda);
    const auto m = ts::exp_weighted_moments(ri, rI, lambda);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.sigma_bar_i / std::sqrt(m.var_x), 1.0, 0.02);
    EXPECT_NEAR(r.sigma_bar_I / std::sqrt(m.var_y), 1.0, 0.02);
}

TEST(DccCalibration, GeneratingParametersBeatPerturbedOnes) {
    const auto paths = dcc_paths(100, 1000);
    const auto coeffs = est::DccCoefficients::published_dcc();
    const double si = 0.4 / std::sqrt(255.0);
    const double sI = 0.15 / std::sqrt(255.0);
    for (double f : {0.8, 1.2}) {
        double truth = 0.0;
        double perturbed = 0.0;
        for (const auto& p : paths) {
            truth += est::dcc_loglik(p.r_i, p.r_I, coeffs.with_unconditionals(si, sI, 0.375), 1e-6);
            perturbed += est::dcc_loglik(p.r_i, p.r_I, coeffs.with_unconditionals(si * f, sI * f, 0.375 * f), 1e-6);
        }
        EXPECT_GT(truth, perturbed) << "perturbation " << f;
    }
}

TEST(DccCalibration, ShortSeriesRejected) {
    const std::vector<double> r(50, 0.01);
    EXPECT_THROW(est::dcc_calibrate(r, r, est::DccCoefficients::published_dcc(), 0.01), InputError);
}

TEST(DccBeta, StockEqualToIndexHasUnitBeta) {
    std::mt19937_64 g(6);
    std::normal_distribution<double> z;
    std::vector<double> r(500);
    for (double& v : r) v = 0.01 * z(g);
    const auto res = est::dcc_beta(r, r, est::DccCoefficients::published_dcc(), 1.0 / 90.0);
    // rho = 1 is clamped, sigma_i = sigma_I
    EXPECT_NEAR(res.beta, est::kRhoClamp, 1e-12);
}

// Sampling tolerance: three standard errors around the published range.
void expect_in_range(const eval::BiasCell& c, double lo, double hi) {
    ASSERT_TRUE(c.mean);
    EXPECT_GE(*c.mean, lo - 3 * c.std_error);
    EXPECT_LE(*c.mean, hi + 3 * c.std_error);
}

TEST(DccBeta, SymmetricModelOnMc6Paths) {
    mc::McConfig c;
    c.model = mc::Model::MC6;
    c.n_paths = 400;
    c.seed = 3;
    const std::vector<study::Estimator> es{study::Estimator::DCC};
    const auto r = study::run_study(c, es);
    const auto& row = r.get(study::Estimator::DCC).row;
    expect_in_range(row.bias, -0.01, 0.04);
    EXPECT_NEAR(row.absd, 0.16, 0.03);
}

TEST(DccBeta, AsymmetricModelOnMc7Paths) {
    mc::McConfig c;
    c.model = mc::Model::MC7;
    c.n_paths = 400;
    c.seed = 3;
    const std::vector<study::Estimator> es{study::Estimator::ADCC};
    const auto r = study::run_study(c, es);
    const auto& row = r.get(study::Estimator::ADCC).row;
    expect_in_range(row.bias, -0.01, -0.01);
    EXPECT_NEAR(row.absd, 0.15, 0.03);
}

}  // namespace
