#pragma once

// Measurement statistics: estimator error tables over simulated paths,
// hedge-quality statistics of a strategy against the index, the
// closed-form selection bias of low-beta sorting, the regression that
// calibrates ell - ell', and the beta-elasticity diagnostic.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rbeta::eval {

// ------------------------------------------------------- error tables ----

struct ErrorSample {
    double estimated = 0.0;
    double truth = 0.0;
    bool winner = false;  ///< stock beat the index over the trailing month
    bool low = false;     ///< true beta below 1

    double error() const noexcept { return estimated - truth; }
};

/// True when the stock's compounded return over the last `window` days
/// exceeds the index's. Uses the whole series when it is shorter.
bool winner_flag(std::span<const double> r_i, std::span<const double> r_I,
                 std::size_t window = 21);

struct BiasCell {
    std::optional<double> mean;  ///< nullopt for an empty subset
    double std_error = 0.0;      ///< standard error of the mean
    std::size_t count = 0;
    bool star = false;           ///< |mean| > 3 standard errors
};

struct StatRow {
    BiasCell bias;
    BiasCell winner;
    BiasCell loser;
    BiasCell low;
    BiasCell high;
    double absd = 0.0;
    double error_variance = 0.0;            ///< sample variance of the errors
    std::optional<double> variance_ratio;   ///< reference_variance / error_variance
    std::size_t n = 0;
};

BiasCell bias_cell(std::span<const double> errors);

/// Throws InputError for an empty sample. `reference_variance` is the
/// error variance of the reference estimator (OLS in the tables).
StatRow table2_stats(std::span<const ErrorSample> samples,
                     std::optional<double> reference_variance = std::nullopt);

// ------------------------------------------------- strategy hedging ----

struct StrategyBias {
    std::optional<double> bias;    ///< full-sample correlation with the index
    std::optional<double> corstd;  ///< std of the rolling correlation
    std::size_t windows = 0;
    std::size_t skipped_windows = 0;
};

StrategyBias strategy_bias_corstd(std::span<const double> strategy,
                                  std::span<const double> index, std::size_t window = 90);

// ----------------------------------------------------- selection bias ----

struct SelectionBiasInputs {
    double sigma_beta = 0.43;
    double vol_ratio = 1.53;  ///< <sigma_i> / sigma_I
    double lambda_beta = 1.0 / 90.0;
    double p = 0.3;
    double sigma_I = 0.1977;
    double factor_vol = 0.0346;
    /// When set, used instead of vol_ratio * sqrt(lambda_beta).
    std::optional<double> sigma_eta;

    void validate() const;
    double effective_sigma_eta() const;
};

struct SelectionBias {
    double q = 0.0;          ///< erf^-1(2p - 1)
    double sigma_eta = 0.0;
    double B = 0.0;          ///< expected beta underestimate in the bottom quantile
    double beta_low = 0.0;   ///< |beta of the low-volatility factor| = B / 2
    double rho_low = 0.0;    ///< beta_low * sigma_I / factor_vol
};

double erf_inv(double x);

/// B = s_eta / (p sqrt(2 pi)) / sqrt(1 + (s_beta/s_eta)^2)
///     * exp(-q^2 / (1 + (s_eta/s_beta)^2)).
double selection_bias_B(double sigma_beta, double sigma_eta, double p);

SelectionBias selection_bias(const SelectionBiasInputs& in);

// ------------------------------------------------ ell - ell' regression ----

/// (L_f - I) / L_f along an index price path, with L_f the fast EMA
/// seeded at the first price.
std::vector<double> leverage_factor_series(std::span<const double> index_prices,
                                           double lambda_f);

struct EllCalibration {
    double slope = 0.0;   ///< 2 (ell - ell')
    double stderr_slope = 0.0;
    double tstat = 0.0;
    double r2 = 0.0;
    double ell_diff = 0.0;
    double ell_diff_stderr = 0.0;
    double intercept = 0.0;
    std::size_t n = 0;
    double correlation_mean = 0.0;
};

/// OLS of daily changes of correlation / mean(correlation) on daily changes
/// of the leverage factor. Throws InputError below 30 observations and
/// DomainError when the leverage factor never moves.
EllCalibration calibrate_ell_diff(std::span<const double> correlation_index,
                                  std::span<const double> leverage_factor);

// ------------------------------------------------ elasticity diagnostic ----

struct SimpleRegression {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// OLS with intercept; nullopt when x has zero variance or n < 2.
std::optional<SimpleRegression> simple_regression(std::span<const double> x,
                                                  std::span<const double> y);

struct ElasticityBucket {
    double mean_beta = 0.0;
    double f = 0.0;  ///< local slope of demeaned beta on demeaned 2 ln(rel vol)
    std::size_t n = 0;
};

struct ElasticityDiagnostic {
    std::vector<ElasticityBucket> buckets;
    std::size_t skipped_buckets = 0;
    std::optional<SimpleRegression> global;  ///< demeaned beta on demeaned ln(rel vol)
};

/// Panels are per-stock series (outer index: stock). Beta and relative
/// volatility are demeaned per stock, pooled, sorted by beta and split
/// into consecutive buckets of bucket_size points (a trailing remainder
/// of at least half a bucket forms its own bucket).
ElasticityDiagnostic elasticity_diagnostic(const std::vector<std::vector<double>>& beta_panel,
                                           const std::vector<std::vector<double>>& relvol_panel,
                                           std::size_t bucket_size = 10000);

/// Pooled regression of d sigma_i / sigma_i on d sigma_I / sigma_I.
std::optional<SimpleRegression> vol_response_slope(
    const std::vector<std::vector<double>>& stock_vols, std::span<const double> index_vol);

}  // namespace rbeta::eval
