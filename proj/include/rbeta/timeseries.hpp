#pragma once

// Streaming and batch primitives shared by every estimator: exponential
// moving averages, arithmetic returns, rolling Pearson correlation and
// exponentially weighted moments.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rbeta::ts {

/// A labeled daily series. Values are finite; position is the time index.
struct Series {
    std::vector<double> values;
    std::string label;

    /// Validates the invariants (non-empty, finite) and builds the series.
    static Series make(std::vector<double> values, std::string label = {});

    std::size_t size() const noexcept { return values.size(); }
    std::span<const double> view() const noexcept { return values; }
};

/// State of an exponential moving average `v <- (1 - lambda) v + lambda x`.
/// The first observation seeds the level.
struct EmaState {
    double lambda = 1.0;
    double value = 0.0;
    bool initialized = false;
};

EmaState make_ema(double lambda);
EmaState ema_update(EmaState state, double x);

std::vector<double> arithmetic_returns(std::span<const double> prices);

/// Pearson correlation of two equal-length samples; nullopt when either
/// side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Trailing-window Pearson correlation. Entry k covers positions
/// [k, k + window). Windows with a zero-variance side are nullopt.
std::vector<std::optional<double>> rolling_correlation(std::span<const double> x,
                                                       std::span<const double> y,
                                                       std::size_t window);

/// Mean / sample standard deviation over the defined entries of a series
/// that carries undefined markers.
struct DefinedSummary {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
    std::size_t skipped = 0;
};

DefinedSummary summarize_defined(std::span<const std::optional<double>> values);

struct WeightedMoments {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double cov = 0.0;
};

/// Moments with weights proportional to (1 - lambda)^(T - t), t = 1..T,
/// normalized to sum to one. Variances are the weighted population form.
WeightedMoments exp_weighted_moments(std::span<const double> x, std::span<const double> y,
                                     double lambda);

/// Normalized weights (1 - lambda)^(T - t) / sum, oldest first.
std::vector<double> exp_weights(std::size_t n, double lambda);

}  // namespace rbeta::ts
