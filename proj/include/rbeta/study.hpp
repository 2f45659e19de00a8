#pragma once

// Estimator comparison over simulated paths: every estimator measures the
// beta at the last day of each path and is scored against the true
// conditional beta of that day.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbeta/estimators.hpp"
#include "rbeta/evaluation.hpp"
#include "rbeta/montecarlo.hpp"
#include "rbeta/reactive_volatility.hpp"

namespace rbeta::study {

enum class Estimator { OLS, MAD, TRM, DCC, ADCC, Reactive };

Estimator parse_estimator(std::string_view tag);
std::string estimator_name(Estimator e);
std::vector<Estimator> all_estimators();

struct StudyOptions {
    double lambda_beta = 1.0 / 90.0;
    vol::ReactiveParams reactive;
    est::CalibrationOptions calibration;
    std::size_t winner_window = 21;
    std::size_t workers = 0;
};

/// Beta measured by `e` at the end of a return path (index first, stock
/// second). Prices for the reactive estimator start at 100.
double measure_beta(Estimator e, std::span<const double> r_i, std::span<const double> r_I,
                    const StudyOptions& options);

/// Reactive beta at the last day of a return path.
double reactive_beta_at_end(std::span<const double> r_i, std::span<const double> r_I,
                            const vol::ReactiveParams& params);

struct EstimatorResult {
    Estimator estimator;
    std::vector<eval::ErrorSample> samples;
    eval::StatRow row;
};

struct StudyResult {
    mc::Model model;
    std::size_t n_paths = 0;
    std::size_t T = 0;
    std::size_t clamped_returns = 0;
    std::size_t dcc_not_converged = 0;
    std::optional<double> ols_error_variance;
    std::vector<EstimatorResult> results;

    const EstimatorResult& get(Estimator e) const;
};

/// Simulates config.n_paths paths and scores the requested estimators.
/// The OLS error variance is always computed and used as the reference of
/// the variance ratio.
StudyResult run_study(const mc::McConfig& config, std::span<const Estimator> estimators,
                      const StudyOptions& options = {});

}  // namespace rbeta::study
