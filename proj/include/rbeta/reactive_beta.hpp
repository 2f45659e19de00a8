#pragma once

// Reactive beta: renormalized exponential regressions of stock on index
// returns, denormalized by the level ratio (L_i I) / (S_i L) and the two
// correction factors for systematic leverage and beta elasticity.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rbeta/reactive_volatility.hpp"
#include "rbeta/timeseries.hpp"

namespace rbeta::beta {

using vol::ReactiveParams;

/// Piecewise-linear beta elasticity: 0 below elasticity_lo, linear with
/// elasticity_slope up to elasticity_hi, elasticity_plateau above.
double elasticity_f(double tilde_beta, const ReactiveParams& params);

/// Systematic leverage correction 1 + (ell - ell') (L_f - I) / L_f,
/// evaluated on the previous day's index levels.
double correction_L(const vol::IndexLevelState& prev_index, const ReactiveParams& params);

/// Elasticity correction 1 + 2 f(b) / b * Delta with
/// Delta = (rel_vol - sqrt(kappa)) / sqrt(kappa). Returns 1 when f(b) = 0.
double correction_F(double tilde_beta, double rel_vol_prev, double kappa_prev,
                    const ReactiveParams& params);

struct BetaState {
    // Regression accumulators start at zero, so Phi / sigma_I^2 is an
    // exactly weighted regression from the first update on.
    double hat_phi = 0.0;
    double hat_Phi = 0.0;
    double hat_sigma_I_sq = 0.0;
    double hat_sigma_i_sq = 0.0;
    ts::EmaState kappa;  ///< squared relative normalized volatility, seeded on first value
    std::optional<double> tilde_beta;
    std::optional<double> beta;
    double last_L = 1.0;
    double last_F = 1.0;
    std::size_t updates = 0;
};

BetaState make_beta_state(const ReactiveParams& params);

/// Inputs of one daily update for one stock.
struct BetaStepInput {
    const vol::IndexLevelState* index_prev = nullptr;  ///< index levels at t-1
    const vol::IndexLevelState* index_now = nullptr;   ///< index levels at t
    const vol::StockLevelState* stock_now = nullptr;   ///< stock levels at t
    double tilde_sigma_I_prev = 0.0;
    double tilde_sigma_i_prev = 0.0;
    double tilde_sigma_I_now = 0.0;
    double tilde_sigma_i_now = 0.0;
    double tilde_r_I = 0.0;
    double tilde_r_i = 0.0;
};

/// One step of the reactive beta recursion. Before the lagged index
/// volatility is positive (and renormalization is on) only kappa advances.
BetaState update_beta(BetaState state, const BetaStepInput& in, const ReactiveParams& params);

/// Streaming engine over an index and a panel of stocks. Feed one day of
/// prices per call; missing stock prices (kMissing) freeze that stock, and
/// the first day after a gap re-anchors its levels without a regression
/// update so multi-day returns never enter the one-day regression.
class ReactiveBetaEngine {
public:
    ReactiveBetaEngine(std::size_t n_stocks, ReactiveParams params = {});

    void step(double index_price, std::span<const double> stock_prices);

    std::size_t n_stocks() const noexcept { return betas_.size(); }
    std::size_t days() const noexcept { return days_; }
    const ReactiveParams& params() const noexcept { return params_; }
    const vol::LevelState& levels() const noexcept { return levels_; }
    const vol::VolState& vols() const noexcept { return vols_; }
    const BetaState& state(std::size_t i) const { return betas_.at(i); }

    std::optional<double> beta(std::size_t i) const { return betas_.at(i).beta; }
    /// Reactive stock volatility; nullopt before the first return.
    std::optional<double> sigma(std::size_t i) const;
    std::optional<double> sigma_index() const;

private:
    ReactiveParams params_;
    vol::LevelState levels_;
    vol::VolState vols_;
    std::vector<BetaState> betas_;
    std::size_t days_ = 0;
};

}  // namespace rbeta::beta
