#pragma once

// Reactive volatility model: slow/fast exponential levels of the index and
// of each stock, leverage-adjusted reactive levels L and L_i, the returns
// normalized by those levels, and the reactive volatilities obtained by
// scaling the normalized volatilities back with L / I and L_i / S_i.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rbeta/timeseries.hpp"

namespace rbeta::vol {

/// Fixed constants of the reactive model. Defaults are the published values.
struct ReactiveParams {
    double lambda_s = 0.0241;        ///< slow level (retarded effect, specific risk)
    double lambda_f = 0.1484;        ///< fast level (panic effect, systematic risk)
    double lambda_sigma = 0.025;     ///< normalized variance EMA
    double lambda_beta = 1.0 / 90.0; ///< regression look-back
    double ell = 8.0;                ///< systematic leverage of the index
    double ell_prime = 7.09;         ///< systematic leverage of single stocks
    double phi = 3.3;                ///< outlier filter strength
    double elasticity_lo = 0.5;
    double elasticity_hi = 1.6;
    double elasticity_slope = 0.6;    ///< slope of the middle regime
    double elasticity_plateau = 0.6;  ///< value above elasticity_hi
    /// Divide normalized returns by the lagged normalized index volatility
    /// before the regression. Switched off only in the OLS-limit preset.
    bool renormalize_by_index_vol = true;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Degenerate preset under which the reactive beta collapses to an
    /// exponentially weighted least-squares slope through the origin.
    static ReactiveParams ols_limit();
};

/// Outlier filter F_phi(z) = tanh(phi z) / phi, with F_0(z) = z.
double filter_phi(double z, double phi);

struct IndexLevelState {
    double slow = 0.0;   ///< L_s
    double fast = 0.0;   ///< L_f
    double level = 0.0;  ///< L
    double price = 0.0;  ///< last I
    bool initialized = false;

    /// Systematic leverage factor (L_f - I) / L_f.
    double leverage_gap() const noexcept { return (fast - price) / fast; }
    /// e_I = L_s / I - 1.
    double slow_gap() const noexcept { return slow / price - 1.0; }
};

struct StockLevelState {
    double slow = 0.0;   ///< L_is
    double level = 0.0;  ///< L_i
    double price = 0.0;  ///< last S_i
    bool initialized = false;

    /// e_i = L_is / S_i - 1.
    double slow_gap() const noexcept { return slow / price - 1.0; }
};

struct LevelState {
    IndexLevelState index;
    std::vector<StockLevelState> stocks;
    /// Per stock: true when the last update found its price missing and
    /// froze its state.
    std::vector<bool> frozen;
};

LevelState make_level_state(std::size_t n_stocks);

IndexLevelState update_index_levels(IndexLevelState state, double index_price,
                                    const ReactiveParams& params);

/// Advances a stock's levels. `index` must already hold the same day's
/// index update (the systematic term reads its fast level and price).
StockLevelState update_stock_levels(StockLevelState state, double stock_price,
                                    const IndexLevelState& index, const ReactiveParams& params);

/// Full daily level update. A missing stock price (kMissing) freezes that
/// stock for the day and flags it in `frozen`.
LevelState update_levels(LevelState state, double index_price, std::span<const double> stock_prices,
                         const ReactiveParams& params);

struct NormalizedReturns {
    double index = 0.0;           ///< dI / L(t-1)
    std::vector<double> stocks;   ///< dS_i / L_i(t-1), kMissing when unavailable
};

/// Normalized returns from the previous day's levels to the new prices.
/// Throws StateError when the levels were never seeded.
NormalizedReturns normalized_returns(const LevelState& state, double index_price,
                                     std::span<const double> stock_prices);

double normalized_return(const IndexLevelState& prev, double index_price);
double normalized_return(const StockLevelState& prev, double stock_price);

struct VolState {
    ts::EmaState index_var;                 ///< normalized index variance
    std::vector<ts::EmaState> stock_var;    ///< normalized stock variances
    double sigma_index = 0.0;               ///< reactive index volatility
    std::vector<double> sigma_stocks;       ///< reactive stock volatilities
};

VolState make_vol_state(std::size_t n_stocks, const ReactiveParams& params);

/// Advances the normalized variances with the day's normalized returns and
/// converts them to reactive volatilities using the (already updated)
/// levels. Stocks whose return is missing keep their previous state.
VolState update_reactive_vols(VolState vol, const LevelState& level, double index_return,
                              std::span<const double> stock_returns, const ReactiveParams& params);

inline double normalized_sigma(const ts::EmaState& var) {
    return var.initialized && var.value > 0.0 ? std::sqrt(var.value) : 0.0;
}

}  // namespace rbeta::vol
