#pragma once

// Beta-neutral long/short factors built per supersector: sort by an
// indicator known the day before, buy the top quantile and short the
// bottom quantile with inverse-volatility weights, then shrink the leg
// with the larger aggregate beta until the sector is beta neutral.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbeta/evaluation.hpp"
#include "rbeta/reactive_volatility.hpp"

namespace rbeta::strat {

enum class Strategy { LowVolatility, Reversal, Momentum, Size };
enum class BetaSource { OLS, Reactive };

Strategy parse_strategy(std::string_view tag);
std::string strategy_name(Strategy s);
BetaSource parse_beta_source(std::string_view tag);
std::string beta_source_name(BetaSource b);

/// Default quantile per strategy: 0.15 for reversal and momentum, 0.30
/// otherwise.
double default_quantile(Strategy s);

inline constexpr std::size_t kSectors = 6;

/// Daily panel of stocks and their index. prices[i][d] may be kMissing.
struct Universe {
    std::vector<std::string> dates;    ///< optional, one per day when present
    std::vector<std::string> tickers;
    std::vector<std::vector<double>> prices;  ///< [stock][day]
    std::vector<std::vector<double>> caps;    ///< [stock][day]; empty when unknown
    std::vector<int> sectors;                 ///< supersector per stock; empty = derive from caps
    std::vector<double> index;                ///< [day]

    std::size_t n_stocks() const noexcept { return tickers.size(); }
    std::size_t n_days() const noexcept { return index.size(); }
    void validate() const;
};

/// Sector labels 0..groups-1 from capitalization rank on `day` (largest
/// first), in groups of equal size. Stocks without a cap go last.
std::vector<int> partition_by_cap(const Universe& u, std::size_t day,
                                  std::size_t groups = kSectors);

struct FactorWeights {
    std::size_t day = 0;        ///< weights apply to the return from day-1 to day
    std::vector<double> w;      ///< per stock
    std::vector<double> beta;   ///< hedge beta per stock (0 when not eligible)
    std::vector<double> mu_plus;   ///< per sector (0 when skipped)
    std::vector<double> mu_minus;  ///< per sector (0 when skipped)
    std::vector<char> reduced_long;  ///< per sector: 1 when the long leg was shrunk
    double p = 0.0;
    std::size_t active_sectors = 0;
    std::size_t skipped_sectors = 0;

    bool valid() const noexcept { return active_sectors > 0; }
};

/// Per-stock inputs of one sector's factor, already restricted to the
/// eligible stocks.
struct SectorInput {
    std::vector<std::size_t> stocks;  ///< universe indices
    std::vector<double> indicator;    ///< buy leg = highest values
    std::vector<double> beta;
    std::vector<double> sigma;
};

struct SectorWeights {
    std::vector<double> w;  ///< aligned with SectorInput::stocks
    double mu_plus = 0.0;
    double mu_minus = 0.0;
    bool reduced_long = false;
};

/// Legs of k = max(1, round(p N)) stocks (at most N/2), weights
/// mu min(1, sigma_mean / sigma_i) and neutral multipliers: the leg with
/// the larger |aggregate beta| is shrunk, the other keeps 1/(2k). Ties
/// in the indicator are broken by `tie_keys` (ascending). nullopt when
/// N < 2 or the neutrality condition has no positive solution.
std::optional<SectorWeights> sector_factor(const SectorInput& in, double p,
                                           std::span<const std::string> tie_keys);

struct BacktestOptions {
    Strategy strategy = Strategy::LowVolatility;
    BetaSource beta_source = BetaSource::Reactive;
    std::optional<double> p;            ///< default_quantile(strategy) when unset
    bool long_high_beta = true;         ///< low-volatility orientation
    std::size_t burn_in = 250;
    std::size_t reversal_window = 21;
    std::size_t momentum_window = 504;
    std::size_t corr_window = 90;
    vol::ReactiveParams reactive;       ///< lambda_beta / lambda_sigma also drive the OLS side
};

struct BacktestResult {
    std::vector<std::size_t> days;       ///< days with a return
    std::vector<double> returns;         ///< factor return on those days
    std::vector<double> index_returns;   ///< index return on those days
    std::size_t skipped_days = 0;
    std::size_t missing_marks = 0;       ///< held positions whose price was missing
    eval::StrategyBias stats;
    std::vector<FactorWeights> weights;  ///< filled when keep_weights is true
};

/// Daily rebuild of the factor with information up to the previous day
/// and its return over the day.
BacktestResult backtest(const Universe& u, const BacktestOptions& options,
                        bool keep_weights = false);

// ------------------------------------------------- synthetic universe ----

struct SyntheticUniverseConfig {
    std::size_t n_stocks = 100;
    std::size_t n_days = 1500;
    std::uint64_t seed = 1;
    // Beta dispersion 0.43, mean stock vol about 1.53 index vols.
    double index_vol = 0.1977;
    double resid_vol_lo = 0.18;
    double resid_vol_hi = 0.30;
    double beta_lo = 0.255;
    double beta_hi = 1.745;
    double annualization = 255.0;
    vol::ReactiveParams reactive;
};

/// Stocks with reduced reactive dynamics (normalized returns mapped through
/// the slow levels) and heterogeneous normalized betas. Caps are price
/// times a random share count; sectors come from the cap ranking on day 0.
Universe synthetic_universe(const SyntheticUniverseConfig& config);

}  // namespace rbeta::strat
