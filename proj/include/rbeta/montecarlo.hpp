#pragma once

// Seven simulated markets of one stock against one index, each emitting
// returns together with the true conditional beta, correlation and
// volatilities. The true tracks at day t are the conditional values for
// the next day's returns given information up to t.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbeta/estimators.hpp"
#include "rbeta/reactive_volatility.hpp"

namespace rbeta::mc {

enum class Model { MC1 = 1, MC2, MC3, MC4, MC5, MC6, MC7 };

/// Parses "mc1".."mc7" (case-insensitive). Throws ConfigError otherwise.
Model parse_model(std::string_view tag);
std::string model_name(Model m);

/// Levels used to map normalized returns to raw returns in MC3 to MC5.
enum class LevelMapping {
    Reactive,  ///< full reactive levels L and L_i (outlier filter and panic term)
    Specific,  ///< specific leverage only: P (1 + F_phi((L_slow - P) / P))
    Slow,      ///< bare slow averages L_s and L_is
};

struct McConfig {
    Model model = Model::MC1;
    std::size_t T = 1000;
    std::size_t n_paths = 30000;
    std::uint64_t seed = 1;
    double stock_vol = 0.40;   ///< annualized stock volatility target (see stock_vol_is_residual)
    /// In MC1 to MC5 the stock target is the residual (idiosyncratic)
    /// volatility; when false it is the total stock volatility. MC6 and MC7
    /// always use it as the total unconditional stock volatility.
    bool stock_vol_is_residual = true;
    double index_vol = 0.15;   ///< annualized unconditional index volatility
    double beta = 1.0;         ///< unconditional (normalized) beta
    int t_dof = 3;
    double ou_relaxation = 100.0;
    double ou_volvol = 0.04;
    double annualization = 255.0;
    double initial_price = 100.0;
    double return_floor = -0.95;  ///< simulated raw returns are clamped from below
    /// Unset: bare slow levels for MC3 and MC4 (reduced model), full
    /// reactive levels for MC5.
    std::optional<LevelMapping> level_mapping;
    vol::ReactiveParams reactive;

    void validate() const;
    double daily_index_vol() const;
    /// Total daily stock volatility of the market-model construction.
    double daily_stock_vol() const;
    double daily_residual_vol() const;
    LevelMapping effective_level_mapping() const;
};

struct McPath {
    std::uint64_t path_id = 0;
    std::vector<double> r_I;
    std::vector<double> r_i;
    std::vector<double> true_beta;
    std::vector<double> true_rho;
    std::vector<double> true_sigma_I;
    std::vector<double> true_sigma_i;
    std::size_t clamped = 0;  ///< returns that hit return_floor

    std::size_t size() const noexcept { return r_I.size(); }
};

/// Generates path `path_id` of the configured model. Bit-identical for
/// identical (config, path_id).
McPath generate_path(const McConfig& config, std::uint64_t path_id);

/// Paths [first, first + count) generated on `workers` threads (0 = all
/// cores). Output is ordered by path id.
std::vector<McPath> generate(const McConfig& config, std::size_t first, std::size_t count,
                             std::size_t workers = 0);

/// Columnar dump: path_id,t,r_I,r_i,true_beta,true_rho,true_sigma_I,true_sigma_i.
void write_paths_csv(std::ostream& out, std::span<const McPath> paths);

}  // namespace rbeta::mc
