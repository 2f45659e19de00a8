#pragma once

// Subcommands shared by the command-line tool and the tests. Each writes
// report.json, data files and manifest.json into its output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rbeta/evaluation.hpp"
#include "rbeta/io.hpp"
#include "rbeta/montecarlo.hpp"
#include "rbeta/strategies.hpp"
#include "rbeta/study.hpp"

namespace rbeta::cmd {

/// Exit status of a failed command: 1 for input, configuration and domain
/// errors, 2 for numerical or state failures.
int exit_code_for(const std::exception& e);

struct CommandOutput {
    io::Json report;
    std::vector<std::filesystem::path> files;  ///< written data files, manifest last
};

struct EstimateOptions {
    io::UniverseFiles files;
    std::vector<study::Estimator> final_estimators;  ///< evaluated on the trailing window at the last date
    std::size_t window = 250;
};

/// Per-stock reactive and streaming OLS betas for every date after the
/// burn-in (betas.csv), plus the requested estimators at the last date
/// (final_betas.csv).
CommandOutput estimate(const io::RunConfig& config, const EstimateOptions& options,
                       const std::filesystem::path& out_dir);

struct SimulateOptions {
    std::vector<mc::Model> models;
    std::vector<study::Estimator> estimators;
    std::size_t workers = 0;
    bool dump_paths = false;
};

/// Estimator comparison table per model (table.csv) and per-path errors
/// (errors.csv).
CommandOutput simulate(const io::RunConfig& config, const SimulateOptions& options,
                       const std::filesystem::path& out_dir);

struct BacktestCommandOptions {
    std::optional<io::UniverseFiles> files;  ///< synthetic universe when unset
    strat::SyntheticUniverseConfig synthetic;
    std::vector<strat::Strategy> strategies;
    std::vector<strat::BetaSource> sources;
    bool export_weights = false;
};

/// Bias and CorSTD per strategy and beta source, daily factor returns and
/// optionally the daily weights (date, ticker, weight).
CommandOutput backtest(const io::RunConfig& config, const BacktestCommandOptions& options,
                       const std::filesystem::path& out_dir);

CommandOutput selection_bias(const eval::SelectionBiasInputs& inputs,
                             const std::filesystem::path& out_dir);

struct CalibrateEllOptions {
    std::filesystem::path series;  ///< wide CSV with the index and correlation columns
    std::string index_column = "INDEX";
    std::string correlation_column = "correlation";
};

/// Regression of relative correlation changes on leverage factor changes;
/// plot data in ell_fit.csv.
CommandOutput calibrate_ell(const io::RunConfig& config, const CalibrateEllOptions& options,
                            const std::filesystem::path& out_dir);

}  // namespace rbeta::cmd
