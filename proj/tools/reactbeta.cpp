#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rbeta/commands.hpp"
#include "rbeta/errors.hpp"
#include "rbeta/io.hpp"
#include "rbeta/version.hpp"

namespace {

using namespace rbeta;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> burn_in;
    std::string out = "out";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--burn-in", c.burn_in, "days skipped before results are emitted");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
}

io::RunConfig load_config(const Common& c) {
    io::RunConfig cfg = c.config.empty() ? io::RunConfig{} : io::read_config(c.config);
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.montecarlo.seed = *c.seed;
    }
    if (c.burn_in) {
        cfg.burn_in = *c.burn_in;
        cfg.backtest.burn_in = *c.burn_in;
    }
    cfg.validate();
    return cfg;
}

std::string path_or_config(const std::string& flag, const io::RunConfig& cfg,
                           const std::string& key) {
    if (!flag.empty()) {
        return flag;
    }
    const auto it = cfg.paths.find(key);
    return it == cfg.paths.end() ? std::string() : it->second;
}

std::optional<io::UniverseFiles> universe_files(const std::string& prices, const std::string& caps,
                                                const std::string& sectors,
                                                const std::string& index_column,
                                                const io::RunConfig& cfg) {
    const std::string p = path_or_config(prices, cfg, "prices");
    if (p.empty()) {
        return std::nullopt;
    }
    io::UniverseFiles f;
    f.prices = p;
    f.index_column = index_column.empty() ? cfg.index_column : index_column;
    const std::string c = path_or_config(caps, cfg, "caps");
    const std::string s = path_or_config(sectors, cfg, "sectors");
    if (!c.empty()) f.caps = c;
    if (!s.empty()) f.sectors = s;
    return f;
}

void print_report(const cmd::CommandOutput& out) {
    std::cout << out.report.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reactive beta estimation, simulation and backtesting"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // estimate
    Common est_c;
    std::string est_prices, est_caps, est_sectors, est_index;
    std::vector<std::string> est_estimators;
    std::size_t est_window = 250;
    auto* est = app.add_subcommand("estimate", "per-stock betas over time from a price file");
    add_common(est, est_c);
    est->add_option("--prices", est_prices, "price CSV (date, tickers..., index column)");
    est->add_option("--index-column", est_index, "name of the index column");
    est->add_option("--estimator", est_estimators,
                    "estimators evaluated at the last date: ols|mad|trm|dcc|adcc|reactive");
    est->add_option("--window", est_window, "trailing days for the last-date estimators")
        ->capture_default_str();

    // simulate
    Common sim_c;
    std::vector<std::string> sim_models{"mc1"};
    std::vector<std::string> sim_estimators;
    std::optional<std::size_t> sim_paths, sim_T;
    std::size_t sim_workers = 0;
    bool sim_dump = false;
    auto* sim = app.add_subcommand("simulate", "estimator comparison on simulated markets");
    add_common(sim, sim_c);
    sim->add_option("--model", sim_models, "mc1..mc7 (repeatable)")->capture_default_str();
    sim->add_option("--estimator", sim_estimators, "ols|mad|trm|dcc|adcc|reactive (repeatable)");
    sim->add_option("--paths", sim_paths, "number of simulated paths");
    sim->add_option("--days", sim_T, "path length");
    sim->add_option("--workers", sim_workers, "threads (0 = all cores)");
    sim->add_flag("--dump-paths", sim_dump, "write every simulated path");

    // backtest
    Common bt_c;
    std::string bt_prices, bt_caps, bt_sectors, bt_index;
    std::vector<std::string> bt_strategies, bt_sources;
    std::optional<double> bt_p;
    bool bt_weights = false;
    bool bt_long_low = false;
    std::size_t bt_stocks = 100, bt_days = 1500;
    auto* bt = app.add_subcommand("backtest", "beta-neutral factor backtests");
    add_common(bt, bt_c);
    bt->add_option("--prices", bt_prices, "price CSV; a synthetic universe is used when absent");
    bt->add_option("--caps", bt_caps, "capitalization CSV with the price layout");
    bt->add_option("--sectors", bt_sectors, "ticker,sector CSV");
    bt->add_option("--index-column", bt_index, "name of the index column");
    bt->add_option("--strategy", bt_strategies, "lowvol|reversal|momentum|size (repeatable)");
    bt->add_option("--beta-source", bt_sources, "ols|reactive (repeatable)");
    bt->add_option("--p", bt_p, "quantile per leg");
    bt->add_flag("--long-low-beta", bt_long_low, "buy the lowest betas in the low-volatility factor");
    bt->add_flag("--weights", bt_weights, "export daily weights");
    bt->add_option("--stocks", bt_stocks, "synthetic universe size")->capture_default_str();
    bt->add_option("--days", bt_days, "synthetic universe length")->capture_default_str();

    // selection-bias
    std::string sb_out = "out";
    eval::SelectionBiasInputs sb;
    std::optional<double> sb_eta;
    auto* sel = app.add_subcommand("selection-bias", "closed-form selection bias of low-beta sorting");
    sel->add_option("--sigma-beta", sb.sigma_beta)->capture_default_str();
    sel->add_option("--vol-ratio", sb.vol_ratio, "mean stock vol over index vol")->capture_default_str();
    sel->add_option("--lambda-beta", sb.lambda_beta)->capture_default_str();
    sel->add_option("--p", sb.p, "quantile")->capture_default_str();
    sel->add_option("--sigma-index", sb.sigma_I)->capture_default_str();
    sel->add_option("--factor-vol", sb.factor_vol)->capture_default_str();
    sel->add_option("--sigma-eta", sb_eta, "override the beta measurement noise");
    sel->add_option("--out", sb_out, "output directory")->capture_default_str();

    // calibrate-ell
    Common ce_c;
    cmd::CalibrateEllOptions ce;
    std::string ce_series;
    auto* cal = app.add_subcommand("calibrate-ell", "leverage regression of index correlation");
    add_common(cal, ce_c);
    cal->add_option("--series", ce_series, "CSV with date, index and correlation columns")->required();
    cal->add_option("--index-column", ce.index_column)->capture_default_str();
    cal->add_option("--correlation-column", ce.correlation_column)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*est) {
            auto cfg = load_config(est_c);
            cmd::EstimateOptions o;
            const auto files = universe_files(est_prices, "", "", est_index, cfg);
            if (!files) throw InputError("estimate needs --prices or [paths] prices");
            o.files = *files;
            for (const auto& e : est_estimators) o.final_estimators.push_back(study::parse_estimator(e));
            o.window = est_window;
            print_report(cmd::estimate(cfg, o, est_c.out));
        } else if (*sim) {
            auto cfg = load_config(sim_c);
            if (sim_paths) cfg.montecarlo.n_paths = *sim_paths;
            if (sim_T) cfg.montecarlo.T = *sim_T;
            cfg.validate();
            cmd::SimulateOptions o;
            for (const auto& m : sim_models) o.models.push_back(mc::parse_model(m));
            if (sim_estimators.empty()) {
                o.estimators = study::all_estimators();
            } else {
                for (const auto& e : sim_estimators) o.estimators.push_back(study::parse_estimator(e));
            }
            o.workers = sim_workers;
            o.dump_paths = sim_dump;
            print_report(cmd::simulate(cfg, o, sim_c.out));
        } else if (*bt) {
            auto cfg = load_config(bt_c);
            if (bt_p) cfg.backtest.p = *bt_p;
            if (bt_long_low) cfg.backtest.long_high_beta = false;
            cfg.validate();
            cmd::BacktestCommandOptions o;
            o.files = universe_files(bt_prices, bt_caps, bt_sectors, bt_index, cfg);
            o.synthetic.n_stocks = bt_stocks;
            o.synthetic.n_days = bt_days;
            for (const auto& s : bt_strategies) o.strategies.push_back(strat::parse_strategy(s));
            for (const auto& b : bt_sources) o.sources.push_back(strat::parse_beta_source(b));
            o.export_weights = bt_weights;
            print_report(cmd::backtest(cfg, o, bt_c.out));
        } else if (*sel) {
            sb.sigma_eta = sb_eta;
            print_report(cmd::selection_bias(sb, sb_out));
        } else if (*cal) {
            auto cfg = load_config(ce_c);
            ce.series = ce_series;
            print_report(cmd::calibrate_ell(cfg, ce, ce_c.out));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cmd::exit_code_for(e);
    }
    return 0;
}
