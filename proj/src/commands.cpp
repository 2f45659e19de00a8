#include "rbeta/commands.hpp"

#include <cmath>
#include <sstream>

#include "rbeta/errors.hpp"
#include "rbeta/estimators.hpp"
#include "rbeta/reactive_beta.hpp"

namespace rbeta::cmd {

namespace fs = std::filesystem;
using io::CsvWriter;
using io::Json;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const StateError*>(&e)) {
        return 2;
    }
    return 1;
}

namespace {

Json optional_json(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json cell_json(const eval::BiasCell& c) {
    return {{"mean", optional_json(c.mean)},
            {"std_error", c.std_error},
            {"count", c.count},
            {"star", c.star}};
}

Json row_json(const eval::StatRow& r) {
    return {{"bias", cell_json(r.bias)},
            {"winner", cell_json(r.winner)},
            {"loser", cell_json(r.loser)},
            {"low", cell_json(r.low)},
            {"high", cell_json(r.high)},
            {"absd", r.absd},
            {"error_variance", r.error_variance},
            {"variance_ratio", optional_json(r.variance_ratio)},
            {"n", r.n}};
}

std::string cell_text(const eval::BiasCell& c) {
    return c.mean ? CsvWriter::num(*c.mean) : std::string();
}

/// Writes report.json and manifest.json and lists them after `files`.
CommandOutput finish(const std::string& command, const io::RunConfig& config, Json report,
                     std::vector<fs::path> inputs, std::vector<fs::path> files,
                     const fs::path& out_dir) {
    const fs::path report_path = out_dir / "report.json";
    io::write_json(report_path, report);
    files.push_back(report_path);
    io::Manifest m;
    m.command = command;
    m.seed = config.seed;
    m.config = config.to_json();
    m.inputs = std::move(inputs);
    m.outputs = files;
    const fs::path manifest_path = out_dir / "manifest.json";
    io::write_json(manifest_path, m.to_json());
    files.push_back(manifest_path);
    return {std::move(report), std::move(files)};
}

std::vector<fs::path> universe_inputs(const io::UniverseFiles& f) {
    std::vector<fs::path> in{f.prices};
    if (f.caps) in.push_back(*f.caps);
    if (f.sectors) in.push_back(*f.sectors);
    return in;
}

}  // namespace

// ----------------------------------------------------------- estimate ----

CommandOutput estimate(const io::RunConfig& config, const EstimateOptions& o,
                       const fs::path& out_dir) {
    config.validate();
    const strat::Universe u = io::load_universe(o.files);
    const std::size_t n = u.n_stocks();
    const std::size_t days = u.n_days();

    beta::ReactiveBetaEngine engine(n, config.reactive);
    std::vector<est::ExpWeightedCovariance> ols(n, est::ExpWeightedCovariance(config.reactive.lambda_beta));
    CsvWriter betas({"date", "ticker", "reactive_beta", "reactive_sigma", "ols_beta"});
    std::vector<double> column(n);
    for (std::size_t d = 0; d < days; ++d) {
        for (std::size_t i = 0; i < n; ++i) column[i] = u.prices[i][d];
        engine.step(u.index[d], column);
        if (d > 0) {
            const double rI = u.index[d] / u.index[d - 1] - 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = u.prices[i][d - 1];
                const double b = u.prices[i][d];
                if (!is_missing(a) && !is_missing(b)) ols[i].update(rI, b / a - 1.0);
            }
        }
        if (d < config.burn_in) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const auto rb = engine.beta(i);
            const auto rs = engine.sigma(i);
            const auto ob = ols[i].beta();
            betas.row({u.dates[d], u.tickers[i], rb ? CsvWriter::num(*rb) : "",
                       rs ? CsvWriter::num(*rs) : "", ob ? CsvWriter::num(*ob) : ""});
        }
    }
    std::vector<fs::path> files;
    betas.save(out_dir / "betas.csv");
    files.push_back(out_dir / "betas.csv");

    Json final_json = Json::array();
    if (!o.final_estimators.empty()) {
        std::vector<std::string> header{"ticker"};
        for (auto e : o.final_estimators) header.push_back(study::estimator_name(e));
        CsvWriter fin(header);
        study::StudyOptions so;
        so.lambda_beta = config.reactive.lambda_beta;
        so.reactive = config.reactive;
        const std::size_t first = days > o.window ? days - o.window : 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> ri;
            std::vector<double> rI;
            for (std::size_t d = first + 1; d < days; ++d) {
                const double a = u.prices[i][d - 1];
                const double b = u.prices[i][d];
                if (is_missing(a) || is_missing(b)) continue;
                ri.push_back(b / a - 1.0);
                rI.push_back(u.index[d] / u.index[d - 1] - 1.0);
            }
            std::vector<std::string> cells{u.tickers[i]};
            Json entry = {{"ticker", u.tickers[i]}, {"returns", ri.size()}};
            for (auto e : o.final_estimators) {
                std::optional<double> value;
                if (e == study::Estimator::Reactive) {
                    value = engine.beta(i);
                } else if (ri.size() >= 2) {
                    try {
                        value = study::measure_beta(e, ri, rI, so);
                    } catch (const std::exception&) {
                        value.reset();
                    }
                }
                cells.push_back(value ? CsvWriter::num(*value) : "");
                entry[study::estimator_name(e)] = optional_json(value);
            }
            fin.row(cells);
            final_json.push_back(entry);
        }
        fin.save(out_dir / "final_betas.csv");
        files.push_back(out_dir / "final_betas.csv");
    }

    Json report = {{"command", "estimate"},
                   {"stocks", n},
                   {"dates", days},
                   {"burn_in", config.burn_in},
                   {"rows", betas.rows()},
                   {"final_window", o.window},
                   {"final", final_json}};
    return finish("estimate", config, std::move(report), universe_inputs(o.files),
                  std::move(files), out_dir);
}

// ----------------------------------------------------------- simulate ----

CommandOutput simulate(const io::RunConfig& config, const SimulateOptions& o,
                       const fs::path& out_dir) {
    config.validate();
    if (o.models.empty() || o.estimators.empty()) {
        throw ConfigError("simulate needs at least one model and one estimator");
    }
    study::StudyOptions so;
    so.lambda_beta = config.reactive.lambda_beta;
    so.reactive = config.reactive;
    so.workers = o.workers;

    CsvWriter table({"model", "estimator", "bias", "bias_star", "winner", "winner_star", "loser",
                     "loser_star", "low", "low_star", "high", "high_star", "absd",
                     "variance_ratio", "n"});
    CsvWriter errors({"model", "estimator", "path", "estimated", "truth", "winner", "low"});
    Json models = Json::array();
    std::vector<fs::path> files;
    for (auto model : o.models) {
        mc::McConfig mcc = config.montecarlo;
        mcc.model = model;
        mcc.seed = config.seed;
        mcc.reactive = config.reactive;
        const auto res = study::run_study(mcc, o.estimators, so);
        Json rows = Json::object();
        for (const auto& er : res.results) {
            const auto& r = er.row;
            const std::string name = study::estimator_name(er.estimator);
            rows[name] = row_json(r);
            auto star = [](const eval::BiasCell& c) { return std::string(c.star ? "1" : "0"); };
            table.row({mc::model_name(model), name, cell_text(r.bias), star(r.bias),
                       cell_text(r.winner), star(r.winner), cell_text(r.loser), star(r.loser),
                       cell_text(r.low), star(r.low), cell_text(r.high), star(r.high),
                       CsvWriter::num(r.absd),
                       r.variance_ratio ? CsvWriter::num(*r.variance_ratio) : "",
                       std::to_string(r.n)});
            for (std::size_t k = 0; k < er.samples.size(); ++k) {
                const auto& s = er.samples[k];
                errors.row({mc::model_name(model), name, std::to_string(k),
                            CsvWriter::num(s.estimated), CsvWriter::num(s.truth),
                            s.winner ? "1" : "0", s.low ? "1" : "0"});
            }
        }
        models.push_back({{"model", mc::model_name(model)},
                          {"n_paths", res.n_paths},
                          {"T", res.T},
                          {"clamped_returns", res.clamped_returns},
                          {"dcc_not_converged", res.dcc_not_converged},
                          {"estimators", rows}});
        if (o.dump_paths) {
            const auto paths = mc::generate(mcc, 0, mcc.n_paths, o.workers);
            std::ostringstream buf;
            mc::write_paths_csv(buf, paths);
            const fs::path p = out_dir / ("paths_" + mc::model_name(model) + ".csv");
            io::write_text(p, buf.str());
            files.push_back(p);
        }
    }
    table.save(out_dir / "table.csv");
    errors.save(out_dir / "errors.csv");
    files.push_back(out_dir / "table.csv");
    files.push_back(out_dir / "errors.csv");
    Json report = {{"command", "simulate"}, {"seed", config.seed}, {"models", models}};
    return finish("simulate", config, std::move(report), {}, std::move(files), out_dir);
}

// ----------------------------------------------------------- backtest ----

CommandOutput backtest(const io::RunConfig& config, const BacktestCommandOptions& o,
                       const fs::path& out_dir) {
    config.validate();
    strat::Universe u;
    std::vector<fs::path> inputs;
    Json source;
    if (o.files) {
        u = io::load_universe(*o.files);
        inputs = universe_inputs(*o.files);
        source = {{"type", "file"}, {"prices", o.files->prices.string()}};
    } else {
        auto syn = o.synthetic;
        syn.seed = config.seed;
        syn.reactive = config.reactive;
        u = strat::synthetic_universe(syn);
        source = {{"type", "synthetic"}, {"stocks", syn.n_stocks}, {"days", syn.n_days},
                  {"seed", syn.seed}};
    }
    auto strategies = o.strategies;
    if (strategies.empty()) {
        strategies = {strat::Strategy::LowVolatility, strat::Strategy::Reversal,
                      strat::Strategy::Momentum, strat::Strategy::Size};
    }
    auto sources = o.sources;
    if (sources.empty()) {
        sources = {strat::BetaSource::OLS, strat::BetaSource::Reactive};
    }

    Json results = Json::array();
    std::vector<fs::path> files;
    CsvWriter weights({"date", "ticker", "strategy", "beta_source", "weight"});
    for (auto s : strategies) {
        if (s == strat::Strategy::Size && u.caps.empty()) {
            results.push_back({{"strategy", strat::strategy_name(s)},
                               {"skipped", "no capitalization data"}});
            continue;
        }
        for (auto b : sources) {
            strat::BacktestOptions bo = config.backtest;
            bo.strategy = s;
            bo.beta_source = b;
            bo.reactive = config.reactive;
            bo.burn_in = config.burn_in;
            const auto res = strat::backtest(u, bo, o.export_weights);
            const std::string tag = strat::strategy_name(s) + "_" + strat::beta_source_name(b);
            CsvWriter daily({"date", "factor_return", "index_return"});
            for (std::size_t k = 0; k < res.days.size(); ++k) {
                const std::size_t d = res.days[k];
                daily.row({u.dates.empty() ? std::to_string(d) : u.dates[d],
                           CsvWriter::num(res.returns[k]), CsvWriter::num(res.index_returns[k])});
            }
            const fs::path p = out_dir / ("returns_" + tag + ".csv");
            daily.save(p);
            files.push_back(p);
            for (const auto& fw : res.weights) {
                if (!fw.valid()) continue;
                for (std::size_t i = 0; i < fw.w.size(); ++i) {
                    if (fw.w[i] == 0.0) continue;
                    weights.row({u.dates.empty() ? std::to_string(fw.day) : u.dates[fw.day],
                                 u.tickers[i], strat::strategy_name(s),
                                 strat::beta_source_name(b), CsvWriter::num(fw.w[i])});
                }
            }
            results.push_back({{"strategy", strat::strategy_name(s)},
                               {"beta_source", strat::beta_source_name(b)},
                               {"p", bo.p.value_or(strat::default_quantile(s))},
                               {"bias", optional_json(res.stats.bias)},
                               {"corstd", optional_json(res.stats.corstd)},
                               {"days", res.returns.size()},
                               {"skipped_days", res.skipped_days},
                               {"missing_marks", res.missing_marks},
                               {"corr_windows", res.stats.windows}});
        }
    }
    if (o.export_weights) {
        weights.save(out_dir / "weights.csv");
        files.push_back(out_dir / "weights.csv");
    }
    Json report = {{"command", "backtest"}, {"universe", source}, {"results", results}};
    return finish("backtest", config, std::move(report), std::move(inputs), std::move(files),
                  out_dir);
}

// ----------------------------------------------------- selection bias ----

CommandOutput selection_bias(const eval::SelectionBiasInputs& in, const fs::path& out_dir) {
    const auto sb = eval::selection_bias(in);
    Json report = {{"command", "selection-bias"},
                   {"inputs",
                    {{"sigma_beta", in.sigma_beta},
                     {"vol_ratio", in.vol_ratio},
                     {"lambda_beta", in.lambda_beta},
                     {"p", in.p},
                     {"sigma_I", in.sigma_I},
                     {"factor_vol", in.factor_vol},
                     {"sigma_eta", optional_json(in.sigma_eta)}}},
                   {"q", sb.q},
                   {"sigma_eta", sb.sigma_eta},
                   {"B", sb.B},
                   {"beta_low", sb.beta_low},
                   {"rho_low", sb.rho_low},
                   {"rho_low_percent", 100.0 * sb.rho_low}};
    io::RunConfig dummy;
    dummy.seed = 0;
    return finish("selection-bias", dummy, std::move(report), {}, {}, out_dir);
}

// ------------------------------------------------------ calibrate-ell ----

CommandOutput calibrate_ell(const io::RunConfig& config, const CalibrateEllOptions& o,
                            const fs::path& out_dir) {
    config.validate();
    const auto panel = io::read_panel(o.series);
    auto column = [&](const std::string& name) {
        for (std::size_t k = 0; k < panel.columns.size(); ++k) {
            if (panel.columns[k] == name) {
                for (double v : panel.values[k]) {
                    if (is_missing(v)) {
                        throw InputError(o.series.string() + ": column " + name +
                                         " has missing values");
                    }
                }
                return panel.values[k];
            }
        }
        throw InputError(o.series.string() + ": no column '" + name + "'");
    };
    const auto index = column(o.index_column);
    const auto corr = column(o.correlation_column);
    const auto lev = eval::leverage_factor_series(index, config.reactive.lambda_f);
    const auto fit = eval::calibrate_ell_diff(corr, lev);

    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t t = 1; t < lev.size(); ++t) {
        x.push_back(lev[t] - lev[t - 1]);
        y.push_back((corr[t] - corr[t - 1]) / fit.correlation_mean);
    }
    const Json fit_json = {{"slope", fit.slope},
                           {"stderr_slope", fit.stderr_slope},
                           {"tstat", fit.tstat},
                           {"r2", fit.r2},
                           {"intercept", fit.intercept},
                           {"ell_diff", fit.ell_diff},
                           {"ell_diff_stderr", fit.ell_diff_stderr},
                           {"n", fit.n},
                           {"correlation_mean", fit.correlation_mean}};
    const fs::path plot = out_dir / "ell_fit.csv";
    io::write_xy(plot, "d_leverage", x, "d_correlation_relative", y, fit_json);
    auto side = plot;
    side.replace_extension(".fit.json");
    Json report = {{"command", "calibrate-ell"}, {"fit", fit_json}};
    return finish("calibrate-ell", config, std::move(report), {o.series}, {plot, side}, out_dir);
}

}  // namespace rbeta::cmd
