#include "rbeta/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "rbeta/errors.hpp"
#include "rbeta/timeseries.hpp"

namespace rbeta::eval {

bool winner_flag(std::span<const double> r_i, std::span<const double> r_I, std::size_t window) {
    if (r_i.size() != r_I.size() || r_i.empty()) {
        throw InputError("winner_flag: equal non-empty return series required");
    }
    const std::size_t n = std::min(window, r_i.size());
    double gi = 1.0;
    double gI = 1.0;
    for (std::size_t t = r_i.size() - n; t < r_i.size(); ++t) {
        gi *= 1.0 + r_i[t];
        gI *= 1.0 + r_I[t];
    }
    return gi > gI;
}

BiasCell bias_cell(std::span<const double> e) {
    BiasCell c;
    c.count = e.size();
    if (e.empty()) {
        return c;
    }
    const double n = static_cast<double>(e.size());
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / n;
    c.mean = mean;
    if (e.size() > 1) {
        double ss = 0.0;
        for (double v : e) {
            ss += (v - mean) * (v - mean);
        }
        c.std_error = std::sqrt(ss / (n - 1.0) / n);
        c.star = std::abs(mean) > 3.0 * c.std_error;
    }
    return c;
}

StatRow table2_stats(std::span<const ErrorSample> samples,
                     std::optional<double> reference_variance) {
    if (samples.empty()) {
        throw InputError("table2_stats: empty sample");
    }
    std::vector<double> all;
    std::vector<double> win;
    std::vector<double> lose;
    std::vector<double> low;
    std::vector<double> high;
    all.reserve(samples.size());
    double abs_sum = 0.0;
    for (const auto& s : samples) {
        const double e = s.error();
        require_finite(e, "estimator error");
        all.push_back(e);
        abs_sum += std::abs(e);
        (s.winner ? win : lose).push_back(e);
        (s.low ? low : high).push_back(e);
    }
    StatRow row;
    row.n = all.size();
    row.bias = bias_cell(all);
    row.winner = bias_cell(win);
    row.loser = bias_cell(lose);
    row.low = bias_cell(low);
    row.high = bias_cell(high);
    row.absd = abs_sum / static_cast<double>(row.n);
    if (row.n > 1) {
        const double mean = *row.bias.mean;
        double ss = 0.0;
        for (double e : all) {
            ss += (e - mean) * (e - mean);
        }
        row.error_variance = ss / static_cast<double>(row.n - 1);
    }
    if (reference_variance && row.error_variance > 0.0) {
        row.variance_ratio = *reference_variance / row.error_variance;
    }
    return row;
}

StrategyBias strategy_bias_corstd(std::span<const double> strategy,
                                  std::span<const double> index, std::size_t window) {
    if (strategy.size() != index.size()) {
        throw InputError("strategy_bias_corstd: series lengths differ");
    }
    if (strategy.size() <= window) {
        throw InputError("strategy_bias_corstd: series must be longer than the window");
    }
    StrategyBias out;
    out.bias = ts::pearson(strategy, index);
    const auto rolling = ts::rolling_correlation(strategy, index, window);
    const auto summary = ts::summarize_defined(rolling);
    out.windows = rolling.size();
    out.skipped_windows = summary.skipped;
    if (summary.count >= 2) {
        out.corstd = summary.stddev;
    }
    return out;
}

void SelectionBiasInputs::validate() const {
    if (!(sigma_beta > 0.0 && sigma_I > 0.0 && factor_vol > 0.0)) {
        throw ConfigError("selection bias: volatilities and sigma_beta must be positive");
    }
    if (!(p > 0.0 && p < 0.5)) {
        throw ConfigError("selection bias: p must lie in (0, 0.5)");
    }
    if (sigma_eta) {
        if (!(*sigma_eta >= 0.0)) {
            throw ConfigError("selection bias: sigma_eta must be non-negative");
        }
    } else if (!(vol_ratio > 0.0 && lambda_beta > 0.0 && lambda_beta <= 1.0)) {
        throw ConfigError("selection bias: vol_ratio and lambda_beta must be positive");
    }
}

double SelectionBiasInputs::effective_sigma_eta() const {
    return sigma_eta ? *sigma_eta : vol_ratio * std::sqrt(lambda_beta);
}

double erf_inv(double x) {
    if (!(x > -1.0 && x < 1.0)) {
        throw DomainError("erf_inv: argument must lie in (-1, 1)");
    }
    return boost::math::erf_inv(x);
}

double selection_bias_B(double sigma_beta, double sigma_eta, double p) {
    if (!(sigma_beta > 0.0) || !(sigma_eta >= 0.0) || !(p > 0.0 && p < 1.0)) {
        throw DomainError("selection_bias_B: invalid inputs");
    }
    if (sigma_eta == 0.0) {
        return 0.0;
    }
    const double q = erf_inv(2.0 * p - 1.0);
    const double rb = sigma_beta / sigma_eta;
    const double re = sigma_eta / sigma_beta;
    return sigma_eta / (p * std::sqrt(2.0 * std::numbers::pi)) / std::sqrt(1.0 + rb * rb) *
           std::exp(-q * q / (1.0 + re * re));
}

SelectionBias selection_bias(const SelectionBiasInputs& in) {
    in.validate();
    SelectionBias out;
    out.q = erf_inv(2.0 * in.p - 1.0);
    out.sigma_eta = in.effective_sigma_eta();
    out.B = selection_bias_B(in.sigma_beta, out.sigma_eta, in.p);
    out.beta_low = 0.5 * out.B;
    out.rho_low = out.beta_low * in.sigma_I / in.factor_vol;
    return out;
}

std::vector<double> leverage_factor_series(std::span<const double> prices, double lambda_f) {
    if (prices.empty()) {
        throw InputError("leverage_factor_series: empty price series");
    }
    auto ema = ts::make_ema(lambda_f);
    std::vector<double> out(prices.size());
    for (std::size_t t = 0; t < prices.size(); ++t) {
        if (!(prices[t] > 0.0)) {
            throw DomainError("leverage_factor_series: non-positive price");
        }
        ema = ts::ema_update(ema, prices[t]);
        out[t] = (ema.value - prices[t]) / ema.value;
    }
    return out;
}

std::optional<SimpleRegression> simple_regression(std::span<const double> x,
                                                  std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InputError("simple_regression: length mismatch");
    }
    if (x.size() < 2 || std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) {
        return std::nullopt;
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sxx += (x[t] - mx) * (x[t] - mx);
        syy += (y[t] - my) * (y[t] - my);
        sxy += (x[t] - mx) * (y[t] - my);
    }
    if (!(sxx > 0.0)) {
        return std::nullopt;
    }
    SimpleRegression r;
    r.n = x.size();
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return r;
}

EllCalibration calibrate_ell_diff(std::span<const double> corr,
                                  std::span<const double> lev) {
    if (corr.size() != lev.size()) {
        throw InputError("calibrate_ell_diff: series lengths differ");
    }
    if (corr.size() < 30) {
        throw InputError("calibrate_ell_diff: at least 30 observations required");
    }
    for (std::size_t t = 0; t < corr.size(); ++t) {
        require_finite(corr[t], "correlation index");
        require_finite(lev[t], "leverage factor");
    }
    const double mean = std::accumulate(corr.begin(), corr.end(), 0.0) /
                        static_cast<double>(corr.size());
    if (!(std::abs(mean) > 0.0)) {
        throw DomainError("calibrate_ell_diff: correlation series has zero mean");
    }
    const std::size_t n = corr.size() - 1;
    std::vector<double> dx(n);
    std::vector<double> dy(n);
    for (std::size_t t = 0; t < n; ++t) {
        dx[t] = lev[t + 1] - lev[t];
        dy[t] = (corr[t + 1] - corr[t]) / mean;
    }
    const auto reg = simple_regression(dx, dy);
    if (!reg) {
        throw DomainError("calibrate_ell_diff: leverage factor has no variation");
    }
    const double nd = static_cast<double>(n);
    const double mx = std::accumulate(dx.begin(), dx.end(), 0.0) / nd;
    double sxx = 0.0;
    double sse = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sxx += (dx[t] - mx) * (dx[t] - mx);
        const double resid = dy[t] - reg->intercept - reg->slope * dx[t];
        sse += resid * resid;
    }
    EllCalibration out;
    out.n = n;
    out.slope = reg->slope;
    out.intercept = reg->intercept;
    out.r2 = reg->r2;
    out.stderr_slope = std::sqrt(sse / (nd - 2.0) / sxx);
    out.tstat = out.stderr_slope > 0.0 ? out.slope / out.stderr_slope
                                       : std::copysign(std::numeric_limits<double>::infinity(),
                                                       out.slope);
    out.ell_diff = 0.5 * out.slope;
    out.ell_diff_stderr = 0.5 * out.stderr_slope;
    out.correlation_mean = mean;
    return out;
}

ElasticityDiagnostic elasticity_diagnostic(const std::vector<std::vector<double>>& beta_panel,
                                           const std::vector<std::vector<double>>& relvol_panel,
                                           std::size_t bucket_size) {
    if (beta_panel.size() != relvol_panel.size()) {
        throw InputError("elasticity_diagnostic: panel stock counts differ");
    }
    if (bucket_size < 2) {
        throw InputError("elasticity_diagnostic: bucket size must be at least 2");
    }
    struct Point {
        double beta;
        double x;  // demeaned ln(relative vol)
        double y;  // demeaned beta
    };
    std::vector<Point> pts;
    for (std::size_t s = 0; s < beta_panel.size(); ++s) {
        const auto& b = beta_panel[s];
        const auto& v = relvol_panel[s];
        if (b.size() != v.size()) {
            throw InputError("elasticity_diagnostic: panel lengths differ");
        }
        if (b.empty()) {
            continue;
        }
        const double nb = static_cast<double>(b.size());
        const double mb = std::accumulate(b.begin(), b.end(), 0.0) / nb;
        const double mv = std::accumulate(v.begin(), v.end(), 0.0) / nb;
        if (!(mv > 0.0)) {
            throw DomainError("elasticity_diagnostic: relative volatility must be positive");
        }
        const bool constant = std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
        for (std::size_t t = 0; t < b.size(); ++t) {
            if (!(v[t] > 0.0)) {
                throw DomainError("elasticity_diagnostic: relative volatility must be positive");
            }
            const double x = constant ? 0.0 : std::log(v[t]) - std::log(mv);
            pts.push_back({b[t], x, b[t] - mb});
        }
    }
    if (pts.size() < bucket_size) {
        throw InputError("elasticity_diagnostic: fewer points than one bucket");
    }
    ElasticityDiagnostic out;
    {
        std::vector<double> xs(pts.size());
        std::vector<double> ys(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) {
            xs[k] = pts[k].x;
            ys[k] = pts[k].y;
        }
        out.global = simple_regression(xs, ys);
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const Point& a, const Point& b) { return a.beta < b.beta; });
    std::size_t start = 0;
    while (start < pts.size()) {
        std::size_t end = std::min(start + bucket_size, pts.size());
        if (pts.size() - end < bucket_size / 2) {
            end = pts.size();
        }
        std::vector<double> xs;
        std::vector<double> ys;
        double bsum = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            xs.push_back(2.0 * pts[k].x);
            ys.push_back(pts[k].y);
            bsum += pts[k].beta;
        }
        const auto reg = simple_regression(xs, ys);
        if (reg) {
            out.buckets.push_back({bsum / static_cast<double>(end - start), reg->slope, end - start});
        } else {
            ++out.skipped_buckets;
        }
        start = end;
    }
    return out;
}

std::optional<SimpleRegression> vol_response_slope(
    const std::vector<std::vector<double>>& stock_vols, std::span<const double> index_vol) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& sv : stock_vols) {
        if (sv.size() != index_vol.size()) {
            throw InputError("vol_response_slope: series lengths differ");
        }
        for (std::size_t t = 1; t < sv.size(); ++t) {
            if (!(sv[t - 1] > 0.0) || !(index_vol[t - 1] > 0.0)) {
                continue;
            }
            xs.push_back((index_vol[t] - index_vol[t - 1]) / index_vol[t - 1]);
            ys.push_back((sv[t] - sv[t - 1]) / sv[t - 1]);
        }
    }
    return simple_regression(xs, ys);
}

}  // namespace rbeta::eval
