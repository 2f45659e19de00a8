#include "rbeta/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rbeta/errors.hpp"
#include "rbeta/estimators.hpp"
#include "rbeta/reactive_beta.hpp"
#include "rbeta/rng.hpp"

namespace rbeta::strat {

Strategy parse_strategy(std::string_view tag) {
    if (tag == "lowvol" || tag == "low-vol" || tag == "low_volatility") return Strategy::LowVolatility;
    if (tag == "reversal") return Strategy::Reversal;
    if (tag == "momentum") return Strategy::Momentum;
    if (tag == "size") return Strategy::Size;
    throw InputError("unknown strategy '" + std::string(tag) + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::LowVolatility: return "lowvol";
        case Strategy::Reversal: return "reversal";
        case Strategy::Momentum: return "momentum";
        case Strategy::Size: return "size";
    }
    return "unknown";
}

BetaSource parse_beta_source(std::string_view tag) {
    if (tag == "ols" || tag == "OLS") return BetaSource::OLS;
    if (tag == "reactive" || tag == "Reactive") return BetaSource::Reactive;
    throw InputError("unknown beta source '" + std::string(tag) + "'");
}

std::string beta_source_name(BetaSource b) {
    return b == BetaSource::OLS ? "ols" : "reactive";
}

double default_quantile(Strategy s) {
    return (s == Strategy::Reversal || s == Strategy::Momentum) ? 0.15 : 0.30;
}

void Universe::validate() const {
    const std::size_t n = tickers.size();
    const std::size_t d = index.size();
    if (n == 0 || d == 0) {
        throw InputError("universe needs at least one stock and one day");
    }
    if (prices.size() != n) {
        throw InputError("universe: price rows do not match tickers");
    }
    for (const auto& row : prices) {
        if (row.size() != d) {
            throw InputError("universe: price row length differs from the index");
        }
        for (double v : row) {
            if (!is_missing(v) && !(std::isfinite(v) && v > 0.0)) {
                throw DomainError("universe: prices must be positive or missing");
            }
        }
    }
    for (double v : index) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw DomainError("universe: index prices must be positive and present");
        }
    }
    if (!caps.empty()) {
        if (caps.size() != n) {
            throw InputError("universe: cap rows do not match tickers");
        }
        for (const auto& row : caps) {
            if (row.size() != d) {
                throw InputError("universe: cap row length differs from the index");
            }
        }
    }
    if (!sectors.empty()) {
        if (sectors.size() != n) {
            throw InputError("universe: sector labels do not match tickers");
        }
        for (int s : sectors) {
            if (s < 0) {
                throw InputError("universe: sector labels must be non-negative");
            }
        }
    }
    if (!dates.empty() && dates.size() != d) {
        throw InputError("universe: date count differs from the index");
    }
}

std::vector<int> partition_by_cap(const Universe& u, std::size_t day, std::size_t groups) {
    if (groups == 0) {
        throw InputError("partition_by_cap: groups must be positive");
    }
    if (u.caps.size() != u.n_stocks()) {
        throw InputError("partition_by_cap: capitalizations are required");
    }
    if (day >= u.n_days()) {
        throw InputError("partition_by_cap: day out of range");
    }
    const std::size_t n = u.n_stocks();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto cap = [&](std::size_t i) {
        const double c = u.caps[i][day];
        return is_missing(c) ? -1.0 : c;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cap(a) != cap(b)) return cap(a) > cap(b);
        return u.tickers[a] < u.tickers[b];
    });
    std::vector<int> out(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        out[order[r]] = static_cast<int>(std::min(groups - 1, r * groups / n));
    }
    return out;
}

std::optional<SectorWeights> sector_factor(const SectorInput& in, double p,
                                           std::span<const std::string> tie_keys) {
    const std::size_t n = in.stocks.size();
    if (in.indicator.size() != n || in.beta.size() != n || in.sigma.size() != n ||
        tie_keys.size() != n) {
        throw InputError("sector_factor: input lengths differ");
    }
    if (!(p > 0.0 && p <= 0.5)) {
        throw ConfigError("quantile p must lie in (0, 0.5]");
    }
    if (n < 2) {
        return std::nullopt;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(in.sigma[j] > 0.0) || !std::isfinite(in.beta[j]) || !std::isfinite(in.indicator[j])) {
            throw DomainError("sector_factor: needs finite betas, indicators and positive vols");
        }
    }
    std::size_t k = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n / 2);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (in.indicator[a] != in.indicator[b]) return in.indicator[a] > in.indicator[b];
        return tie_keys[a] < tie_keys[b];
    });

    const double sigma_mean =
        std::accumulate(in.sigma.begin(), in.sigma.end(), 0.0) / static_cast<double>(n);
    std::vector<double> scale(n, 0.0);
    double b_long = 0.0;
    double b_short = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t hi = order[r];
        const std::size_t lo = order[n - 1 - r];
        scale[hi] = std::min(1.0, sigma_mean / in.sigma[hi]);
        scale[lo] = std::min(1.0, sigma_mean / in.sigma[lo]);
        b_long += in.beta[hi] * scale[hi];
        b_short += in.beta[lo] * scale[lo];
    }
    // mu+ b_long = mu- b_short has a positive solution only when both legs
    // carry beta of the same sign.
    if (b_long == 0.0 || b_short == 0.0 || (b_long > 0.0) != (b_short > 0.0)) {
        return std::nullopt;
    }
    const double mu_full = 1.0 / (2.0 * static_cast<double>(k));
    SectorWeights out;
    if (std::abs(b_long) >= std::abs(b_short)) {
        out.mu_minus = mu_full;
        out.mu_plus = mu_full * b_short / b_long;
        out.reduced_long = true;
    } else {
        out.mu_plus = mu_full;
        out.mu_minus = mu_full * b_long / b_short;
    }
    out.w.assign(n, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        out.w[order[r]] = out.mu_plus * scale[order[r]];
        out.w[order[n - 1 - r]] = -out.mu_minus * scale[order[n - 1 - r]];
    }
    return out;
}

namespace {

struct StockTrack {
    est::ExpWeightedCovariance beta_cov;
    est::ExpWeightedCovariance vol_cov;
};

double past_return(const Universe& u, std::size_t i, std::size_t day, std::size_t window) {
    if (day < window) {
        return kMissing;
    }
    const double now = u.prices[i][day];
    const double then = u.prices[i][day - window];
    if (is_missing(now) || is_missing(then)) {
        return kMissing;
    }
    return now / then - 1.0;
}

}  // namespace

BacktestResult backtest(const Universe& u, const BacktestOptions& o, bool keep_weights) {
    u.validate();
    o.reactive.validate();
    const double p = o.p.value_or(default_quantile(o.strategy));
    if (!(p > 0.0 && p <= 0.5)) {
        throw ConfigError("quantile p must lie in (0, 0.5]");
    }
    if (o.strategy == Strategy::Size && u.caps.empty()) {
        throw InputError("the size strategy needs capitalizations");
    }
    if (o.corr_window < 2) {
        throw ConfigError("correlation window must be at least 2");
    }
    std::vector<int> sectors = u.sectors;
    if (sectors.empty()) {
        if (u.caps.empty()) {
            sectors.assign(u.n_stocks(), 0);
        } else {
            sectors = partition_by_cap(u, 0);
        }
    }
    const int n_sectors = *std::max_element(sectors.begin(), sectors.end()) + 1;

    const std::size_t n = u.n_stocks();
    const std::size_t days = u.n_days();
    beta::ReactiveBetaEngine engine(n, o.reactive);
    std::vector<StockTrack> tracks;
    tracks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        tracks.push_back({est::ExpWeightedCovariance(o.reactive.lambda_beta),
                          est::ExpWeightedCovariance(o.reactive.lambda_sigma)});
    }

    BacktestResult res;
    std::vector<double> column(n);
    auto feed = [&](std::size_t d) {
        for (std::size_t i = 0; i < n; ++i) column[i] = u.prices[i][d];
        engine.step(u.index[d], column);
        if (d == 0) return;
        const double rI = u.index[d] / u.index[d - 1] - 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = u.prices[i][d - 1];
            const double b = u.prices[i][d];
            if (is_missing(a) || is_missing(b)) continue;
            const double ri = b / a - 1.0;
            tracks[i].beta_cov.update(rI, ri);
            tracks[i].vol_cov.update(rI, ri);
        }
    };

    auto indicator = [&](std::size_t i, std::size_t last) -> double {
        switch (o.strategy) {
            case Strategy::LowVolatility: {
                const auto b = tracks[i].beta_cov.beta();
                if (!b) return kMissing;
                return o.long_high_beta ? *b : -*b;
            }
            case Strategy::Reversal: {
                const double r = past_return(u, i, last, o.reversal_window);
                return is_missing(r) ? kMissing : -r;
            }
            case Strategy::Momentum:
                return past_return(u, i, last, o.momentum_window);
            case Strategy::Size:
                return u.caps[i][last];
        }
        return kMissing;
    };

    auto hedge = [&](std::size_t i) -> std::optional<std::pair<double, double>> {
        if (o.beta_source == BetaSource::OLS) {
            const auto b = tracks[i].beta_cov.beta();
            if (!b || tracks[i].vol_cov.count() < 2) return std::nullopt;
            const double s = std::sqrt(tracks[i].vol_cov.var_y());
            if (!(s > 0.0)) return std::nullopt;
            return std::make_pair(*b, s);
        }
        const auto b = engine.beta(i);
        const auto s = engine.sigma(i);
        if (!b || !s || !(*s > 0.0)) return std::nullopt;
        return std::make_pair(*b, *s);
    };

    feed(0);
    for (std::size_t d = 1; d < days; ++d) {
        const std::size_t last = d - 1;  // information available for day d
        FactorWeights fw;
        fw.day = d;
        fw.p = p;
        if (d > o.burn_in) {
            fw.w.assign(n, 0.0);
            fw.beta.assign(n, 0.0);
            fw.mu_plus.assign(static_cast<std::size_t>(n_sectors), 0.0);
            fw.mu_minus.assign(static_cast<std::size_t>(n_sectors), 0.0);
            fw.reduced_long.assign(static_cast<std::size_t>(n_sectors), 0);
            std::vector<SectorInput> inputs(static_cast<std::size_t>(n_sectors));
            std::vector<std::vector<std::string>> keys(static_cast<std::size_t>(n_sectors));
            for (std::size_t i = 0; i < n; ++i) {
                if (is_missing(u.prices[i][last])) continue;
                const double ind = indicator(i, last);
                if (is_missing(ind)) continue;
                const auto h = hedge(i);
                if (!h) continue;
                auto& in = inputs[static_cast<std::size_t>(sectors[i])];
                in.stocks.push_back(i);
                in.indicator.push_back(ind);
                in.beta.push_back(h->first);
                fw.beta[i] = h->first;
                in.sigma.push_back(h->second);
                keys[static_cast<std::size_t>(sectors[i])].push_back(u.tickers[i]);
            }
            std::vector<std::pair<std::size_t, SectorWeights>> built;
            for (std::size_t s = 0; s < inputs.size(); ++s) {
                if (inputs[s].stocks.empty()) continue;
                auto sw = sector_factor(inputs[s], p, keys[s]);
                if (!sw) {
                    ++fw.skipped_sectors;
                    continue;
                }
                built.emplace_back(s, std::move(*sw));
            }
            fw.active_sectors = built.size();
            if (fw.active_sectors > 0) {
                const double share = 1.0 / static_cast<double>(fw.active_sectors);
                for (const auto& [s, sw] : built) {
                    fw.mu_plus[s] = sw.mu_plus * share;
                    fw.mu_minus[s] = sw.mu_minus * share;
                    fw.reduced_long[s] = sw.reduced_long ? 1 : 0;
                    for (std::size_t j = 0; j < sw.w.size(); ++j) {
                        fw.w[inputs[s].stocks[j]] = sw.w[j] * share;
                    }
                }
            }
        }

        if (fw.valid()) {
            double r = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (fw.w[i] == 0.0) continue;
                const double b = u.prices[i][d];
                if (is_missing(b)) {
                    ++res.missing_marks;
                    continue;
                }
                r += fw.w[i] * (b / u.prices[i][last] - 1.0);
            }
            res.days.push_back(d);
            res.returns.push_back(r);
            res.index_returns.push_back(u.index[d] / u.index[last] - 1.0);
        } else if (d > o.burn_in) {
            ++res.skipped_days;
        }
        if (keep_weights && d > o.burn_in) {
            res.weights.push_back(std::move(fw));
        }
        feed(d);
    }

    if (res.returns.size() > o.corr_window) {
        res.stats = eval::strategy_bias_corstd(res.returns, res.index_returns, o.corr_window);
    }
    return res;
}

Universe synthetic_universe(const SyntheticUniverseConfig& c) {
    if (c.n_stocks < 2 || c.n_days < 2) {
        throw ConfigError("synthetic universe needs at least two stocks and two days");
    }
    if (!(c.index_vol > 0.0 && c.resid_vol_lo > 0.0 && c.resid_vol_hi >= c.resid_vol_lo &&
          c.beta_hi >= c.beta_lo && c.annualization > 0.0)) {
        throw ConfigError("synthetic universe: invalid volatility or beta range");
    }
    c.reactive.validate();
    const auto& rp = c.reactive;
    const double day = 1.0 / std::sqrt(c.annualization);
    const double sI = c.index_vol * day;

    rng::Stream setup(c.seed, 0, 1000);
    std::vector<double> tb(c.n_stocks);
    std::vector<double> se(c.n_stocks);
    std::vector<double> shares(c.n_stocks);
    for (std::size_t i = 0; i < c.n_stocks; ++i) {
        tb[i] = c.beta_lo + (c.beta_hi - c.beta_lo) * setup.uniform();
        se[i] = (c.resid_vol_lo + (c.resid_vol_hi - c.resid_vol_lo) * setup.uniform()) * day;
        shares[i] = std::exp(1.5 * setup.normal());
    }

    Universe u;
    u.tickers.resize(c.n_stocks);
    for (std::size_t i = 0; i < c.n_stocks; ++i) {
        u.tickers[i] = "S" + std::to_string(1000 + i);
    }
    u.index.resize(c.n_days);
    u.prices.assign(c.n_stocks, std::vector<double>(c.n_days));
    u.caps.assign(c.n_stocks, std::vector<double>(c.n_days));

    rng::Stream market(c.seed, 1, 1001);
    std::vector<rng::Stream> specific;
    specific.reserve(c.n_stocks);
    for (std::size_t i = 0; i < c.n_stocks; ++i) {
        specific.emplace_back(c.seed, 2 + i, 1002);
    }

    double I = 100.0;
    std::vector<double> S(c.n_stocks, 100.0);
    vol::IndexLevelState idx = vol::update_index_levels({}, I, rp);
    std::vector<vol::StockLevelState> st(c.n_stocks);
    for (std::size_t i = 0; i < c.n_stocks; ++i) {
        st[i] = vol::update_stock_levels({}, S[i], idx, rp);
    }
    auto record = [&](std::size_t d) {
        u.index[d] = I;
        for (std::size_t i = 0; i < c.n_stocks; ++i) {
            u.prices[i][d] = S[i];
            u.caps[i][d] = S[i] * shares[i];
        }
    };
    record(0);
    for (std::size_t d = 1; d < c.n_days; ++d) {
        const double rn_I = sI * market.normal();
        const double rI = std::max(-0.95, rn_I * idx.slow / I);
        for (std::size_t i = 0; i < c.n_stocks; ++i) {
            const double rn_i = tb[i] * rn_I + se[i] * specific[i].normal();
            const double ri = std::max(-0.95, rn_i * st[i].slow / S[i]);
            S[i] *= 1.0 + ri;
        }
        I *= 1.0 + rI;
        idx = vol::update_index_levels(idx, I, rp);
        for (std::size_t i = 0; i < c.n_stocks; ++i) {
            st[i] = vol::update_stock_levels(st[i], S[i], idx, rp);
        }
        record(d);
    }
    u.sectors = partition_by_cap(u, 0);
    return u;
}

}  // namespace rbeta::strat
