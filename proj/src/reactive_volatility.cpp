#include "rbeta/reactive_volatility.hpp"

#include <cmath>
#include <string>

#include "rbeta/errors.hpp"

namespace rbeta::vol {

namespace {

void check_weight(double lambda, const char* name) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError(std::string(name) + " must lie in (0, 1]");
    }
}

void check_price(double p, const char* what) {
    if (!std::isfinite(p) || p <= 0.0) {
        throw DomainError(std::string(what) + " must be a positive finite price");
    }
}

}  // namespace

void ReactiveParams::validate() const {
    check_weight(lambda_s, "lambda_s");
    check_weight(lambda_f, "lambda_f");
    check_weight(lambda_sigma, "lambda_sigma");
    check_weight(lambda_beta, "lambda_beta");
    if (!(ell >= ell_prime && ell_prime >= 0.0)) {
        throw ConfigError("leverage parameters must satisfy ell >= ell_prime >= 0");
    }
    if (!(phi >= 0.0) || !std::isfinite(phi)) {
        throw ConfigError("phi must be a finite non-negative number");
    }
    if (!(elasticity_lo < elasticity_hi)) {
        throw ConfigError("elasticity_lo must be below elasticity_hi");
    }
    if (!(elasticity_slope >= 0.0) || !(elasticity_plateau >= 0.0)) {
        throw ConfigError("elasticity slope and plateau must be non-negative");
    }
}

ReactiveParams ReactiveParams::ols_limit() {
    ReactiveParams p;
    p.lambda_s = 1.0;
    p.lambda_f = 1.0;
    p.ell = 0.0;
    p.ell_prime = 0.0;
    p.elasticity_slope = 0.0;
    p.elasticity_plateau = 0.0;
    p.renormalize_by_index_vol = false;
    return p;
}

double filter_phi(double z, double phi) {
    if (phi == 0.0) {
        return z;
    }
    return std::tanh(phi * z) / phi;
}

LevelState make_level_state(std::size_t n_stocks) {
    LevelState s;
    s.stocks.resize(n_stocks);
    s.frozen.assign(n_stocks, false);
    return s;
}

IndexLevelState update_index_levels(IndexLevelState s, double index_price,
                                    const ReactiveParams& p) {
    check_price(index_price, "index price");
    if (!s.initialized) {
        s.slow = index_price;
        s.fast = index_price;
        s.initialized = true;
    } else {
        s.slow = (1.0 - p.lambda_s) * s.slow + p.lambda_s * index_price;
        s.fast = (1.0 - p.lambda_f) * s.fast + p.lambda_f * index_price;
    }
    s.price = index_price;
    const double specific = filter_phi((s.slow - index_price) / index_price, p.phi);
    s.level = index_price * (1.0 + specific) * (1.0 + p.ell * s.leverage_gap());
    return s;
}

StockLevelState update_stock_levels(StockLevelState s, double stock_price,
                                    const IndexLevelState& index, const ReactiveParams& p) {
    check_price(stock_price, "stock price");
    if (!index.initialized) {
        throw StateError("stock levels need the index levels of the same day");
    }
    if (!s.initialized) {
        s.slow = stock_price;
        s.initialized = true;
    } else {
        s.slow = (1.0 - p.lambda_s) * s.slow + p.lambda_s * stock_price;
    }
    s.price = stock_price;
    const double specific = filter_phi((s.slow - stock_price) / stock_price, p.phi);
    s.level = stock_price * (1.0 + specific) * (1.0 + p.ell_prime * index.leverage_gap());
    return s;
}

LevelState update_levels(LevelState s, double index_price, std::span<const double> stock_prices,
                         const ReactiveParams& p) {
    if (stock_prices.size() != s.stocks.size()) {
        throw InputError("update_levels: stock count mismatch");
    }
    s.index = update_index_levels(s.index, index_price, p);
    for (std::size_t i = 0; i < s.stocks.size(); ++i) {
        if (is_missing(stock_prices[i])) {
            s.frozen[i] = true;
            continue;
        }
        s.frozen[i] = false;
        s.stocks[i] = update_stock_levels(s.stocks[i], stock_prices[i], s.index, p);
    }
    return s;
}

double normalized_return(const IndexLevelState& prev, double index_price) {
    if (!prev.initialized) {
        throw StateError("index levels are not initialized");
    }
    check_price(index_price, "index price");
    return (index_price - prev.price) / prev.level;
}

double normalized_return(const StockLevelState& prev, double stock_price) {
    if (!prev.initialized) {
        throw StateError("stock levels are not initialized");
    }
    check_price(stock_price, "stock price");
    return (stock_price - prev.price) / prev.level;
}

NormalizedReturns normalized_returns(const LevelState& state, double index_price,
                                     std::span<const double> stock_prices) {
    if (stock_prices.size() != state.stocks.size()) {
        throw InputError("normalized_returns: stock count mismatch");
    }
    NormalizedReturns out;
    out.index = normalized_return(state.index, index_price);
    out.stocks.resize(stock_prices.size());
    for (std::size_t i = 0; i < stock_prices.size(); ++i) {
        if (is_missing(stock_prices[i]) || !state.stocks[i].initialized) {
            out.stocks[i] = kMissing;
        } else {
            out.stocks[i] = normalized_return(state.stocks[i], stock_prices[i]);
        }
    }
    return out;
}

VolState make_vol_state(std::size_t n_stocks, const ReactiveParams& p) {
    VolState v;
    v.index_var = ts::make_ema(p.lambda_sigma);
    v.stock_var.assign(n_stocks, ts::make_ema(p.lambda_sigma));
    v.sigma_stocks.assign(n_stocks, 0.0);
    return v;
}

VolState update_reactive_vols(VolState v, const LevelState& level, double index_return,
                              std::span<const double> stock_returns, const ReactiveParams& p) {
    (void)p;
    if (stock_returns.size() != v.stock_var.size()) {
        throw InputError("update_reactive_vols: stock count mismatch");
    }
    v.index_var = ts::ema_update(v.index_var, index_return * index_return);
    v.sigma_index = normalized_sigma(v.index_var) * level.index.level / level.index.price;
    for (std::size_t i = 0; i < stock_returns.size(); ++i) {
        if (is_missing(stock_returns[i])) {
            continue;
        }
        v.stock_var[i] = ts::ema_update(v.stock_var[i], stock_returns[i] * stock_returns[i]);
        const auto& st = level.stocks[i];
        v.sigma_stocks[i] = normalized_sigma(v.stock_var[i]) * st.level / st.price;
    }
    return v;
}

}  // namespace rbeta::vol
