#include "rbeta/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rbeta/errors.hpp"

namespace rbeta::ts {

Series Series::make(std::vector<double> values, std::string label) {
    if (values.empty()) {
        throw InputError("series '" + label + "' is empty");
    }
    for (double v : values) {
        require_finite(v, "series value");
    }
    return Series{std::move(values), std::move(label)};
}

EmaState make_ema(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError("EMA weight must lie in (0, 1], got " + std::to_string(lambda));
    }
    return EmaState{lambda, 0.0, false};
}

EmaState ema_update(EmaState state, double x) {
    require_finite(x, "ema_update input");
    if (!state.initialized) {
        state.value = x;
        state.initialized = true;
        return state;
    }
    state.value = (1.0 - state.lambda) * state.value + state.lambda * x;
    return state;
}

std::vector<double> arithmetic_returns(std::span<const double> prices) {
    if (prices.size() < 2) {
        throw InputError("arithmetic_returns needs at least two prices");
    }
    for (double p : prices) {
        require_finite(p, "price");
        if (p <= 0.0) {
            throw DomainError("arithmetic_returns: non-positive price");
        }
    }
    std::vector<double> out(prices.size() - 1);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        out[t - 1] = (prices[t] - prices[t - 1]) / prices[t - 1];
    }
    return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InputError("pearson: need two equal-length samples of size >= 2");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return std::nullopt;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::optional<double>> rolling_correlation(std::span<const double> x,
                                                       std::span<const double> y,
                                                       std::size_t window) {
    if (window < 2) {
        throw InputError("rolling_correlation: window must be >= 2");
    }
    if (x.size() != y.size() || x.size() < window) {
        throw InputError("rolling_correlation: equal lengths >= window required");
    }
    std::vector<std::optional<double>> out;
    out.reserve(x.size() - window + 1);
    for (std::size_t k = 0; k + window <= x.size(); ++k) {
        out.push_back(pearson(x.subspan(k, window), y.subspan(k, window)));
    }
    return out;
}

DefinedSummary summarize_defined(std::span<const std::optional<double>> values) {
    DefinedSummary s;
    double sum = 0.0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++s.count;
        } else {
            ++s.skipped;
        }
    }
    if (s.count == 0) {
        return s;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
            if (v) {
                ss += (*v - s.mean) * (*v - s.mean);
            }
        }
        s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    return s;
}

std::vector<double> exp_weights(std::size_t n, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw ConfigError("exponential weight decay must lie in (0, 1)");
    }
    std::vector<double> w(n);
    double acc = 1.0;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        w[n - 1 - k] = acc;
        total += acc;
        acc *= (1.0 - lambda);
    }
    for (double& v : w) {
        v /= total;
    }
    return w;
}

WeightedMoments exp_weighted_moments(std::span<const double> x, std::span<const double> y,
                                     double lambda) {
    if (x.empty()) {
        throw InputError("exp_weighted_moments: empty input");
    }
    if (x.size() != y.size()) {
        throw InputError("exp_weighted_moments: length mismatch");
    }
    const auto w = exp_weights(x.size(), lambda);
    WeightedMoments m;
    for (std::size_t t = 0; t < x.size(); ++t) {
        m.mean_x += w[t] * x[t];
        m.mean_y += w[t] * y[t];
    }
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double dx = x[t] - m.mean_x;
        const double dy = y[t] - m.mean_y;
        m.var_x += w[t] * dx * dx;
        m.var_y += w[t] * dy * dy;
        m.cov += w[t] * dx * dy;
    }
    return m;
}

}  // namespace rbeta::ts
