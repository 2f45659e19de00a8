#include "rbeta/reactive_beta.hpp"

#include <cmath>

#include "rbeta/errors.hpp"

namespace rbeta::beta {

double elasticity_f(double tilde_beta, const ReactiveParams& p) {
    if (tilde_beta < p.elasticity_lo) {
        return 0.0;
    }
    if (tilde_beta > p.elasticity_hi) {
        return p.elasticity_plateau;
    }
    return p.elasticity_slope * (tilde_beta - p.elasticity_lo);
}

double correction_L(const vol::IndexLevelState& prev_index, const ReactiveParams& p) {
    if (!prev_index.initialized) {
        throw StateError("correction_L needs initialized index levels");
    }
    return 1.0 + (p.ell - p.ell_prime) * prev_index.leverage_gap();
}

double correction_F(double tilde_beta, double rel_vol_prev, double kappa_prev,
                    const ReactiveParams& p) {
    const double f = elasticity_f(tilde_beta, p);
    if (f == 0.0 || tilde_beta <= 0.0) {
        return 1.0;
    }
    if (!(kappa_prev > 0.0)) {
        throw DomainError("correction_F needs a positive kappa");
    }
    const double root = std::sqrt(kappa_prev);
    const double delta = (rel_vol_prev - root) / root;
    return 1.0 + 2.0 * f / tilde_beta * delta;
}

BetaState make_beta_state(const ReactiveParams& p) {
    BetaState s;
    s.kappa = ts::make_ema(p.lambda_beta);
    return s;
}

namespace {

double ema(double prev, double x, double lambda) { return (1.0 - lambda) * prev + lambda * x; }

void advance_kappa(BetaState& s, const BetaStepInput& in) {
    if (in.tilde_sigma_I_now > 0.0) {
        const double rel = in.tilde_sigma_i_now / in.tilde_sigma_I_now;
        s.kappa = ts::ema_update(s.kappa, rel * rel);
    }
}

}  // namespace

BetaState update_beta(BetaState s, const BetaStepInput& in, const ReactiveParams& p) {
    if (in.index_prev == nullptr || in.index_now == nullptr || in.stock_now == nullptr) {
        throw StateError("update_beta: level states are required");
    }
    const bool warm = in.tilde_sigma_I_prev > 0.0;
    if (p.renormalize_by_index_vol && !warm) {
        advance_kappa(s, in);
        return s;
    }
    const double scale = p.renormalize_by_index_vol ? in.tilde_sigma_I_prev : 1.0;
    const double hr_I = in.tilde_r_I / scale;
    const double hr_i = in.tilde_r_i / scale;

    const double L = correction_L(*in.index_prev, p);
    double F = 1.0;
    if (s.tilde_beta && warm && s.kappa.initialized && s.kappa.value > 0.0) {
        F = correction_F(*s.tilde_beta, in.tilde_sigma_i_prev / in.tilde_sigma_I_prev,
                         s.kappa.value, p);
    }

    const double lb = p.lambda_beta;
    s.hat_phi = ema(s.hat_phi, hr_i * hr_I, lb);
    s.hat_sigma_I_sq = ema(s.hat_sigma_I_sq, hr_I * hr_I, lb);
    s.hat_sigma_i_sq = ema(s.hat_sigma_i_sq, hr_i * hr_i, lb);
    s.hat_Phi = ema(s.hat_Phi, hr_i * hr_I / (L * F), lb);
    s.last_L = L;
    s.last_F = F;
    ++s.updates;

    if (s.hat_sigma_I_sq > 0.0) {
        const double tb = s.hat_Phi / s.hat_sigma_I_sq;
        const auto& ix = *in.index_now;
        const auto& st = *in.stock_now;
        const double level_ratio = (st.level * ix.price) / (st.price * ix.level);
        s.tilde_beta = tb;
        s.beta = tb * level_ratio * L * F;
    } else {
        s.tilde_beta.reset();
        s.beta.reset();
    }
    advance_kappa(s, in);
    return s;
}

ReactiveBetaEngine::ReactiveBetaEngine(std::size_t n_stocks, ReactiveParams params)
    : params_(params) {
    params_.validate();
    levels_ = vol::make_level_state(n_stocks);
    vols_ = vol::make_vol_state(n_stocks, params_);
    betas_.assign(n_stocks, make_beta_state(params_));
}

void ReactiveBetaEngine::step(double index_price, std::span<const double> stock_prices) {
    if (stock_prices.size() != betas_.size()) {
        throw InputError("ReactiveBetaEngine::step: stock count mismatch");
    }
    if (!levels_.index.initialized) {
        levels_ = vol::update_levels(levels_, index_price, stock_prices, params_);
        ++days_;
        return;
    }
    const vol::IndexLevelState index_prev = levels_.index;
    auto nr = vol::normalized_returns(levels_, index_price, stock_prices);
    for (std::size_t i = 0; i < nr.stocks.size(); ++i) {
        if (levels_.frozen[i]) {
            nr.stocks[i] = kMissing;
        }
    }
    const double sig_I_prev = vol::normalized_sigma(vols_.index_var);
    std::vector<double> sig_i_prev(betas_.size());
    for (std::size_t i = 0; i < betas_.size(); ++i) {
        sig_i_prev[i] = vol::normalized_sigma(vols_.stock_var[i]);
    }

    levels_ = vol::update_levels(levels_, index_price, stock_prices, params_);
    vols_ = vol::update_reactive_vols(vols_, levels_, nr.index, nr.stocks, params_);
    const double sig_I_now = vol::normalized_sigma(vols_.index_var);

    for (std::size_t i = 0; i < betas_.size(); ++i) {
        if (is_missing(nr.stocks[i])) {
            continue;
        }
        BetaStepInput in;
        in.index_prev = &index_prev;
        in.index_now = &levels_.index;
        in.stock_now = &levels_.stocks[i];
        in.tilde_sigma_I_prev = sig_I_prev;
        in.tilde_sigma_i_prev = sig_i_prev[i];
        in.tilde_sigma_I_now = sig_I_now;
        in.tilde_sigma_i_now = vol::normalized_sigma(vols_.stock_var[i]);
        in.tilde_r_I = nr.index;
        in.tilde_r_i = nr.stocks[i];
        betas_[i] = update_beta(betas_[i], in, params_);
    }
    ++days_;
}

std::optional<double> ReactiveBetaEngine::sigma(std::size_t i) const {
    if (!vols_.stock_var.at(i).initialized) {
        return std::nullopt;
    }
    return vols_.sigma_stocks[i];
}

std::optional<double> ReactiveBetaEngine::sigma_index() const {
    if (!vols_.index_var.initialized) {
        return std::nullopt;
    }
    return vols_.sigma_index;
}

}  // namespace rbeta::beta
