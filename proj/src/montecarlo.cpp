#include "rbeta/montecarlo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "rbeta/errors.hpp"
#include "rbeta/parallel.hpp"
#include "rbeta/reactive_beta.hpp"
#include "rbeta/rng.hpp"

namespace rbeta::mc {

Model parse_model(std::string_view tag) {
    std::string t(tag);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t.size() == 3 && t[0] == 'm' && t[1] == 'c' && t[2] >= '1' && t[2] <= '7') {
        return static_cast<Model>(t[2] - '0');
    }
    throw ConfigError("unknown Monte Carlo model '" + std::string(tag) + "' (expected mc1..mc7)");
}

std::string model_name(Model m) { return "mc" + std::to_string(static_cast<int>(m)); }

void McConfig::validate() const {
    const int id = static_cast<int>(model);
    if (id < 1 || id > 7) {
        throw ConfigError("invalid Monte Carlo model");
    }
    if (T < 2) {
        throw ConfigError("path length T must be at least 2");
    }
    if (!(stock_vol > 0.0 && index_vol > 0.0 && annualization > 0.0)) {
        throw ConfigError("volatilities and annualization must be positive");
    }
    if (!stock_vol_is_residual && !(stock_vol > beta * index_vol)) {
        throw ConfigError("stock volatility must exceed beta times the index volatility");
    }
    if (t_dof <= 2) {
        throw ConfigError("t_dof must exceed 2");
    }
    if (!(ou_relaxation > 1.0) || !(ou_volvol >= 0.0)) {
        throw ConfigError("OU relaxation must exceed one day and volvol be non-negative");
    }
    if (!(initial_price > 0.0)) {
        throw ConfigError("initial price must be positive");
    }
    if (!(return_floor > -1.0 && return_floor < 0.0)) {
        throw ConfigError("return floor must lie in (-1, 0)");
    }
    reactive.validate();
}

double McConfig::daily_index_vol() const { return index_vol / std::sqrt(annualization); }
double McConfig::daily_stock_vol() const {
    const double target = stock_vol / std::sqrt(annualization);
    if (!stock_vol_is_residual) {
        return target;
    }
    const double b = beta * daily_index_vol();
    return std::sqrt(target * target + b * b);
}

double McConfig::daily_residual_vol() const {
    const double target = stock_vol / std::sqrt(annualization);
    if (stock_vol_is_residual) {
        return target;
    }
    const double b = beta * daily_index_vol();
    return std::sqrt(target * target - b * b);
}

LevelMapping McConfig::effective_level_mapping() const {
    if (level_mapping) {
        return *level_mapping;
    }
    return model == Model::MC5 ? LevelMapping::Reactive : LevelMapping::Slow;
}

namespace {

void reserve_path(McPath& p, std::size_t T) {
    p.r_I.resize(T);
    p.r_i.resize(T);
    p.true_beta.resize(T);
    p.true_rho.resize(T);
    p.true_sigma_I.resize(T);
    p.true_sigma_i.resize(T);
}

double residual_draw(const McConfig& c, bool heavy, double sd, rng::Stream& g) {
    return heavy ? rng::student_t_scaled(c.t_dof, sd, g) : sd * g.normal();
}

void market_model(const McConfig& c, McPath& p, rng::Stream& g) {
    const bool heavy = c.model == Model::MC2;
    const double sI = c.daily_index_vol();
    const double se = c.daily_residual_vol();
    const double si = std::sqrt(c.beta * c.beta * sI * sI + se * se);
    for (std::size_t t = 0; t < c.T; ++t) {
        const double rI = sI * g.normal();
        p.r_I[t] = rI;
        p.r_i[t] = c.beta * rI + residual_draw(c, heavy, se, g);
        p.true_beta[t] = c.beta;
        p.true_sigma_I[t] = sI;
        p.true_sigma_i[t] = si;
        p.true_rho[t] = c.beta * sI / si;
    }
}

double clamp_return(double r, const McConfig& c, McPath& p) {
    if (r < c.return_floor) {
        ++p.clamped;
        return c.return_floor;
    }
    return r;
}

void reactive_model(const McConfig& c, McPath& p, rng::Stream& g) {
    const bool heavy = c.model != Model::MC3;
    const bool stochastic = c.model == Model::MC5;
    const auto& rp = c.reactive;
    const LevelMapping mapping = c.effective_level_mapping();
    auto mapped = [&](double level, double slow, double price) {
        switch (mapping) {
            case LevelMapping::Reactive:
                return level;
            case LevelMapping::Specific:
                return price * (1.0 + vol::filter_phi((slow - price) / price, rp.phi));
            case LevelMapping::Slow:
                return slow;
        }
        return level;
    };
    auto index_level = [&](const vol::IndexLevelState& s) { return mapped(s.level, s.slow, s.price); };
    auto stock_level = [&](const vol::StockLevelState& s) { return mapped(s.level, s.slow, s.price); };

    const double sI_bar = c.daily_index_vol();
    const double se_bar = c.daily_residual_vol();
    const double ou_var = rng::ou_stationary_variance(c.ou_relaxation, c.ou_volvol);
    double x1 = 0.0;
    double x2 = 0.0;
    if (stochastic) {
        x1 = std::sqrt(ou_var) * g.normal();
        x2 = std::sqrt(ou_var) * g.normal();
    }

    double I = c.initial_price;
    double S = c.initial_price;
    vol::IndexLevelState idx = vol::update_index_levels({}, I, rp);
    vol::StockLevelState st = vol::update_stock_levels({}, S, idx, rp);

    // Squared relative normalized volatility, seeded at its stationary mean.
    const double ratio_bar = se_bar / sI_bar;
    double kappa = c.beta * c.beta + ratio_bar * ratio_bar;
    double bn = c.beta;  // normalized beta applied to today's draw

    for (std::size_t t = 0; t < c.T; ++t) {
        double sI = sI_bar;
        double se = se_bar;
        if (stochastic) {
            if (t > 0) {
                x1 = rng::ou_step(x1, c.ou_relaxation, c.ou_volvol, g);
                x2 = rng::ou_step(x2, c.ou_relaxation, c.ou_volvol, g);
            }
            sI = sI_bar * std::exp(x1 - ou_var);
            se = sI * ratio_bar * std::exp(x2 - ou_var);
        }
        const double rn_I = sI * g.normal();
        const double rn_i = bn * rn_I + residual_draw(c, heavy, se, g);

        const double rI = clamp_return(rn_I * index_level(idx) / I, c, p);
        const double ri = clamp_return(rn_i * stock_level(st) / S, c, p);
        I *= 1.0 + rI;
        S *= 1.0 + ri;
        idx = vol::update_index_levels(idx, I, rp);
        st = vol::update_stock_levels(st, S, idx, rp);
        p.r_I[t] = rI;
        p.r_i[t] = ri;

        double next_bn = c.beta;
        if (stochastic) {
            const double rel_sq = c.beta * c.beta + (se / sI) * (se / sI);
            kappa = (1.0 - rp.lambda_beta) * kappa + rp.lambda_beta * rel_sq;
            const double L = beta::correction_L(idx, rp);
            const double F = beta::correction_F(bn, std::sqrt(rel_sq), kappa, rp);
            next_bn = c.beta * L * F;
        }
        bn = next_bn;

        const double index_ratio = index_level(idx) / I;
        const double stock_ratio = stock_level(st) / S;
        const double sn_i = std::sqrt(bn * bn * sI * sI + se * se);
        p.true_beta[t] = bn * stock_ratio / index_ratio;
        p.true_sigma_I[t] = sI * index_ratio;
        p.true_sigma_i[t] = sn_i * stock_ratio;
        p.true_rho[t] = bn * sI / sn_i;
    }
}

void dcc_model(const McConfig& c, McPath& p, rng::Stream& g) {
    const auto coeffs = c.model == Model::MC6 ? est::DccCoefficients::published_dcc()
                                              : est::DccCoefficients::published_adcc();
    const double rho_bar = c.beta * c.index_vol / c.stock_vol;
    if (!(std::abs(rho_bar) < 1.0)) {
        throw ConfigError("DCC models need beta * index_vol < stock_vol");
    }
    const auto m = coeffs.with_unconditionals(c.stock_vol / std::sqrt(c.annualization),
                                              c.daily_index_vol(), rho_bar);
    est::DccState s = est::dcc_init(m);
    for (std::size_t t = 0; t < c.T; ++t) {
        const double z1 = g.normal();
        const double z2 = g.normal();
        const double xi_I = z1;
        const double xi_i = s.rho * z1 + std::sqrt(1.0 - s.rho * s.rho) * z2;
        const double rI = s.sigma_I * xi_I;
        const double ri = s.sigma_i * xi_i;
        s = est::dcc_step(s, ri, rI, m);
        p.r_I[t] = rI;
        p.r_i[t] = ri;
        p.true_beta[t] = s.beta;
        p.true_rho[t] = s.rho;
        p.true_sigma_I[t] = s.sigma_I;
        p.true_sigma_i[t] = s.sigma_i;
    }
}

}  // namespace

McPath generate_path(const McConfig& c, std::uint64_t path_id) {
    c.validate();
    McPath p;
    p.path_id = path_id;
    reserve_path(p, c.T);
    rng::Stream g(c.seed, path_id, static_cast<std::uint32_t>(c.model));
    switch (c.model) {
        case Model::MC1:
        case Model::MC2:
            market_model(c, p, g);
            break;
        case Model::MC3:
        case Model::MC4:
        case Model::MC5:
            reactive_model(c, p, g);
            break;
        case Model::MC6:
        case Model::MC7:
            dcc_model(c, p, g);
            break;
    }
    return p;
}

std::vector<McPath> generate(const McConfig& c, std::size_t first, std::size_t count,
                             std::size_t workers) {
    c.validate();
    std::vector<McPath> out(count);
    parallel_for(count, workers, [&](std::size_t k) { out[k] = generate_path(c, first + k); });
    return out;
}

void write_paths_csv(std::ostream& out, std::span<const McPath> paths) {
    out << "path_id,t,r_I,r_i,true_beta,true_rho,true_sigma_I,true_sigma_i\n";
    out.precision(17);
    for (const auto& p : paths) {
        for (std::size_t t = 0; t < p.size(); ++t) {
            out << p.path_id << ',' << t << ',' << p.r_I[t] << ',' << p.r_i[t] << ','
                << p.true_beta[t] << ',' << p.true_rho[t] << ',' << p.true_sigma_I[t] << ','
                << p.true_sigma_i[t] << '\n';
        }
    }
}

}  // namespace rbeta::mc
