#include "rbeta/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "rbeta/errors.hpp"
#include "rbeta/timeseries.hpp"

namespace rbeta::est {

void WeightedRegressionProblem::validate() const {
    if (x.size() != y.size()) {
        throw InputError("regression problem: x and y lengths differ");
    }
    if (x.size() < 2) {
        throw InputError("regression problem: at least two observations required");
    }
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw ConfigError("regression problem: lambda must lie in (0, 1)");
    }
    for (std::size_t t = 0; t < x.size(); ++t) {
        require_finite(x[t], "regression x");
        require_finite(y[t], "regression y");
    }
}

namespace {

// Unnormalized weights (1 - lambda)^(T - t), oldest first.
std::vector<double> raw_weights(std::size_t n, double lambda) {
    std::vector<double> w(n);
    double acc = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        w[n - 1 - k] = acc;
        acc *= (1.0 - lambda);
    }
    return w;
}

}  // namespace

std::optional<double> ols_beta(const WeightedRegressionProblem& p) {
    p.validate();
    if (p.intercept) {
        if (std::adjacent_find(p.x.begin(), p.x.end(), std::not_equal_to<>()) == p.x.end()) {
            return std::nullopt;
        }
        const auto m = ts::exp_weighted_moments(p.x, p.y, p.lambda);
        if (!(m.var_x > 0.0)) {
            return std::nullopt;
        }
        return m.cov / m.var_x;
    }
    const auto w = ts::exp_weights(p.x.size(), p.lambda);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < p.x.size(); ++t) {
        sxy += w[t] * p.x[t] * p.y[t];
        sxx += w[t] * p.x[t] * p.x[t];
    }
    if (!(sxx > 0.0)) {
        return std::nullopt;
    }
    return sxy / sxx;
}

// ----------------------------------------------------------- quantile ----

namespace {

double check_loss(double u, double theta) { return u >= 0.0 ? theta * u : (theta - 1.0) * u; }

class QuantileSolver {
public:
    QuantileSolver(const WeightedRegressionProblem& p, double theta)
        : p_(p), theta_(theta), w_(raw_weights(p.x.size(), p.lambda)), buf_(p.x.size()) {
        for (double v : w_) {
            total_ += v;
        }
    }

    // Profiled objective: min over alpha for a fixed slope.
    std::pair<double, double> profile(double beta) {
        ++evaluations_;
        const std::size_t n = p_.x.size();
        for (std::size_t t = 0; t < n; ++t) {
            buf_[t] = {p_.y[t] - beta * p_.x[t], w_[t]};
        }
        std::sort(buf_.begin(), buf_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const double target = theta_ * total_;
        double cum = 0.0;
        double alpha = buf_.back().first;
        for (const auto& [r, w] : buf_) {
            cum += w;
            if (cum >= target) {
                alpha = r;
                break;
            }
        }
        double obj = 0.0;
        for (const auto& [r, w] : buf_) {
            obj += w * check_loss(r - alpha, theta_);
        }
        return {obj, alpha};
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const WeightedRegressionProblem& p_;
    double theta_;
    std::vector<double> w_;
    std::vector<std::pair<double, double>> buf_;
    double total_ = 0.0;
    std::size_t evaluations_ = 0;
};

}  // namespace

double quantile_objective(const WeightedRegressionProblem& p, double theta, double alpha,
                          double beta) {
    p.validate();
    const auto w = raw_weights(p.x.size(), p.lambda);
    double obj = 0.0;
    for (std::size_t t = 0; t < p.x.size(); ++t) {
        obj += w[t] * check_loss(p.y[t] - alpha - beta * p.x[t], theta);
    }
    return obj;
}

std::optional<QuantileFit> quantile_beta(const WeightedRegressionProblem& p, double theta,
                                         std::vector<double>* trace) {
    p.validate();
    if (!(theta > 0.0 && theta < 1.0)) {
        throw ConfigError("quantile level must lie in (0, 1)");
    }
    if (std::adjacent_find(p.x.begin(), p.x.end(), std::not_equal_to<>()) == p.x.end()) {
        return std::nullopt;
    }
    const auto m = ts::exp_weighted_moments(p.x, p.y, p.lambda);

    QuantileSolver solver(p, theta);
    QuantileFit best;
    best.objective = std::numeric_limits<double>::infinity();
    auto eval = [&](double b) {
        const auto [obj, alpha] = solver.profile(b);
        if (obj < best.objective) {
            best.objective = obj;
            best.alpha = alpha;
            best.beta = b;
        }
        return obj;
    };
    auto record = [&] {
        if (trace != nullptr) {
            trace->push_back(best.objective);
        }
    };

    // Bracket a minimizer of the convex profiled objective around the OLS slope.
    const bool spread = m.var_x > 0.0;
    double b = spread ? m.cov / m.var_x : 0.0;
    double h = spread ? std::max(1e-3, std::sqrt(std::max(m.var_y, 0.0) / m.var_x)) : 1.0;
    double a = b - h;
    double c = b + h;
    double gb = eval(b);
    double ga = eval(a);
    double gc = eval(c);
    record();
    constexpr int kMaxExpand = 200;
    int guard = 0;
    while (ga < gb) {
        if (++guard > kMaxExpand) {
            throw NumericalError("quantile regression: unable to bracket the minimum");
        }
        c = b;
        gc = gb;
        b = a;
        gb = ga;
        h *= 2.0;
        a = b - h;
        ga = eval(a);
        record();
    }
    while (gc < gb) {
        if (++guard > kMaxExpand) {
            throw NumericalError("quantile regression: unable to bracket the minimum");
        }
        a = b;
        ga = gb;
        b = c;
        gb = gc;
        h *= 2.0;
        c = b + h;
        gc = eval(c);
        record();
    }

    // Golden-section search on [a, c].
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c - inv_phi * (c - a);
    double x2 = a + inv_phi * (c - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    record();
    for (int it = 0; it < 400; ++it) {
        const double width = c - a;
        if (width <= 1e-13 * (1.0 + std::abs(best.beta))) {
            break;
        }
        if (f1 <= f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = eval(x2);
        }
        record();
    }
    best.evaluations = solver.evaluations();
    return best;
}

std::optional<double> mad_beta(const WeightedRegressionProblem& p) {
    const auto fit = quantile_beta(p, 0.5);
    if (!fit) {
        return std::nullopt;
    }
    return fit->beta;
}

double trimean_combine(double q25, double q50, double q75) {
    return 0.25 * q25 + 0.5 * q50 + 0.25 * q75;
}

std::optional<double> trimean_beta(const WeightedRegressionProblem& p) {
    const auto lo = quantile_beta(p, 0.25);
    const auto mid = quantile_beta(p, 0.5);
    const auto hi = quantile_beta(p, 0.75);
    if (!lo || !mid || !hi) {
        return std::nullopt;
    }
    return trimean_combine(lo->beta, mid->beta, hi->beta);
}

// -------------------------------------------------- streaming covariance ----

ExpWeightedCovariance::ExpWeightedCovariance(double lambda) : decay_(1.0 - lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw ConfigError("ExpWeightedCovariance: lambda must lie in (0, 1)");
    }
}

void ExpWeightedCovariance::update(double x, double y) {
    require_finite(x, "ExpWeightedCovariance x");
    require_finite(y, "ExpWeightedCovariance y");
    sw_ = decay_ * sw_ + 1.0;
    sx_ = decay_ * sx_ + x;
    sy_ = decay_ * sy_ + y;
    sxx_ = decay_ * sxx_ + x * x;
    syy_ = decay_ * syy_ + y * y;
    sxy_ = decay_ * sxy_ + x * y;
    ++count_;
}

double ExpWeightedCovariance::mean_x() const { return count_ ? sx_ / sw_ : 0.0; }
double ExpWeightedCovariance::mean_y() const { return count_ ? sy_ / sw_ : 0.0; }

double ExpWeightedCovariance::var_x() const {
    if (count_ == 0) {
        return 0.0;
    }
    const double mx = mean_x();
    return std::max(0.0, sxx_ / sw_ - mx * mx);
}

double ExpWeightedCovariance::var_y() const {
    if (count_ == 0) {
        return 0.0;
    }
    const double my = mean_y();
    return std::max(0.0, syy_ / sw_ - my * my);
}

double ExpWeightedCovariance::cov() const {
    if (count_ == 0) {
        return 0.0;
    }
    return sxy_ / sw_ - mean_x() * mean_y();
}

std::optional<double> ExpWeightedCovariance::beta() const {
    const double v = var_x();
    if (count_ < 2 || !(v > 0.0)) {
        return std::nullopt;
    }
    return cov() / v;
}

// ---------------------------------------------------------------- DCC ----

void GarchParams::validate() const {
    if (!(a >= 0.0 && b >= 0.0 && gamma >= 0.0)) {
        throw ConfigError("GARCH coefficients must be non-negative");
    }
    if (!(a + b + gamma / 2.0 < 1.0)) {
        throw ConfigError("GARCH coefficients violate stationarity a + b + gamma/2 < 1");
    }
    if (!(unconditional_sigma > 0.0) || !std::isfinite(unconditional_sigma)) {
        throw ConfigError("GARCH unconditional volatility must be positive");
    }
}

void DccParams::validate() const {
    if (!(a_rho >= 0.0 && b_rho >= 0.0 && gamma_rho >= 0.0)) {
        throw ConfigError("DCC coefficients must be non-negative");
    }
    if (!(a_rho + b_rho + gamma_rho / 4.0 < 1.0)) {
        throw ConfigError("DCC coefficients violate a_rho + b_rho + gamma_rho/4 < 1");
    }
    // The diagonal q terms carry the intercept 1 - a - b - gamma/2.
    if (!(a_rho + b_rho + gamma_rho / 2.0 < 1.0)) {
        throw ConfigError("DCC coefficients violate a_rho + b_rho + gamma_rho/2 < 1");
    }
    if (!(rho_bar > -1.0 && rho_bar < 1.0)) {
        throw ConfigError("unconditional correlation must lie in (-1, 1)");
    }
}

void DccModel::validate() const {
    stock.validate();
    index.validate();
    corr.validate();
}

DccCoefficients DccCoefficients::published_dcc() {
    DccCoefficients c;
    c.a = 0.099;
    c.b = 0.89;
    c.gamma = 0.0;
    c.a_rho = 0.0079;
    c.b_rho = 0.9261;
    c.gamma_rho = 0.0;
    return c;
}

DccCoefficients DccCoefficients::published_adcc() {
    DccCoefficients c;
    c.a = 0.0;
    c.b = 0.901;
    c.gamma = 0.171;
    c.a_rho = 0.0020;
    c.b_rho = 0.9512;
    c.gamma_rho = 0.0040;
    return c;
}

DccModel DccCoefficients::with_unconditionals(double sigma_i, double sigma_I,
                                              double rho_bar) const {
    DccModel m;
    m.stock = {a, b, gamma, sigma_i};
    m.index = {a, b, gamma, sigma_I};
    m.corr = {a_rho, b_rho, gamma_rho, rho_bar};
    m.asymmetry = asymmetry;
    return m;
}

double asymmetric_part(double xi, Asymmetry convention) {
    if (convention == Asymmetry::NegativeShocks) {
        return xi < 0.0 ? xi : 0.0;
    }
    return xi > 0.0 ? xi : 0.0;
}

namespace {

double clamp_rho(double rho) { return std::clamp(rho, -kRhoClamp, kRhoClamp); }

double garch_update(double sigma_prev, double xi, double xi_minus, const GarchParams& g,
                    bool& floored) {
    const double s2 = sigma_prev * sigma_prev;
    const double ubar = g.unconditional_sigma * g.unconditional_sigma;
    double v = (1.0 - g.a - g.b - g.gamma / 2.0) * ubar + g.a * s2 * xi * xi + g.b * s2 +
               g.gamma * s2 * xi_minus * xi_minus;
    const double floor = kVarianceFloor * ubar;
    if (!(v >= floor)) {
        v = floor;
        floored = true;
    }
    return std::sqrt(v);
}

}  // namespace

DccState dcc_init(const DccModel& m) {
    m.validate();
    DccState s;
    s.sigma_i = m.stock.unconditional_sigma;
    s.sigma_I = m.index.unconditional_sigma;
    s.q_ii = 1.0;
    s.q_II = 1.0;
    s.q_iI = m.corr.rho_bar;
    s.rho = clamp_rho(m.corr.rho_bar);
    s.beta = s.rho * s.sigma_i / s.sigma_I;
    return s;
}

DccState dcc_step(const DccState& prev, double r_i, double r_I, const DccModel& m) {
    require_finite(r_i, "dcc_step stock return");
    require_finite(r_I, "dcc_step index return");
    if (!(prev.sigma_i > 0.0 && prev.sigma_I > 0.0)) {
        throw StateError("dcc_step: state not initialized");
    }
    DccState s = prev;
    s.floored = false;
    const double xi_i = r_i / prev.sigma_i;
    const double xi_I = r_I / prev.sigma_I;
    const double xm_i = asymmetric_part(xi_i, m.asymmetry);
    const double xm_I = asymmetric_part(xi_I, m.asymmetry);

    s.sigma_i = garch_update(prev.sigma_i, xi_i, xm_i, m.stock, s.floored);
    s.sigma_I = garch_update(prev.sigma_I, xi_I, xm_I, m.index, s.floored);

    const auto& c = m.corr;
    const double diag = 1.0 - c.a_rho - c.b_rho - c.gamma_rho / 2.0;
    const double cross = (1.0 - c.a_rho - c.b_rho - c.gamma_rho / 4.0) * c.rho_bar;
    s.q_ii = diag + c.a_rho * xi_i * xi_i + c.b_rho * prev.q_ii + c.gamma_rho * xm_i * xm_i;
    s.q_II = diag + c.a_rho * xi_I * xi_I + c.b_rho * prev.q_II + c.gamma_rho * xm_I * xm_I;
    s.q_iI = cross + c.a_rho * xi_i * xi_I + c.b_rho * prev.q_iI + c.gamma_rho * xm_i * xm_I;
    if (!(s.q_ii > 0.0 && s.q_II > 0.0)) {
        throw NumericalError("dcc_step: non-positive diagonal q term");
    }
    s.rho = clamp_rho(s.q_iI / std::sqrt(s.q_ii * s.q_II));
    s.beta = s.rho * s.sigma_i / s.sigma_I;
    return s;
}

double dcc_loglik(std::span<const double> r_i, std::span<const double> r_I, const DccModel& m,
                  double lambda) {
    if (r_i.size() != r_I.size() || r_i.empty()) {
        throw InputError("dcc_loglik: equal non-empty return series required");
    }
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw ConfigError("dcc_loglik: lambda must lie in [0, 1)");
    }
    const double log2pi = std::log(2.0 * std::numbers::pi);
    const std::size_t n = r_i.size();
    const double decay = 1.0 - lambda;
    DccState s = dcc_init(m);
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double xi_i = r_i[t] / s.sigma_i;
        const double xi_I = r_I[t] / s.sigma_I;
        const double rho = s.rho;
        const double det = 1.0 - rho * rho;
        const double quad = (xi_i * xi_i - 2.0 * rho * xi_i * xi_I + xi_I * xi_I) / det;
        const double uu = xi_i * xi_i + xi_I * xi_I;
        const double lv = -2.0 * log2pi - uu - 2.0 * std::log(s.sigma_I) - 2.0 * std::log(s.sigma_i);
        const double lc = -std::log(det) - quad + uu;
        // Accumulate with the weight applied backwards: total = decay * total + term.
        total = decay * total + 0.5 * (lv + lc);
        s = dcc_step(s, r_i[t], r_I[t], m);
    }
    return total;
}

DccCalibration dcc_calibrate(std::span<const double> r_i, std::span<const double> r_I,
                             const DccCoefficients& fixed, double lambda,
                             const CalibrationOptions& opt) {
    if (r_i.size() != r_I.size()) {
        throw InputError("dcc_calibrate: return series lengths differ");
    }
    if (r_i.size() < opt.min_length) {
        throw InputError("dcc_calibrate: at least " + std::to_string(opt.min_length) +
                         " observations required");
    }
    for (std::size_t t = 0; t < r_i.size(); ++t) {
        require_finite(r_i[t], "dcc_calibrate stock return");
        require_finite(r_I[t], "dcc_calibrate index return");
    }

    // Weighted second moments (zero-mean model) as the starting point.
    const auto w = ts::exp_weights(r_i.size(), lambda);
    double sii = 0.0;
    double sII = 0.0;
    double siI = 0.0;
    for (std::size_t t = 0; t < r_i.size(); ++t) {
        sii += w[t] * r_i[t] * r_i[t];
        sII += w[t] * r_I[t] * r_I[t];
        siI += w[t] * r_i[t] * r_I[t];
    }
    if (!(sii > 0.0 && sII > 0.0)) {
        throw InputError("dcc_calibrate: zero return variance");
    }
    const double rho0 = std::clamp(siI / std::sqrt(sii * sII), -0.99 * kRhoClamp, 0.99 * kRhoClamp);
    std::array<double, 3> u = {0.5 * std::log(sii), 0.5 * std::log(sII),
                               std::atanh(rho0 / kRhoClamp)};

    DccCalibration out;
    auto objective = [&](const std::array<double, 3>& v) {
        ++out.evaluations;
        const double si = std::exp(v[0]);
        const double sI = std::exp(v[1]);
        const double rho = kRhoClamp * std::tanh(v[2]);
        const DccModel m = fixed.with_unconditionals(si, sI, rho);
        const double ll = dcc_loglik(r_i, r_I, m, lambda);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    double fbest = objective(u);
    std::array<double, 3> step = {0.25, 0.25, 0.25};
    const double step_tol = 1e-7;
    bool converged = false;
    double f_at_last_halving = fbest;
    while (out.evaluations < opt.max_evaluations) {
        bool improved = false;
        for (std::size_t k = 0; k < 3 && out.evaluations < opt.max_evaluations; ++k) {
            for (double sign : {1.0, -1.0}) {
                auto trial = u;
                trial[k] += sign * step[k];
                const double f = objective(trial);
                if (f < fbest) {
                    fbest = f;
                    u = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            for (double& s : step) {
                s *= 0.5;
            }
            const double max_step = *std::max_element(step.begin(), step.end());
            // Stop once a whole step-size level gained less than the
            // tolerance, or the steps are negligible.
            const double gain = f_at_last_halving - fbest;
            f_at_last_halving = fbest;
            if (max_step < step_tol || (max_step < 1e-3 && gain < opt.objective_tolerance)) {
                converged = true;
                break;
            }
        }
    }
    out.sigma_bar_i = std::exp(u[0]);
    out.sigma_bar_I = std::exp(u[1]);
    out.rho_bar = kRhoClamp * std::tanh(u[2]);
    out.loglik = -fbest;
    out.converged = converged;
    return out;
}

DccBetaResult dcc_beta(std::span<const double> r_i, std::span<const double> r_I,
                       const DccCoefficients& fixed, double lambda,
                       const CalibrationOptions& options) {
    DccBetaResult res;
    res.calibration = dcc_calibrate(r_i, r_I, fixed, lambda, options);
    const DccModel m = fixed.with_unconditionals(res.calibration.sigma_bar_i,
                                                 res.calibration.sigma_bar_I,
                                                 res.calibration.rho_bar);
    DccState s = dcc_init(m);
    for (std::size_t t = 0; t < r_i.size(); ++t) {
        s = dcc_step(s, r_i[t], r_I[t], m);
    }
    res.final_state = s;
    res.beta = s.beta;
    return res;
}

}  // namespace rbeta::est
