#include "rbeta/study.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>

#include "rbeta/errors.hpp"
#include "rbeta/parallel.hpp"
#include "rbeta/reactive_beta.hpp"

namespace rbeta::study {

Estimator parse_estimator(std::string_view tag) {
    std::string t(tag);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "ols") return Estimator::OLS;
    if (t == "mad") return Estimator::MAD;
    if (t == "trm") return Estimator::TRM;
    if (t == "dcc") return Estimator::DCC;
    if (t == "adcc") return Estimator::ADCC;
    if (t == "reactive") return Estimator::Reactive;
    throw ConfigError("unknown estimator '" + std::string(tag) +
                      "' (expected ols|mad|trm|dcc|adcc|reactive)");
}

std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::OLS: return "ols";
        case Estimator::MAD: return "mad";
        case Estimator::TRM: return "trm";
        case Estimator::DCC: return "dcc";
        case Estimator::ADCC: return "adcc";
        case Estimator::Reactive: return "reactive";
    }
    return "unknown";
}

std::vector<Estimator> all_estimators() {
    return {Estimator::OLS, Estimator::MAD, Estimator::TRM,
            Estimator::DCC, Estimator::ADCC, Estimator::Reactive};
}

double reactive_beta_at_end(std::span<const double> r_i, std::span<const double> r_I,
                            const vol::ReactiveParams& params) {
    if (r_i.size() != r_I.size() || r_i.empty()) {
        throw InputError("reactive_beta_at_end: equal non-empty return series required");
    }
    beta::ReactiveBetaEngine engine(1, params);
    double I = 100.0;
    double S = 100.0;
    engine.step(I, std::span<const double>(&S, 1));
    for (std::size_t t = 0; t < r_i.size(); ++t) {
        I *= 1.0 + r_I[t];
        S *= 1.0 + r_i[t];
        engine.step(I, std::span<const double>(&S, 1));
    }
    const auto b = engine.beta(0);
    if (!b) {
        throw NumericalError("reactive beta undefined at the end of the path");
    }
    return *b;
}

namespace {

est::WeightedRegressionProblem problem(std::span<const double> r_i, std::span<const double> r_I,
                                       double lambda) {
    est::WeightedRegressionProblem p;
    p.x.assign(r_I.begin(), r_I.end());
    p.y.assign(r_i.begin(), r_i.end());
    p.lambda = lambda;
    p.intercept = true;
    return p;
}

double require_value(const std::optional<double>& v, const char* what) {
    if (!v) {
        throw NumericalError(std::string(what) + " undefined on a degenerate path");
    }
    return *v;
}

}  // namespace

double measure_beta(Estimator e, std::span<const double> r_i, std::span<const double> r_I,
                    const StudyOptions& o) {
    switch (e) {
        case Estimator::OLS:
            return require_value(est::ols_beta(problem(r_i, r_I, o.lambda_beta)), "OLS beta");
        case Estimator::MAD:
            return require_value(est::mad_beta(problem(r_i, r_I, o.lambda_beta)), "MAD beta");
        case Estimator::TRM:
            return require_value(est::trimean_beta(problem(r_i, r_I, o.lambda_beta)), "TRM beta");
        case Estimator::DCC:
            return est::dcc_beta(r_i, r_I, est::DccCoefficients::published_dcc(), o.lambda_beta,
                                 o.calibration)
                .beta;
        case Estimator::ADCC:
            return est::dcc_beta(r_i, r_I, est::DccCoefficients::published_adcc(),
                                 o.lambda_beta, o.calibration)
                .beta;
        case Estimator::Reactive:
            return reactive_beta_at_end(r_i, r_I, o.reactive);
    }
    throw ConfigError("unknown estimator");
}

const EstimatorResult& StudyResult::get(Estimator e) const {
    for (const auto& r : results) {
        if (r.estimator == e) {
            return r;
        }
    }
    throw InputError("estimator " + estimator_name(e) + " not part of this study");
}

StudyResult run_study(const mc::McConfig& config, std::span<const Estimator> estimators,
                      const StudyOptions& o) {
    config.validate();
    if (config.n_paths == 0) {
        throw ConfigError("run_study: n_paths must be positive");
    }
    std::vector<Estimator> ests(estimators.begin(), estimators.end());
    if (std::find(ests.begin(), ests.end(), Estimator::OLS) == ests.end()) {
        ests.insert(ests.begin(), Estimator::OLS);
    }
    const std::size_t n = config.n_paths;
    const std::size_t m = ests.size();
    std::vector<double> estimates(n * m);
    std::vector<double> truth(n);
    std::vector<char> winner(n);
    std::vector<std::size_t> clamped(n);
    std::atomic<std::size_t> not_converged{0};

    parallel_for(n, o.workers, [&](std::size_t k) {
        const mc::McPath path = mc::generate_path(config, k);
        truth[k] = path.true_beta.back();
        winner[k] = eval::winner_flag(path.r_i, path.r_I, o.winner_window) ? 1 : 0;
        clamped[k] = path.clamped;
        for (std::size_t j = 0; j < m; ++j) {
            if (ests[j] == Estimator::DCC || ests[j] == Estimator::ADCC) {
                const auto coeffs = ests[j] == Estimator::DCC
                                        ? est::DccCoefficients::published_dcc()
                                        : est::DccCoefficients::published_adcc();
                const auto res = est::dcc_beta(path.r_i, path.r_I, coeffs, o.lambda_beta,
                                               o.calibration);
                if (!res.calibration.converged) {
                    not_converged.fetch_add(1);
                }
                estimates[k * m + j] = res.beta;
            } else {
                estimates[k * m + j] = measure_beta(ests[j], path.r_i, path.r_I, o);
            }
        }
    });

    StudyResult out;
    out.model = config.model;
    out.n_paths = n;
    out.T = config.T;
    out.dcc_not_converged = not_converged.load();
    for (std::size_t c : clamped) {
        out.clamped_returns += c;
    }
    std::vector<EstimatorResult> all(m);
    for (std::size_t j = 0; j < m; ++j) {
        all[j].estimator = ests[j];
        all[j].samples.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto& s = all[j].samples[k];
            s.estimated = estimates[k * m + j];
            s.truth = truth[k];
            s.winner = winner[k] != 0;
            s.low = truth[k] < 1.0;
        }
    }
    const auto ols_row = eval::table2_stats(all[0].samples);
    out.ols_error_variance = ols_row.error_variance;
    for (std::size_t j = 0; j < m; ++j) {
        all[j].row = eval::table2_stats(all[j].samples, out.ols_error_variance);
    }
    for (auto& r : all) {
        if (std::find(estimators.begin(), estimators.end(), r.estimator) != estimators.end()) {
            out.results.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace rbeta::study
