#pragma once

// Rival beta estimators: exponentially weighted OLS, weighted quantile
// regression (MAD, trimean), and DCC / ADCC-GJR conditional beta with a
// weighted Gaussian likelihood for the unconditional parameters.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rbeta::est {

/// Regression of y (stock returns) on x (index returns) with weights
/// proportional to (1 - lambda)^(T - t).
struct WeightedRegressionProblem {
    std::vector<double> x;
    std::vector<double> y;
    double lambda = 1.0 / 90.0;
    /// Fit an intercept (centered moments). When false the slope is the
    /// least-squares line through the origin.
    bool intercept = true;

    void validate() const;
};

/// Weighted least-squares slope; nullopt when the weighted variance of x
/// (or its second moment without intercept) is zero.
std::optional<double> ols_beta(const WeightedRegressionProblem& p);

struct QuantileFit {
    double alpha = 0.0;
    double beta = 0.0;
    double objective = 0.0;
    std::size_t evaluations = 0;
};

/// Weighted check-loss objective sum_t w_t rho_theta(y_t - alpha - beta x_t)
/// with unnormalized weights (1 - lambda)^(T - t).
double quantile_objective(const WeightedRegressionProblem& p, double theta, double alpha,
                          double beta);

/// Global minimizer of the weighted check loss. The intercept is profiled
/// out as a weighted theta-quantile of residuals and the resulting convex
/// function of the slope is minimized by bracketing and golden-section
/// search. `trace`, when given, receives the best objective after every
/// iteration. nullopt when all x are equal.
std::optional<QuantileFit> quantile_beta(const WeightedRegressionProblem& p, double theta,
                                         std::vector<double>* trace = nullptr);

std::optional<double> mad_beta(const WeightedRegressionProblem& p);

/// 0.25 b(1/4) + 0.5 b(1/2) + 0.25 b(3/4).
std::optional<double> trimean_beta(const WeightedRegressionProblem& p);
double trimean_combine(double q25, double q50, double q75);

/// Streaming exponentially weighted covariance of (x, y). Equivalent to
/// the batch weighted moments with weights (1 - lambda)^(T - t).
class ExpWeightedCovariance {
public:
    explicit ExpWeightedCovariance(double lambda);

    void update(double x, double y);

    std::size_t count() const noexcept { return count_; }
    double mean_x() const;
    double mean_y() const;
    double var_x() const;
    double var_y() const;
    double cov() const;
    /// cov / var_x; nullopt before two distinct x values.
    std::optional<double> beta() const;

private:
    double decay_;
    double sw_ = 0.0;
    double sx_ = 0.0;
    double sy_ = 0.0;
    double sxx_ = 0.0;
    double syy_ = 0.0;
    double sxy_ = 0.0;
    std::size_t count_ = 0;
};

// ---------------------------------------------------------------- DCC ----

struct GarchParams {
    double a = 0.0;
    double b = 0.0;
    double gamma = 0.0;
    double unconditional_sigma = 0.0;

    void validate() const;
};

struct DccParams {
    double a_rho = 0.0;
    double b_rho = 0.0;
    double gamma_rho = 0.0;
    double rho_bar = 0.0;

    void validate() const;
};

/// Which shocks feed the asymmetric terms.
enum class Asymmetry {
    NegativeShocks,  ///< xi^- = xi when xi < 0 (GJR leverage convention, default)
    PositiveShocks,  ///< xi^- = xi when xi > 0 (literal alternative reading)
};

struct DccModel {
    GarchParams stock;
    GarchParams index;
    DccParams corr;
    Asymmetry asymmetry = Asymmetry::NegativeShocks;

    void validate() const;
};

/// Dynamics coefficients that stay fixed during calibration.
struct DccCoefficients {
    double a = 0.0;
    double b = 0.0;
    double gamma = 0.0;
    double a_rho = 0.0;
    double b_rho = 0.0;
    double gamma_rho = 0.0;
    Asymmetry asymmetry = Asymmetry::NegativeShocks;

    /// Symmetric GARCH(1,1) + DCC published US estimates.
    static DccCoefficients published_dcc();
    /// GJR-GARCH(1,1,1) + ADCC published US estimates.
    static DccCoefficients published_adcc();

    DccModel with_unconditionals(double sigma_i, double sigma_I, double rho_bar) const;
};

inline constexpr double kRhoClamp = 0.999;
inline constexpr double kVarianceFloor = 1e-12;  ///< relative to the unconditional variance

struct DccState {
    double sigma_i = 0.0;
    double sigma_I = 0.0;
    double q_ii = 1.0;
    double q_II = 1.0;
    double q_iI = 0.0;
    double rho = 0.0;   ///< correlation of the next innovations, clamped
    double beta = 0.0;  ///< rho sigma_i / sigma_I
    bool floored = false;
};

double asymmetric_part(double xi, Asymmetry convention);

/// sigma at the unconditional values, q at (1, 1, rho_bar).
DccState dcc_init(const DccModel& m);

/// Advances the conditional volatilities and the correlation process with
/// one pair of returns: xi = r / sigma(t-1).
DccState dcc_step(const DccState& s, double r_i, double r_I, const DccModel& m);

/// Weighted Gaussian log-likelihood with weights (1 - lambda)^(T - t). Each
/// return pair is scored with the previous day's volatilities and
/// correlation.
double dcc_loglik(std::span<const double> r_i, std::span<const double> r_I, const DccModel& m,
                  double lambda);

struct DccCalibration {
    double sigma_bar_i = 0.0;
    double sigma_bar_I = 0.0;
    double rho_bar = 0.0;
    double loglik = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct CalibrationOptions {
    std::size_t max_evaluations = 10000;
    double objective_tolerance = 1e-8;
    std::size_t min_length = 100;
};

/// Maximizes the weighted likelihood over (sigma_bar_i, sigma_bar_I,
/// rho_bar) with the dynamics held fixed. Compass search in
/// (log sigma_i, log sigma_I, atanh(rho / 0.999)) started at the weighted
/// data moments. A result that exhausts the budget has converged == false.
DccCalibration dcc_calibrate(std::span<const double> r_i, std::span<const double> r_I,
                             const DccCoefficients& fixed, double lambda,
                             const CalibrationOptions& options = {});

struct DccBetaResult {
    double beta = 0.0;
    DccState final_state;
    DccCalibration calibration;
};

/// Calibrates, filters the whole path and returns the conditional beta at T.
DccBetaResult dcc_beta(std::span<const double> r_i, std::span<const double> r_I,
                       const DccCoefficients& fixed, double lambda,
                       const CalibrationOptions& options = {});

}  // namespace rbeta::est
