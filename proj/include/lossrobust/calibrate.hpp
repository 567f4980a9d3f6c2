#pragma once

#include <cstddef>
#include <string>

#include "lossrobust/linalg.hpp"

namespace lossrobust {
namespace calibrate {

enum class CalibMethod { OrderStatistic, TailoredBound, PhiDivergenceCorrection, SubGaussianBound };

std::string calib_method_name(CalibMethod m);

/// Held-out loss sample, sorted ascending on construction.
struct ValidationLosses {
    Vec sorted;

    explicit ValidationLosses(Vec values);
    std::size_t size() const { return sorted.size(); }
};

struct CalibrationResult {
    CalibMethod method = CalibMethod::OrderStatistic;
    double alpha = 0.0;
    double radius = 0.0;
    std::size_t order_index = 0; // 1-based index of the chosen order statistic, 0 if unused
    std::size_t n = 0;           // sample count behind the calibration
    double bound_at_radius = 0.0;

    std::string to_csv_row() const;   // matches header method,alpha,radius,i,N,bound_at_radius
    static std::string csv_header();
};

/**
 * @brief Finite-sample radius from the i-th ascending order statistic,
 * i = ceil((N+1)(1-alpha)).  Guarantees violation probability at most
 * 1 - i/(N+1) <= alpha for an exchangeable fresh loss; throws when i > N
 * (fewer than ceil(1/alpha)-1 samples).
 */
CalibrationResult radius_order_statistic(const ValidationLosses& losses, double alpha);

/**
 * @brief Tail-weight transfer function for the max-component bound:
 * q(t) = exp(-1/2)(1/t - 1/2) + exp(-2) - exp(-t) for t in (0,2), 0 for t >= 2.
 * Decreasing, and convex after composing with t -> 1/t.
 */
double q_function(double t);

/**
 * @brief Per-sample standardized component losses backing the sub-Gaussian
 * max-component bound.  Row i holds ((y_ij - yhat_ij)/sigma_ij)^2 over
 * components j; t_max is the row maximum and l_total the sum of column means.
 */
struct TailoredInputs {
    Matrix component_losses;
    Vec t_max;
    double l_total = 0.0;
    std::size_t n_components = 0;

    explicit TailoredInputs(Matrix losses);
};

/**
 * @brief Estimated violation bound at radius rho.
 *
 * Large-sample form (default): mean_i exp(-(rho^2 - L)/(2 t_i)) + eps_hat
 * with eps_hat = mean_i q((rho^2-L)/t_i) - q((rho^2-L)/mean_i t_i).
 * Exact form: mean_i exp(-(rho^2/t_i - m)/2) + exp(m/2) * eps_hat with
 * q arguments rho^2/t_i.  Requires rho^2 >= L in the large-sample form.
 */
double tailored_bound(const TailoredInputs& in, double rho, bool large_sample = true);

/// Smallest rho with tailored_bound(rho) <= alpha, by bisection to 1e-9 relative.
CalibrationResult radius_tailored(const TailoredInputs& in, double alpha, bool large_sample = true);

/**
 * @brief Upper bound on the Jensen gap eps_hat of the large-sample form:
 * beta * Var(t_max^2) / (rho^2 - L)^2 with beta = exp(-1/a)(2a-1)/a^4,
 * a = (3+sqrt(3))/6.
 */
double jensen_gap_upper_bound(const TailoredInputs& in, double rho);

/**
 * @brief Divergence-ball radius chi2_{classes-1,1-alpha} / (2N) for a KL ball
 * around an empirical distribution estimated from N samples.
 */
CalibrationResult radius_phi_divergence(std::size_t n_samples, std::size_t classes, double alpha);

/**
 * @brief Closed-shape sub-Gaussian radius c * sqrt(2 ln(1/alpha)) where c^2 is
 * the mean standardized second moment of the validation losses (per-component
 * squared residuals), the scale estimate of the independent-component
 * exponential tail guarantee exp(-rho^2 / (2 c^2)).
 */
CalibrationResult radius_sub_gaussian(const Matrix& component_losses, double alpha);

/// Quantile of the chi-square distribution with k degrees of freedom.
double chi_square_quantile(std::size_t k, double prob);

namespace detail {
/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);
} // namespace detail

} // namespace calibrate
} // namespace lossrobust
