#include "lossrobust/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lossrobust/csv.hpp"

namespace lossrobust {
namespace calibrate {

std::string calib_method_name(CalibMethod m) {
    switch (m) {
        case CalibMethod::OrderStatistic: return "order_statistic";
        case CalibMethod::TailoredBound: return "tailored_bound";
        case CalibMethod::PhiDivergenceCorrection: return "phi_divergence";
        case CalibMethod::SubGaussianBound: return "sub_gaussian";
    }
    throw std::logic_error("calib_method_name: bad method");
}

ValidationLosses::ValidationLosses(Vec values) : sorted(std::move(values)) {
    if (sorted.empty()) throw std::invalid_argument("ValidationLosses: empty sample");
    for (double v : sorted)
        if (!std::isfinite(v)) throw std::invalid_argument("ValidationLosses: non-finite loss");
    std::sort(sorted.begin(), sorted.end());
}

std::string CalibrationResult::csv_header() { return "method,alpha,radius,i,N,bound_at_radius"; }

std::string CalibrationResult::to_csv_row() const {
    std::ostringstream out;
    out << calib_method_name(method) << ',' << format_double(alpha) << ',' << format_double(radius)
        << ',' << order_index << ',' << n << ',' << format_double(bound_at_radius);
    return out.str();
}

CalibrationResult radius_order_statistic(const ValidationLosses& losses, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("radius_order_statistic: alpha must lie in (0,1)");
    const std::size_t n = losses.size();
    const double raw = (static_cast<double>(n) + 1.0) * (1.0 - alpha);
    const auto i = static_cast<std::size_t>(std::ceil(raw - 1e-12));
    if (i > n) {
        std::size_t minimal = static_cast<std::size_t>(std::ceil(1.0 / alpha - 1e-12)) - 1;
        throw std::invalid_argument("radius_order_statistic: insufficient samples (need at least " +
                                    std::to_string(minimal) + " for alpha=" + format_double(alpha) + ")");
    }
    CalibrationResult r;
    r.method = CalibMethod::OrderStatistic;
    r.alpha = alpha;
    r.radius = losses.sorted[i - 1];
    r.order_index = i;
    r.n = n;
    r.bound_at_radius = 1.0 - static_cast<double>(i) / (static_cast<double>(n) + 1.0);
    return r;
}

double q_function(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("q_function: t must be positive");
    if (t >= 2.0) return 0.0;
    return std::exp(-0.5) * (1.0 / t - 0.5) + std::exp(-2.0) - std::exp(-t);
}

TailoredInputs::TailoredInputs(Matrix losses) : component_losses(std::move(losses)) {
    if (component_losses.rows == 0 || component_losses.cols == 0)
        throw std::invalid_argument("TailoredInputs: empty loss matrix");
    n_components = component_losses.cols;
    t_max.resize(component_losses.rows);
    for (std::size_t i = 0; i < component_losses.rows; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < component_losses.cols; ++j) {
            double v = component_losses(i, j);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("TailoredInputs: losses must be finite and nonnegative");
            m = std::max(m, v);
        }
        if (!(m > 0.0))
            throw std::invalid_argument("TailoredInputs: each sample needs a positive maximum loss");
        t_max[i] = m;
    }
    for (std::size_t j = 0; j < component_losses.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < component_losses.rows; ++i) s += component_losses(i, j);
        l_total += s / static_cast<double>(component_losses.rows);
    }
}

namespace {

/// mean_i q(s/t_i) - q(s/mean_t) for s > 0, with the 1/s leading terms of q
/// combined symbolically.  Evaluating the two q means separately loses: as
/// s -> 0 each side grows like exp(-1/2)*mean_t/s while the difference tends
/// to 0, so naive subtraction amplifies rounding noise by 1/s.
double q_mean_gap(const Vec& t_max, double mean_t, double s) {
    const double c_half = std::exp(-0.5), c_two = std::exp(-2.0);
    const std::size_t n = t_max.size();
    double sum_t = 0.0, sum_exp = 0.0;
    std::size_t active = 0;
    for (double t : t_max)
        if (s < 2.0 * t) {  // q(s/t) > 0 region
            sum_t += t;
            sum_exp += std::exp(-s / t);
            ++active;
        }
    const double f = static_cast<double>(active) / static_cast<double>(n);
    const double a = sum_t / static_cast<double>(n);
    const double e = sum_exp / static_cast<double>(n);
    const bool mean_active = s < 2.0 * mean_t;
    const double m_act = mean_active ? 1.0 : 0.0;
    // When every row is active, a == mean_t bit for bit, so the 1/s term
    // vanishes exactly; otherwise the excluded t_i are <= s/2 and the term is
    // bounded by exp(-1/2)/2.
    double lead = c_half * (a - m_act * mean_t) / s;
    return lead - c_half * (f - m_act) / 2.0 + c_two * (f - m_act) - e +
           m_act * std::exp(-s / mean_t);
}

}  // namespace

double tailored_bound(const TailoredInputs& in, double rho, bool large_sample) {
    if (!(rho > 0.0)) throw std::invalid_argument("tailored_bound: rho must be positive");
    const double rho2 = rho * rho;
    const std::size_t n = in.t_max.size();
    const double mean_t = mean(in.t_max);
    if (large_sample) {
        double excess = rho2 - in.l_total;
        if (excess < 0.0) {
            // sqrt(l_total)^2 can undershoot l_total by an ulp at the bracket edge
            if (rho2 >= in.l_total * (1.0 - 1e-12)) excess = 0.0;
            else
                throw std::invalid_argument(
                    "tailored_bound: large-sample form needs rho^2 >= total mean loss");
        }
        if (excess == 0.0) return 1.0;  // limit: exp terms -> 1, Jensen gap -> 0
        double exp_term = 0.0;
        for (double t : in.t_max) exp_term += std::exp(-excess / (2.0 * t));
        exp_term /= static_cast<double>(n);
        return exp_term + q_mean_gap(in.t_max, mean_t, excess);
    }
    const double m = static_cast<double>(in.n_components);
    double exp_term = 0.0;
    for (double t : in.t_max) exp_term += std::exp(-(rho2 / t - m) / 2.0);
    exp_term /= static_cast<double>(n);
    return exp_term + std::exp(m / 2.0) * q_mean_gap(in.t_max, mean_t, rho2);
}

CalibrationResult radius_tailored(const TailoredInputs& in, double alpha, bool large_sample) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("radius_tailored: alpha must lie in (0,1]");
    CalibrationResult r;
    r.method = CalibMethod::TailoredBound;
    r.alpha = alpha;
    r.n = in.t_max.size();

    double lo = std::sqrt(std::max(in.l_total, 1e-300));
    if (alpha == 1.0 || tailored_bound(in, lo, large_sample) <= alpha) {
        r.radius = lo;
        r.bound_at_radius = tailored_bound(in, lo, large_sample);
        return r;
    }
    double hi = lo * 1e3 + 1e3;
    if (tailored_bound(in, hi, large_sample) > alpha)
        throw std::runtime_error("radius_tailored: bound exceeds alpha over the whole bracket");
    while ((hi - lo) > 1e-9 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        if (tailored_bound(in, mid, large_sample) <= alpha) hi = mid;
        else lo = mid;
    }
    r.radius = hi;
    r.bound_at_radius = tailored_bound(in, hi, large_sample);
    return r;
}

double jensen_gap_upper_bound(const TailoredInputs& in, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("jensen_gap_upper_bound: rho must be positive");
    const double excess = rho * rho - in.l_total;
    if (!(excess > 0.0))
        throw std::invalid_argument("jensen_gap_upper_bound: needs rho^2 > total mean loss");
    const double a = (3.0 + std::sqrt(3.0)) / 6.0;
    const double beta = std::exp(-1.0 / a) * (2.0 * a - 1.0) / (a * a * a * a);
    Vec t2(in.t_max.size());
    for (std::size_t i = 0; i < t2.size(); ++i) t2[i] = in.t_max[i] * in.t_max[i];
    return beta * variance(t2) / (excess * excess);
}

CalibrationResult radius_phi_divergence(std::size_t n_samples, std::size_t classes, double alpha) {
    if (n_samples == 0) throw std::invalid_argument("radius_phi_divergence: no samples");
    if (classes < 2) throw std::invalid_argument("radius_phi_divergence: need at least two classes");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("radius_phi_divergence: alpha must lie in (0,1)");
    CalibrationResult r;
    r.method = CalibMethod::PhiDivergenceCorrection;
    r.alpha = alpha;
    r.n = n_samples;
    r.radius = chi_square_quantile(classes - 1, 1.0 - alpha) / (2.0 * static_cast<double>(n_samples));
    r.bound_at_radius = alpha;
    return r;
}

CalibrationResult radius_sub_gaussian(const Matrix& component_losses, double alpha) {
    if (component_losses.rows == 0 || component_losses.cols == 0)
        throw std::invalid_argument("radius_sub_gaussian: empty loss matrix");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("radius_sub_gaussian: alpha must lie in (0,1)");
    double c2 = 0.0;
    for (double v : component_losses.data) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("radius_sub_gaussian: losses must be finite and nonnegative");
        c2 += v;
    }
    c2 /= static_cast<double>(component_losses.data.size());
    CalibrationResult r;
    r.method = CalibMethod::SubGaussianBound;
    r.alpha = alpha;
    r.n = component_losses.rows;
    r.radius = std::sqrt(2.0 * c2 * std::log(1.0 / alpha));
    r.bound_at_radius = alpha;
    return r;
}

namespace detail {

// Series expansion for x < a+1, modified Lentz continued fraction otherwise.
double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("reg_lower_gamma: a must be positive");
    if (x < 0.0) throw std::invalid_argument("reg_lower_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

} // namespace detail

double chi_square_quantile(std::size_t k, double prob) {
    if (k == 0) throw std::invalid_argument("chi_square_quantile: k must be positive");
    if (!(prob > 0.0 && prob < 1.0))
        throw std::invalid_argument("chi_square_quantile: prob must lie in (0,1)");
    const double a = static_cast<double>(k) / 2.0;
    double lo = 0.0, hi = std::max(static_cast<double>(k) * 4.0, 16.0);
    while (detail::reg_lower_gamma(a, hi / 2.0) < prob) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (detail::reg_lower_gamma(a, mid / 2.0) < prob) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace calibrate
} // namespace lossrobust
