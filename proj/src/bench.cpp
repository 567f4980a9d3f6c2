#include "lossrobust/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lossrobust/csv.hpp"
#include "lossrobust/mlcore.hpp"
#include "lossrobust/rng.hpp"

namespace lossrobust {
namespace bench {

namespace {

constexpr double kViolationSlack = 1e-12;

std::string problem_label(synthgen::Problem p) {
    switch (p) {
        case synthgen::Problem::Newsvendor: return "newsvendor";
        case synthgen::Problem::Portfolio: return "portfolio";
        case synthgen::Problem::ShortestPath: return "shortest_path";
    }
    throw std::logic_error("problem_label: unknown problem");
}

bool regression_method(Method m) {
    return m == Method::Mse || m == Method::Msev || m == Method::ClassicalEllipsoidal ||
           m == Method::Knn;
}

/// Mean per-component semi-axis of an ellipsoidal set; loss threshold otherwise.
double mean_semi_axis(const lossgeom::UncertaintySetSpec& set) {
    if (set.loss != lossgeom::LossKind::SquaredError &&
        set.loss != lossgeom::LossKind::ScaledSquaredError)
        return set.radius;
    std::size_t m = set.dim();
    double nr = set.norm_radius();
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double sig = set.loss == lossgeom::LossKind::ScaledSquaredError ? set.scale[j] : 1.0;
        double w = set.component_weights.empty() ? 1.0 : set.component_weights[j];
        s += sig / std::sqrt(w);
    }
    return nr * s / static_cast<double>(m);
}

/// One scalar model per target column, trained on standardized targets.
std::vector<mlcore::PredictorModel> train_per_target(const Matrix& x,
                                                     const std::vector<Split>& split,
                                                     const Matrix& y_std, mlcore::Head head,
                                                     mlcore::TrainConfig tc, uint64_t head_seed) {
    std::vector<mlcore::PredictorModel> models;
    models.reserve(y_std.cols);
    LabeledDataset scalar;
    scalar.X = x;
    scalar.split = split;
    scalar.Y = Matrix(y_std.rows, 1);
    for (std::size_t j = 0; j < y_std.cols; ++j) {
        for (std::size_t i = 0; i < y_std.rows; ++i) scalar.Y(i, 0) = y_std(i, j);
        tc.seed = Rng::derive(head_seed, j);
        models.push_back(mlcore::train(scalar, head, tc));
    }
    return models;
}

/// Stacks scalar-model means into raw target units.
Matrix predict_means(const std::vector<mlcore::PredictorModel>& models, const Matrix& x,
                     const Standardizer& st) {
    Matrix out(x.rows, models.size());
    for (std::size_t i = 0; i < x.rows; ++i) {
        Vec xi = x.row(i);
        for (std::size_t j = 0; j < models.size(); ++j)
            out(i, j) = st.invert(models[j].predict(xi).mean[0], j);
    }
    return out;
}

void predict_means_sigmas(const std::vector<mlcore::PredictorModel>& models, const Matrix& x,
                          const Standardizer& st, Matrix& mean, Matrix& sigma) {
    mean = Matrix(x.rows, models.size());
    sigma = Matrix(x.rows, models.size());
    for (std::size_t i = 0; i < x.rows; ++i) {
        Vec xi = x.row(i);
        for (std::size_t j = 0; j < models.size(); ++j) {
            mlcore::Prediction p = models[j].predict(xi);
            mean(i, j) = st.invert(p.mean[0], j);
            sigma(i, j) = std::sqrt(p.variance[0]) * st.std[j];
        }
    }
}

Matrix predict_probs(const mlcore::PredictorModel& model, const Matrix& x) {
    Matrix out(x.rows, model.raw_out());
    for (std::size_t i = 0; i < x.rows; ++i) {
        mlcore::Prediction p = model.predict(x.row(i));
        for (std::size_t j = 0; j < p.probs.size(); ++j) out(i, j) = p.probs[j];
    }
    return out;
}

Matrix squared_residuals(const Matrix& y, const Matrix& mean) {
    Matrix out(y.rows, y.cols);
    for (std::size_t i = 0; i < y.rows; ++i)
        for (std::size_t j = 0; j < y.cols; ++j) {
            double d = y(i, j) - mean(i, j);
            out(i, j) = d * d;
        }
    return out;
}

Matrix standardized_squared_residuals(const Matrix& y, const Matrix& mean, const Matrix& sigma) {
    Matrix out(y.rows, y.cols);
    for (std::size_t i = 0; i < y.rows; ++i)
        for (std::size_t j = 0; j < y.cols; ++j) {
            double d = (y(i, j) - mean(i, j)) / sigma(i, j);
            out(i, j) = d * d;
        }
    return out;
}

/// Indices of the k nearest training covariates, distance then index order.
std::vector<std::size_t> nearest_neighbors(const Matrix& train_x, const Vec& query,
                                           std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist(train_x.rows);
    for (std::size_t i = 0; i < train_x.rows; ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < train_x.cols; ++j) {
            double d = train_x(i, j) - query[j];
            d2 += d * d;
        }
        dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

/// Per-seed data and model products shared across target alphas.
struct SeedData {
    Matrix train_x, train_y, val_x, val_y, test_x, test_y;
    // ellipsoidal methods
    Matrix mse_val_mean, mse_test_mean;
    Matrix msev_val_mean, msev_val_sig, msev_test_mean, msev_test_sig;
    std::optional<calibrate::TailoredInputs> mse_tail, msev_tail;
    // newsvendor methods
    Matrix clf_test_prob;
    std::optional<calibrate::ValidationLosses> ce_losses;
    std::vector<int> test_label;
    double base_rate = 0.0;
    double test_rig = 0.0;
    Vec p_emp;
};

struct SeedMetrics {
    double radius = 0.0;
    double objective = 0.0;
    double regret = 0.0;
    double violation = 0.0;
    double rig_value = 0.0;
    bool has_rig = false;
};

struct RowOutcome {
    double robust = 0.0;
    double realized = 0.0;
    double regret = 0.0;
    double semi_axis = 0.0;
    double violated = 0.0;
};

int label_of_row(const Matrix& y, std::size_t i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < y.cols; ++j)
        if (y(i, j) > y(i, best)) best = j;
    return static_cast<int>(best);
}

/// Runs fn over test rows, optionally under OpenMP; first error wins.
template <typename Fn>
void for_each_test_row(std::size_t n_rows, std::size_t threads, bool use_parallel, Fn&& fn) {
    std::size_t workers = use_parallel ? std::max<std::size_t>(threads, 1) : 1;
    if (workers <= 1) {
        for (std::size_t t = 0; t < n_rows; ++t) fn(t);
        return;
    }
    bool failed = false;
    std::string message;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(static_cast<int>(workers))
#endif
    for (long long t = 0; t < static_cast<long long>(n_rows); ++t) {
        if (failed) continue;
        try {
            fn(static_cast<std::size_t>(t));
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!failed) {
                    failed = true;
                    message = e.what();
                }
            }
        }
    }
    if (failed) throw std::runtime_error(message);
}

SeedMetrics aggregate_rows(const std::vector<RowOutcome>& rows) {
    SeedMetrics m;
    for (const RowOutcome& r : rows) {
        m.radius += r.semi_axis;
        m.objective += r.robust;
        m.regret += r.regret;
        m.violation += r.violated;
    }
    double n = static_cast<double>(rows.size());
    m.radius /= n;
    m.objective /= n;
    m.regret /= n;
    m.violation /= n;
    return m;
}

} // namespace

std::string MethodSpec::name() const {
    switch (method) {
        case Method::MlCrossEntropyKl: return "ml_ce_kl";
        case Method::Mse: return "mse";
        case Method::Msev: return "msev";
        case Method::ClassicalEllipsoidal: return "classical";
        case Method::PhiDivergence: return "phi_div";
        case Method::Knn: return "knn" + std::to_string(knn_k);
    }
    throw std::logic_error("MethodSpec::name: unknown method");
}

MethodSpec MethodSpec::from_name(const std::string& s, std::size_t knn_k) {
    MethodSpec spec;
    spec.knn_k = knn_k;
    if (s == "ml_ce_kl" || s == "ml-ce-kl" || s == "ml") {
        spec.method = Method::MlCrossEntropyKl;
    } else if (s == "mse") {
        spec.method = Method::Mse;
    } else if (s == "msev") {
        spec.method = Method::Msev;
    } else if (s == "classical") {
        spec.method = Method::ClassicalEllipsoidal;
    } else if (s == "phi_div" || s == "phi-div") {
        spec.method = Method::PhiDivergence;
    } else if (s.rfind("knn", 0) == 0) {
        spec.method = Method::Knn;
        if (s.size() > 3) spec.knn_k = static_cast<std::size_t>(std::stoul(s.substr(3)));
    } else {
        throw std::invalid_argument("unknown method name '" + s + "'");
    }
    return spec;
}

double rig(const Vec& prob_label1, const std::vector<int>& labels, double base_rate) {
    if (prob_label1.size() != labels.size() || prob_label1.empty())
        throw std::invalid_argument("rig: predictions and labels must align and be nonempty");
    if (!(base_rate > 0.0) || !(base_rate < 1.0))
        throw std::invalid_argument("rig: degenerate base rate");
    double ce_model = 0.0;
    double ce_base = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double p = labels[i] == 1 ? prob_label1[i] : 1.0 - prob_label1[i];
        double b = labels[i] == 1 ? base_rate : 1.0 - base_rate;
        ce_model -= std::log(std::max(p, 1e-300));
        ce_base -= std::log(b);
    }
    return 1.0 - ce_model / ce_base;
}

double regret_newsvendor(const robustopt::NewsvendorProblem& prob, double x, double demand) {
    double oracle = std::min(prob.order_cost, prob.backlog_cost) * demand;
    return prob.cost(x, demand) - oracle;
}

double regret_portfolio(const Vec& x, const Vec& y) {
    double best = y[0];
    for (double v : y) best = std::max(best, v);
    return best - dot(y, x);
}

double regret_shortest_path(int grid_side, const Vec& x, const Vec& y) {
    return dot(y, x) - robustopt::dp_shortest_path(grid_side, y);
}

double violation_rate(const Vec& robust_values, const Vec& realized_costs) {
    if (robust_values.size() != realized_costs.size())
        throw std::invalid_argument("violation_rate: size mismatch");
    if (robust_values.empty()) return 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < robust_values.size(); ++i)
        if (realized_costs[i] > robust_values[i] + kViolationSlack) ++count;
    return static_cast<double>(count) / static_cast<double>(robust_values.size());
}

lossgeom::UncertaintySetSpec classical_ellipsoid_baseline(const Matrix& train_targets,
                                                          const Matrix& val_targets, double alpha,
                                                          calibrate::CalibMethod policy) {
    if (train_targets.rows < 2)
        throw std::invalid_argument("classical_ellipsoid_baseline: need at least 2 train rows");
    if (val_targets.cols != train_targets.cols)
        throw std::invalid_argument("classical_ellipsoid_baseline: column mismatch");
    std::vector<std::size_t> all(train_targets.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Standardizer st = fit_standardizer(train_targets, all);
    for (double s : st.std)
        if (!(s > 0.0))
            throw std::invalid_argument("classical_ellipsoid_baseline: zero target std");

    lossgeom::UncertaintySetSpec set;
    set.loss = lossgeom::LossKind::ScaledSquaredError;
    set.center = st.mean;
    set.scale = st.std;

    Matrix z2(val_targets.rows, val_targets.cols);
    for (std::size_t i = 0; i < val_targets.rows; ++i)
        for (std::size_t j = 0; j < val_targets.cols; ++j) {
            double z = st.apply(val_targets(i, j), j);
            z2(i, j) = z * z;
        }
    calibrate::CalibrationResult cal;
    if (policy == calibrate::CalibMethod::OrderStatistic) {
        Vec norms(val_targets.rows);
        for (std::size_t i = 0; i < val_targets.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < val_targets.cols; ++j) s += z2(i, j);
            norms[i] = std::sqrt(s);
        }
        cal = calibrate::radius_order_statistic(calibrate::ValidationLosses(norms), alpha);
    } else if (policy == calibrate::CalibMethod::SubGaussianBound) {
        cal = calibrate::radius_sub_gaussian(z2, alpha);
    } else {
        throw std::invalid_argument(
            "classical_ellipsoid_baseline: policy must be OrderStatistic or SubGaussianBound");
    }
    set.radius = cal.radius * cal.radius;
    set.validate();
    return set;
}

lossgeom::UncertaintySetSpec knn_baseline(const Matrix& train_x, const Matrix& train_y,
                                          const Vec& query, std::size_t k) {
    if (k < 2) throw std::invalid_argument("knn_baseline: k must be at least 2");
    if (k > train_x.rows) throw std::invalid_argument("knn_baseline: k exceeds train size");
    if (query.size() != train_x.cols)
        throw std::invalid_argument("knn_baseline: query dimension mismatch");
    std::vector<std::size_t> idx = nearest_neighbors(train_x, query, k);
    Standardizer st = fit_standardizer(train_y, idx);
    for (double s : st.std)
        if (!(s > 0.0)) throw std::invalid_argument("knn_baseline: zero target std in neighborhood");
    lossgeom::UncertaintySetSpec set;
    set.loss = lossgeom::LossKind::ScaledSquaredError;
    set.center = st.mean;
    set.scale = st.std;
    set.radius = 0.0;
    set.validate();
    return set;
}

calibrate::CalibrationResult knn_radius(const Matrix& train_x, const Matrix& train_y,
                                        const Matrix& val_x, const Matrix& val_y, std::size_t k,
                                        double alpha) {
    Vec losses(val_x.rows);
    for (std::size_t i = 0; i < val_x.rows; ++i) {
        lossgeom::UncertaintySetSpec set = knn_baseline(train_x, train_y, val_x.row(i), k);
        double s = 0.0;
        for (std::size_t j = 0; j < val_y.cols; ++j) {
            double z = (val_y(i, j) - set.center[j]) / set.scale[j];
            s += z * z;
        }
        losses[i] = std::sqrt(s);
    }
    return calibrate::radius_order_statistic(calibrate::ValidationLosses(losses), alpha);
}

void ExperimentConfig::validate() const {
    if (n_grid.empty() || noise_grid.empty() || alpha_grid.empty())
        throw std::invalid_argument("ExperimentConfig: empty grid");
    if (methods.empty()) throw std::invalid_argument("ExperimentConfig: no methods");
    if (seeds == 0) throw std::invalid_argument("ExperimentConfig: seeds must be positive");
    for (double a : alpha_grid)
        if (!(a > 0.0) || !(a < 1.0))
            throw std::invalid_argument("ExperimentConfig: alpha must lie in (0,1)");
    for (std::size_t n : n_grid)
        if (n < 4) throw std::invalid_argument("ExperimentConfig: n too small");
    for (double e : noise_grid)
        if (e < 0.0) throw std::invalid_argument("ExperimentConfig: negative noise");
    bool newsv = problem == synthgen::Problem::Newsvendor;
    for (const MethodSpec& m : methods) {
        if (newsv && regression_method(m.method))
            throw std::invalid_argument("ExperimentConfig: method " + m.name() +
                                        " does not apply to the newsvendor problem");
        if (!newsv && !regression_method(m.method))
            throw std::invalid_argument("ExperimentConfig: method " + m.name() +
                                        " applies only to the newsvendor problem");
        if (m.method == Method::Knn && m.knn_k < 2)
            throw std::invalid_argument("ExperimentConfig: knn k must be at least 2");
    }
    if (!deg_grid.empty() && problem != synthgen::Problem::ShortestPath)
        throw std::invalid_argument("ExperimentConfig: deg grid applies to shortest path only");
    if (problem == synthgen::Problem::ShortestPath && (grid_side < 2 || grid_side > 8))
        throw std::invalid_argument("ExperimentConfig: grid_side out of range");
}

namespace {

SeedMetrics run_regression_method(const ExperimentConfig& cfg, const SeedData& sd,
                                  const MethodSpec& mspec, double alpha) {
    std::size_t n_test = sd.test_x.rows;
    std::vector<RowOutcome> rows(n_test);

    // Per-row uncertainty set factory; the radius is calibrated once.
    double rho = 0.0;
    lossgeom::UncertaintySetSpec fixed_set;
    calibrate::CalibrationResult knn_cal;
    switch (mspec.method) {
        case Method::Mse:
            rho = calibrate::radius_tailored(*sd.mse_tail, alpha).radius;
            break;
        case Method::Msev:
            rho = calibrate::radius_tailored(*sd.msev_tail, alpha).radius;
            break;
        case Method::ClassicalEllipsoidal:
            fixed_set = classical_ellipsoid_baseline(sd.train_y, sd.val_y, alpha,
                                                     calibrate::CalibMethod::SubGaussianBound);
            break;
        case Method::Knn:
            knn_cal = knn_radius(sd.train_x, sd.train_y, sd.val_x, sd.val_y, mspec.knn_k, alpha);
            break;
        default:
            throw std::logic_error("run_regression_method: non-regression method");
    }

    for_each_test_row(n_test, cfg.threads, cfg.use_parallel, [&](std::size_t t) {
        lossgeom::UncertaintySetSpec set;
        switch (mspec.method) {
            case Method::Mse:
                set.loss = lossgeom::LossKind::SquaredError;
                set.center = sd.mse_test_mean.row(t);
                set.radius = rho * rho;
                break;
            case Method::Msev:
                set.loss = lossgeom::LossKind::ScaledSquaredError;
                set.center = sd.msev_test_mean.row(t);
                set.scale = sd.msev_test_sig.row(t);
                set.radius = rho * rho;
                break;
            case Method::ClassicalEllipsoidal:
                set = fixed_set;
                break;
            case Method::Knn:
                set = knn_baseline(sd.train_x, sd.train_y, sd.test_x.row(t), mspec.knn_k);
                set.radius = knn_cal.radius * knn_cal.radius;
                break;
            default:
                throw std::logic_error("run_regression_method: non-regression method");
        }

        Vec y = sd.test_y.row(t);
        RowOutcome& out = rows[t];
        if (cfg.problem == synthgen::Problem::Portfolio) {
            robustopt::RobustSolution sol = robustopt::solve_portfolio(set);
            out.robust = sol.robust_value;
            out.realized = -dot(y, sol.decision);
            out.regret = regret_portfolio(sol.decision, y);
        } else {
            robustopt::RobustSolution sol = robustopt::solve_shortest_path(cfg.grid_side, set);
            out.robust = sol.robust_value;
            out.realized = dot(y, sol.decision);
            out.regret = regret_shortest_path(cfg.grid_side, sol.decision, y);
        }
        out.semi_axis = mean_semi_axis(set);
        out.violated = out.realized > out.robust + kViolationSlack ? 1.0 : 0.0;
    });

    return aggregate_rows(rows);
}

SeedMetrics run_newsvendor_method(const ExperimentConfig& cfg, const SeedData& sd,
                                  const MethodSpec& mspec, double alpha) {
    const robustopt::NewsvendorProblem& prob = cfg.newsvendor;
    std::size_t n_test = sd.test_x.rows;
    std::vector<RowOutcome> rows(n_test);

    if (mspec.method == Method::MlCrossEntropyKl) {
        double rho = calibrate::radius_order_statistic(*sd.ce_losses, alpha).radius;
        for_each_test_row(n_test, cfg.threads, cfg.use_parallel, [&](std::size_t t) {
            lossgeom::UncertaintySetSpec set;
            set.loss = lossgeom::LossKind::CrossEntropy;
            set.center = sd.clf_test_prob.row(t);
            set.radius = rho;
            robustopt::RobustSolution sol = robustopt::solve_newsvendor(prob, set);
            double d = prob.demands[static_cast<std::size_t>(sd.test_label[t])];
            RowOutcome& out = rows[t];
            out.robust = sol.robust_value;
            out.realized = prob.cost(sol.decision[0], d);
            out.regret = regret_newsvendor(prob, sol.decision[0], d);
            out.semi_axis = rho;
            out.violated = out.realized > out.robust + kViolationSlack ? 1.0 : 0.0;
        });
        SeedMetrics m = aggregate_rows(rows);
        m.rig_value = sd.test_rig;
        m.has_rig = true;
        return m;
    }

    // PhiDivergence: covariate-free KL ball around the train scenario mix.
    double rho = calibrate::radius_phi_divergence(sd.train_x.rows, sd.p_emp.size(), alpha).radius;
    lossgeom::UncertaintySetSpec set;
    set.loss = lossgeom::LossKind::CrossEntropy;
    set.center = sd.p_emp;
    set.radius = rho;
    robustopt::RobustSolution sol = robustopt::solve_newsvendor(prob, set);
    double x_star = sol.decision[0];

    // Guarantee level: the worst scenario cost among scenarios the ball can
    // push above probability alpha; scenarios the ball keeps below alpha are
    // excluded from the alpha-level certificate.
    Vec costs = prob.cost_vector(x_star);
    double tau = -std::numeric_limits<double>::infinity();
    double fallback = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sd.p_emp.size(); ++j) {
        Vec indicator(sd.p_emp.size(), 0.0);
        indicator[j] = 1.0;
        double worst_prob = robustopt::kl_worst_case(sd.p_emp, indicator, rho).value;
        fallback = std::max(fallback, costs[j]);
        if (worst_prob > alpha) tau = std::max(tau, costs[j]);
    }
    if (!std::isfinite(tau)) tau = fallback;

    for_each_test_row(n_test, cfg.threads, cfg.use_parallel, [&](std::size_t t) {
        double d = prob.demands[static_cast<std::size_t>(sd.test_label[t])];
        RowOutcome& out = rows[t];
        out.robust = tau;
        out.realized = prob.cost(x_star, d);
        out.regret = regret_newsvendor(prob, x_star, d);
        out.semi_axis = rho;
        out.violated = out.realized > out.robust + kViolationSlack ? 1.0 : 0.0;
    });
    SeedMetrics m = aggregate_rows(rows);
    m.rig_value = 0.0; // the base-rate predictor gains no information
    m.has_rig = true;
    return m;
}

SeedData build_seed_data(const ExperimentConfig& cfg, std::size_t n, double noise, int deg,
                         uint64_t run_seed) {
    synthgen::GenConfig gen;
    gen.problem = cfg.problem;
    gen.seed = Rng::derive(run_seed, 1);
    gen.n_samples = n;
    gen.n_val = cfg.n_val;
    gen.n_test = cfg.n_test;
    gen.p = cfg.p;
    gen.noise = noise;
    gen.n_assets = cfg.n_assets;
    gen.grid_side = cfg.grid_side;
    gen.deg = deg;
    LabeledDataset ds = synthgen::generate(gen);

    SeedData sd;
    sd.train_x = ds.x_rows(Split::Train);
    sd.train_y = ds.y_rows(Split::Train);
    sd.val_x = ds.x_rows(Split::Val);
    sd.val_y = ds.y_rows(Split::Val);
    sd.test_x = ds.x_rows(Split::Test);
    sd.test_y = ds.y_rows(Split::Test);

    bool want_mse = false, want_msev = false, want_clf = false;
    for (const MethodSpec& m : cfg.methods) {
        want_mse |= m.method == Method::Mse;
        want_msev |= m.method == Method::Msev;
        want_clf |= m.method == Method::MlCrossEntropyKl;
    }

    mlcore::TrainConfig tc = cfg.train;
    if (want_mse || want_msev) {
        Standardizer st = fit_standardizer(ds.Y, ds.indices(Split::Train));
        for (double s : st.std)
            if (!(s > 0.0)) throw std::invalid_argument("build_seed_data: constant target column");
        Matrix y_std = ds.Y;
        for (std::size_t i = 0; i < y_std.rows; ++i)
            for (std::size_t j = 0; j < y_std.cols; ++j) y_std(i, j) = st.apply(y_std(i, j), j);
        if (want_mse) {
            std::vector<mlcore::PredictorModel> models = train_per_target(
                ds.X, ds.split, y_std, mlcore::Head::Regression, tc, Rng::derive(run_seed, 11));
            sd.mse_val_mean = predict_means(models, sd.val_x, st);
            sd.mse_test_mean = predict_means(models, sd.test_x, st);
            sd.mse_tail.emplace(squared_residuals(sd.val_y, sd.mse_val_mean));
        }
        if (want_msev) {
            std::vector<mlcore::PredictorModel> models =
                train_per_target(ds.X, ds.split, y_std, mlcore::Head::RegressionWithVariance, tc,
                                 Rng::derive(run_seed, 12));
            predict_means_sigmas(models, sd.val_x, st, sd.msev_val_mean, sd.msev_val_sig);
            predict_means_sigmas(models, sd.test_x, st, sd.msev_test_mean, sd.msev_test_sig);
            sd.msev_tail.emplace(
                standardized_squared_residuals(sd.val_y, sd.msev_val_mean, sd.msev_val_sig));
        }
    }
    if (want_clf) {
        tc.seed = Rng::derive(run_seed, 13);
        mlcore::PredictorModel model = mlcore::train(ds, mlcore::Head::SoftmaxClassifier, tc);
        Matrix val_prob = predict_probs(model, sd.val_x);
        sd.clf_test_prob = predict_probs(model, sd.test_x);
        Vec ce(sd.val_x.rows);
        for (std::size_t i = 0; i < sd.val_x.rows; ++i) {
            int lbl = label_of_row(sd.val_y, i);
            ce[i] = -std::log(std::max(val_prob(i, static_cast<std::size_t>(lbl)), 1e-300));
        }
        sd.ce_losses.emplace(std::move(ce));

        std::size_t ones = 0;
        for (std::size_t i = 0; i < sd.train_y.rows; ++i)
            if (label_of_row(sd.train_y, i) == 1) ++ones;
        sd.base_rate = static_cast<double>(ones) / static_cast<double>(sd.train_y.rows);

        sd.test_label.resize(sd.test_y.rows);
        Vec p1(sd.test_y.rows);
        std::vector<int> labels(sd.test_y.rows);
        for (std::size_t i = 0; i < sd.test_y.rows; ++i) {
            sd.test_label[i] = label_of_row(sd.test_y, i);
            labels[i] = sd.test_label[i] == 1 ? 1 : 0;
            p1[i] = sd.clf_test_prob(i, 1);
        }
        sd.test_rig = rig(p1, labels, sd.base_rate);
    }
    if (cfg.problem == synthgen::Problem::Newsvendor) {
        if (sd.test_label.empty()) {
            sd.test_label.resize(sd.test_y.rows);
            for (std::size_t i = 0; i < sd.test_y.rows; ++i)
                sd.test_label[i] = label_of_row(sd.test_y, i);
        }
        sd.p_emp.assign(sd.train_y.cols, 0.0);
        for (std::size_t i = 0; i < sd.train_y.rows; ++i)
            sd.p_emp[static_cast<std::size_t>(label_of_row(sd.train_y, i))] += 1.0;
        for (double& v : sd.p_emp) v /= static_cast<double>(sd.train_y.rows);
    }
    return sd;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.problem == synthgen::Problem::ShortestPath && cfg.deg_grid.empty()) cfg.deg_grid = {1};
    if (cfg.newsvendor.demands.empty()) cfg.newsvendor.demands = {1.0, 10.0};
    cfg.validate();
    if (cfg.problem == synthgen::Problem::Newsvendor) cfg.newsvendor.validate();

    bool has_deg = cfg.problem == synthgen::Problem::ShortestPath;
    std::vector<int> degs = has_deg ? cfg.deg_grid : std::vector<int>{0};

    ExperimentReport rep;
    rep.problem_name = problem_label(cfg.problem);
    rep.seeds = cfg.seeds;

    std::size_t cell_idx = 0;
    for (std::size_t n : cfg.n_grid) {
        for (double noise : cfg.noise_grid) {
            for (int deg : degs) {
                std::size_t n_alpha = cfg.alpha_grid.size();
                std::size_t n_method = cfg.methods.size();
                std::vector<std::vector<std::vector<SeedMetrics>>> acc(
                    n_alpha, std::vector<std::vector<SeedMetrics>>(
                                 n_method, std::vector<SeedMetrics>(cfg.seeds)));

                uint64_t cell_seed = Rng::derive(cfg.master_seed, cell_idx);
                for (std::size_t s = 0; s < cfg.seeds; ++s) {
                    std::ostringstream ctx;
                    ctx << "problem=" << rep.problem_name << " n=" << n << " noise=" << noise;
                    if (has_deg) ctx << " deg=" << deg;
                    ctx << " seed=" << s;
                    SeedData sd;
                    try {
                        sd = build_seed_data(cfg, n, noise, deg, Rng::derive(cell_seed, s));
                    } catch (const std::exception& e) {
                        throw std::runtime_error(ctx.str() + ": " + e.what());
                    }
                    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
                        for (std::size_t mi = 0; mi < n_method; ++mi) {
                            try {
                                acc[ai][mi][s] =
                                    cfg.problem == synthgen::Problem::Newsvendor
                                        ? run_newsvendor_method(cfg, sd, cfg.methods[mi],
                                                                cfg.alpha_grid[ai])
                                        : run_regression_method(cfg, sd, cfg.methods[mi],
                                                                cfg.alpha_grid[ai]);
                            } catch (const std::exception& e) {
                                throw std::runtime_error(ctx.str() + " alpha=" +
                                                         format_double(cfg.alpha_grid[ai]) +
                                                         " method=" + cfg.methods[mi].name() +
                                                         ": " + e.what());
                            }
                        }
                    }
                }

                for (std::size_t ai = 0; ai < n_alpha; ++ai) {
                    for (std::size_t mi = 0; mi < n_method; ++mi) {
                        MethodCell cell;
                        cell.n = n;
                        cell.noise = noise;
                        cell.deg = deg;
                        cell.has_deg = has_deg;
                        cell.alpha = cfg.alpha_grid[ai];
                        cell.method = cfg.methods[mi];
                        for (std::size_t s = 0; s < cfg.seeds; ++s) {
                            const SeedMetrics& m = acc[ai][mi][s];
                            cell.seed_radius.push_back(m.radius);
                            cell.seed_objective.push_back(m.objective);
                            cell.seed_regret.push_back(m.regret);
                            cell.seed_violation.push_back(m.violation);
                            cell.radius += m.radius;
                            cell.objective += m.objective;
                            cell.regret += m.regret;
                            cell.violation += m.violation;
                            cell.rig_value += m.rig_value;
                            cell.has_rig = m.has_rig;
                        }
                        double ns = static_cast<double>(cfg.seeds);
                        cell.radius /= ns;
                        cell.objective /= ns;
                        cell.regret /= ns;
                        cell.violation /= ns;
                        cell.rig_value /= ns;
                        rep.rows.push_back(std::move(cell));
                    }
                }
                ++cell_idx;
            }
        }
    }
    return rep;
}

std::string ExperimentReport::csv_header() {
    return "problem,N,noise,deg,alpha,method,radius,objective,regret,violation,rig";
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
    out << ExperimentReport::csv_header() << "\n";
    for (const MethodCell& c : report.rows) {
        out << report.problem_name << ',' << c.n << ',' << format_double(c.noise) << ',';
        if (c.has_deg) out << c.deg;
        out << ',' << format_double(c.alpha) << ',' << c.method.name() << ','
            << format_double(c.radius) << ',' << format_double(c.objective) << ','
            << format_double(c.regret) << ',' << format_double(c.violation) << ',';
        if (c.has_rig) out << format_double(c.rig_value);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write_report_csv: write failed for " + path);
}

void write_figure_csvs(const ExperimentReport& report, const std::string& dir) {
    for (const char* metric : {"objective", "regret"}) {
        std::string path = dir + "/fig_" + report.problem_name + "_" + metric + ".csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("write_figure_csvs: cannot open " + path);
        out << "problem,N,noise,deg,method,alpha,violation,value\n";
        for (const MethodCell& c : report.rows) {
            double value = std::string(metric) == "objective" ? c.objective : c.regret;
            out << report.problem_name << ',' << c.n << ',' << format_double(c.noise) << ',';
            if (c.has_deg) out << c.deg;
            out << ',' << c.method.name() << ',' << format_double(c.alpha) << ','
                << format_double(c.violation) << ',' << format_double(value) << "\n";
        }
        if (!out) throw std::runtime_error("write_figure_csvs: write failed for " + path);
    }
}

} // namespace bench
} // namespace lossrobust
