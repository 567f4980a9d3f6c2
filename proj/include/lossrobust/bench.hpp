#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lossrobust/calibrate.hpp"
#include "lossrobust/linalg.hpp"
#include "lossrobust/lossgeom.hpp"
#include "lossrobust/mlcore.hpp"
#include "lossrobust/robustopt.hpp"
#include "lossrobust/synthgen.hpp"

namespace lossrobust {
namespace bench {

/**
 * @brief Training protocol for benchmark model fits: run to the epoch cap and
 * keep the best validation snapshot.  Heteroscedastic fits pass through a long
 * flat stretch of validation loss while the shared trunk reorganizes toward
 * the variance structure; a short patience window stops inside that stretch
 * and freezes the variance head at a constant.
 */
inline mlcore::TrainConfig bench_train_config() {
    mlcore::TrainConfig t;
    t.patience = t.max_epochs;
    return t;
}

enum class Method {
    MlCrossEntropyKl,     // classifier + cross-entropy ball, KL inner maximization
    Mse,                  // regression mean, Euclidean ball on raw residuals
    Msev,                 // heteroscedastic regression, per-query scaled ball
    ClassicalEllipsoidal, // covariate-free train-moment ellipsoid
    PhiDivergence,        // covariate-free KL ball with chi-square radius
    Knn,                  // neighbor-moment ellipsoid per query
};

struct MethodSpec {
    Method method = Method::Mse;
    std::size_t knn_k = 10;

    std::string name() const;
    static MethodSpec from_name(const std::string& s, std::size_t knn_k = 10);
};

/**
 * @brief Relative information gain of a binary classifier over the
 * constant base-rate predictor: 1 - CE_model / CE_base.  Predictions are
 * the predicted probability of label 1; both cross-entropies are evaluated
 * on the same rows.  Degenerate base rates (0 or 1) are rejected.
 */
double rig(const Vec& prob_label1, const std::vector<int>& labels, double base_rate);

/// Realized cost minus the hindsight-optimal cost min(b, c) * demand.
double regret_newsvendor(const robustopt::NewsvendorProblem& prob, double x, double demand);

/// max_j y_j - y'x: gap to the best single asset under realized returns y.
double regret_portfolio(const Vec& x, const Vec& y);

/// y'x minus the DP-optimal path cost under realized edge costs y.
double regret_shortest_path(int grid_side, const Vec& x, const Vec& y);

/// Fraction of instances whose realized cost exceeds the robust value + 1e-12.
double violation_rate(const Vec& robust_values, const Vec& realized_costs);

/**
 * @brief Covariate-free ellipsoid: center / per-component scale are the
 * train-target mean / population std, and the radius covers the validation
 * targets.  OrderStatistic calibrates on validation Mahalanobis-style norms
 * ||(y - mean)/std||_2; SubGaussianBound fits the exponential-tail scale to
 * the standardized component residuals.  Zero-std components are rejected.
 */
lossgeom::UncertaintySetSpec classical_ellipsoid_baseline(
    const Matrix& train_targets, const Matrix& val_targets, double alpha,
    calibrate::CalibMethod policy = calibrate::CalibMethod::OrderStatistic);

/**
 * @brief Neighbor-moment ellipsoid for one query: center / scale are the
 * mean / population std of the targets of the k nearest training covariates
 * (Euclidean distance, distance then index as tie-break).  The radius is
 * left at zero; calibrate with knn_radius.  k < 2 and k > n_train are
 * rejected, as are zero-std neighborhoods.
 */
lossgeom::UncertaintySetSpec knn_baseline(const Matrix& train_x, const Matrix& train_y,
                                          const Vec& query, std::size_t k);

/// Order-statistic radius over per-validation-query standardized norms.
calibrate::CalibrationResult knn_radius(const Matrix& train_x, const Matrix& train_y,
                                        const Matrix& val_x, const Matrix& val_y,
                                        std::size_t k, double alpha);

struct ExperimentConfig {
    synthgen::Problem problem = synthgen::Problem::Portfolio;
    std::vector<std::size_t> n_grid{1000};
    std::vector<double> noise_grid{0.0};
    std::vector<int> deg_grid;   // ShortestPath only; defaults to {1} there
    std::vector<double> alpha_grid{0.1};
    std::vector<MethodSpec> methods;
    std::size_t seeds = 10;
    uint64_t master_seed = 0x5eedba5eull;
    std::size_t n_val = 0;  // 0: match train size
    std::size_t n_test = 0; // 0: problem default (10000 newsvendor, else 100)
    std::size_t p = 10;
    std::size_t n_assets = 5;
    int grid_side = 5;
    robustopt::NewsvendorProblem newsvendor; // demands default to (1, 10)
    mlcore::TrainConfig train = bench_train_config();
    std::size_t threads = 1;
    bool use_parallel = true; // false forces the serial reference loop

    void validate() const;
};

/// One report row: a grid cell x method, averaged over replication seeds.
struct MethodCell {
    std::size_t n = 0;
    double noise = 0.0;
    int deg = 0;
    bool has_deg = false;
    double alpha = 0.0;
    MethodSpec method;
    double radius = 0.0;    // mean per-component semi-axis (loss threshold for KL sets)
    double objective = 0.0; // mean robust value over test rows and seeds
    double regret = 0.0;
    double violation = 0.0;
    double rig_value = 0.0;
    bool has_rig = false;
    Vec seed_radius; // per-seed means, in seed order
    Vec seed_objective;
    Vec seed_regret;
    Vec seed_violation;
};

struct ExperimentReport {
    std::string problem_name;
    std::vector<MethodCell> rows;
    std::size_t seeds = 0;

    static std::string csv_header(); // problem,N,noise,deg,alpha,method,radius,objective,regret,violation,rig
};

/**
 * @brief Full pipeline per grid cell and seed: generate data, train the
 * models the method set needs, calibrate a radius per target alpha, solve
 * one robust problem per test row, and aggregate metrics.  Regression heads
 * fit one scalar model per target component on standardized targets (a joint
 * trunk cannot represent per-component spread profiles such as |mu_j(x)|);
 * predictions are mapped back to raw target units before calibration.  Data
 * generation and training are shared across alphas within a cell x seed.
 * Per-test-row solves run under OpenMP when use_parallel is set and threads
 * > 1; the serial loop produces bitwise-identical reports.  Errors are
 * rethrown with the offending cell's coordinates prepended.
 */
ExperimentReport run_experiment(const ExperimentConfig& cfg);

void write_report_csv(const ExperimentReport& report, const std::string& path);

/**
 * @brief Figure companions to the report: fig_<problem>_objective.csv and
 * fig_<problem>_regret.csv in dir, each row carrying both the target alpha
 * and the realized violation rate so either can serve as the x axis.
 */
void write_figure_csvs(const ExperimentReport& report, const std::string& dir);

} // namespace bench
} // namespace lossrobust
