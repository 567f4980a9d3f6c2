#pragma once

#include <cstdint>
#include <string>

#include "lossrobust/dataset.hpp"
#include "lossrobust/linalg.hpp"

namespace lossrobust {
namespace mlcore {

enum class Head { Regression, RegressionWithVariance, SoftmaxClassifier };
enum class TrainLoss { Mse, Msev, CrossEntropy };

std::string head_name(Head h);
Head head_from_name(const std::string& s);

/// Loss paired with each head during training.
TrainLoss loss_for_head(Head h);

struct Prediction {
    Vec mean;     // Regression / RegressionWithVariance
    Vec variance; // RegressionWithVariance only, exp of clamped log-variance
    Vec probs;    // SoftmaxClassifier only, entries clamped to >= 1e-300
};

/**
 * @brief One-hidden-layer ReLU network: out = W2 * relu(W1 x + b1) + b2.
 *
 * out_dim counts task outputs; the raw output width is out_dim for
 * Regression, 2*out_dim for RegressionWithVariance (second block is
 * log-variance, clamped to [-10, 10]) and the class count for
 * SoftmaxClassifier.
 */
struct PredictorModel {
    Head head = Head::Regression;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Matrix W1; // hidden x in
    Vec b1;
    Matrix W2; // raw_out x hidden
    Vec b2;

    std::size_t hidden() const { return W1.rows; }
    std::size_t raw_out() const;
    Prediction predict(const Vec& x) const;
};

struct TrainConfig {
    std::size_t max_epochs = 1000;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::size_t patience = 10;
    double val_fraction = 0.3;
    std::size_t hidden = 5;
    std::size_t variance_warmup_epochs = 25; // RegressionWithVariance only
    uint64_t seed = 0;
};

/// Per-sample loss; Mse sums squared errors, Msev adds the log-variance
/// penalty (may be negative), CrossEntropy clamps probabilities at 1e-300.
double loss_value(TrainLoss kind, const Vec& y, const Prediction& pred);

struct ModelGrads {
    Matrix dW1;
    Vec db1;
    Matrix dW2;
    Vec db2;
};

/// Exact gradients of the mean per-sample loss over the given rows.
ModelGrads gradients(const PredictorModel& model, const Matrix& X, const Matrix& Y,
                     const std::vector<std::size_t>& rows);

/// Optional training trace; filling it adds one loss pass per epoch.
struct TrainDiagnostics {
    double best_holdout_loss = 0.0;  // loss of the returned snapshot
    double final_holdout_loss = 0.0; // loss of the last epoch's parameters
    std::size_t epochs_run = 0;
    Vec epoch_fit_loss; // mean loss over the fit rows after each epoch
};

/**
 * @brief Trains on the Train rows of ds with Adam (beta 0.9/0.999, eps 1e-8).
 *
 * A fraction val_fraction of the training rows, selected by a seed-derived
 * shuffle, is held out for early stopping; the snapshot with the best holdout
 * loss is returned.  Training stops after patience epochs without
 * improvement.  For RegressionWithVariance the log-variance output is frozen
 * at zero for the first variance_warmup_epochs epochs (its weights start at
 * zero), and early-stopping bookkeeping begins when it unfreezes.
 * Deterministic and single-threaded: identical inputs give identical weights;
 * diagnostics do not alter the trained parameters.  max_epochs = 0 returns
 * the initialization.
 */
PredictorModel train(const LabeledDataset& ds, Head head, const TrainConfig& cfg,
                     TrainDiagnostics* diag = nullptr);

/// Text round trip: a meta line, then one line per tensor (name,rows,cols,values...).
void save_model(const PredictorModel& m, const std::string& path);
PredictorModel load_model(const std::string& path);

} // namespace mlcore
} // namespace lossrobust
