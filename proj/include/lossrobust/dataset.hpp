#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lossrobust/linalg.hpp"

namespace lossrobust {

enum class Split : uint8_t { Train, Val, Test };

std::string split_name(Split s);
Split split_from_name(const std::string& s);

/// Per-column affine transform fitted on training rows only.
struct Standardizer {
    Vec mean;
    Vec std;

    bool empty() const { return mean.empty(); }
    double apply(double v, std::size_t j) const { return (v - mean[j]) / std[j]; }
    double invert(double v, std::size_t j) const { return v * std[j] + mean[j]; }
};

/**
 * @brief Covariate/target table with a train/val/test tag per row.
 *
 * The val split is a calibration partition, disjoint from the training rows;
 * model selection inside training carves its own holdout from Train rows.
 */
struct LabeledDataset {
    Matrix X;
    Matrix Y;
    std::vector<Split> split;
    Standardizer target_standardizer; // populated only when targets were standardized

    std::size_t n_rows() const { return X.rows; }
    std::size_t n_features() const { return X.cols; }
    std::size_t n_targets() const { return Y.cols; }

    std::vector<std::size_t> indices(Split s) const;
    std::size_t count(Split s) const;

    /// Rows of X (respectively Y) restricted to one split, preserving order.
    Matrix x_rows(Split s) const;
    Matrix y_rows(Split s) const;

    void validate() const;
};

/// Fits per-column mean/std (population std) on the given rows of m.
Standardizer fit_standardizer(const Matrix& m, const std::vector<std::size_t>& rows);

/// Writes header x1..xp,y1..ym,split; floats in shortest round-trip form.
void save_dataset_csv(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_dataset_csv(const std::string& path);

} // namespace lossrobust
