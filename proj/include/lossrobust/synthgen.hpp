#pragma once

#include <cstdint>
#include <cstddef>

#include "lossrobust/dataset.hpp"

namespace lossrobust {
namespace synthgen {

enum class Problem { Newsvendor, Portfolio, ShortestPath };

/**
 * @brief Configuration for one synthetic dataset draw.
 *
 * n_samples counts training rows.  n_val / n_test of 0 select the defaults:
 * the calibration partition matches the training size and the test partition
 * is 10000 rows for Newsvendor and 100 for the vector problems.
 */
struct GenConfig {
    Problem problem = Problem::Portfolio;
    uint64_t seed = 0;
    std::size_t n_samples = 1000;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
    std::size_t p = 10;        // covariate dimension
    double noise = 0.0;        // multiplicative half-width (Portfolio/ShortestPath) or additive scale (Newsvendor)
    std::size_t n_assets = 5;  // Portfolio outputs
    std::size_t grid_side = 5; // ShortestPath nodes per side; edges = 2*s*(s-1)
    int deg = 1;               // ShortestPath signal exponent

    std::size_t val_rows() const { return n_val == 0 ? n_samples : n_val; }
    std::size_t test_rows() const {
        if (n_test != 0) return n_test;
        return problem == Problem::Newsvendor ? 10000 : 100;
    }
};

/**
 * @brief Draws a dataset for cfg.problem; identical cfg gives identical bytes.
 *
 * Sampling order is fixed: the mixing matrix B first, then covariates X by
 * row, then noise, each from an independently derived child stream of
 * cfg.seed.  Mechanics per problem:
 *  - Newsvendor: X ~ N(0,1), B in {0,1}^p, q = XB/sqrt(p) + noise*eps with
 *    eps ~ N(0,1); row label is one-hot over two demand scenarios, scenario 1
 *    (low demand) when q >= 0.  Targets are not standardized.
 *  - Portfolio: X ~ U[-1,1], B in {0,1}^{p x n_assets}, multiplicative noise
 *    eps ~ U[1-noise, 1+noise] drawn per entry, y_ij = (XB)_ij/sqrt(p) * eps_ij.
 *    Targets standardized per column on training rows.
 *  - ShortestPath: X ~ N(0,1), B in {0,1}^{p x m} with m = 2*s*(s-1) edges,
 *    y_ij = ((XB)_ij/sqrt(p) + 3)^deg + 1 times per-entry noise, standardized
 *    per column on training rows.  Columns of B are redrawn when all-zero so
 *    every output keeps covariate signal.
 */
LabeledDataset generate(const GenConfig& cfg);

} // namespace synthgen
} // namespace lossrobust
