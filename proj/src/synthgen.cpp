#include "lossrobust/synthgen.hpp"

#include <cmath>
#include <stdexcept>

#include "lossrobust/rng.hpp"

namespace lossrobust {
namespace synthgen {

namespace {

void check_config(const GenConfig& cfg) {
    if (cfg.n_samples == 0) throw std::invalid_argument("generate: n_samples must be positive");
    if (cfg.p == 0) throw std::invalid_argument("generate: p must be positive");
    if (cfg.noise < 0.0) throw std::invalid_argument("generate: noise must be nonnegative");
    if (cfg.problem == Problem::Portfolio && cfg.n_assets == 0)
        throw std::invalid_argument("generate: n_assets must be positive");
    if (cfg.problem == Problem::ShortestPath) {
        if (cfg.grid_side < 2) throw std::invalid_argument("generate: grid_side must be at least 2");
        if (cfg.deg < 1) throw std::invalid_argument("generate: deg must be at least 1");
    }
}

Matrix draw_mixing(Rng& rng, std::size_t p, std::size_t m) {
    Matrix b(p, m);
    for (std::size_t j = 0; j < m; ++j) {
        // redraw all-zero columns: every output must carry some signal, or
        // its target would be constant and standardization degenerate
        bool any = false;
        while (!any) {
            for (std::size_t k = 0; k < p; ++k) {
                b(k, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
                any = any || b(k, j) != 0.0;
            }
        }
    }
    return b;
}

// Signal of row i for output j: sum_k X_ik B_kj / sqrt(p).
double signal(const Matrix& x, const Matrix& b, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.cols; ++k) s += x(i, k) * b(k, j);
    return s / std::sqrt(static_cast<double>(x.cols));
}

void assign_splits(LabeledDataset& ds, const GenConfig& cfg) {
    std::size_t n_train = cfg.n_samples, n_val = cfg.val_rows(), n_test = cfg.test_rows();
    ds.split.reserve(n_train + n_val + n_test);
    for (std::size_t i = 0; i < n_train; ++i) ds.split.push_back(Split::Train);
    for (std::size_t i = 0; i < n_val; ++i) ds.split.push_back(Split::Val);
    for (std::size_t i = 0; i < n_test; ++i) ds.split.push_back(Split::Test);
}

void standardize_targets(LabeledDataset& ds) {
    ds.target_standardizer = fit_standardizer(ds.Y, ds.indices(Split::Train));
    for (std::size_t i = 0; i < ds.Y.rows; ++i)
        for (std::size_t j = 0; j < ds.Y.cols; ++j)
            ds.Y(i, j) = ds.target_standardizer.apply(ds.Y(i, j), j);
}

} // namespace

LabeledDataset generate(const GenConfig& cfg) {
    check_config(cfg);
    const std::size_t n = cfg.n_samples + cfg.val_rows() + cfg.test_rows();
    const std::size_t p = cfg.p;

    Rng rng_b(Rng::derive(cfg.seed, 1));
    Rng rng_x(Rng::derive(cfg.seed, 2));
    Rng rng_e(Rng::derive(cfg.seed, 3));

    LabeledDataset ds;
    assign_splits(ds, cfg);
    ds.X = Matrix(n, p);

    switch (cfg.problem) {
        case Problem::Newsvendor: {
            Matrix b = draw_mixing(rng_b, p, 1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < p; ++k) ds.X(i, k) = rng_x.normal();
            ds.Y = Matrix(n, 2);
            for (std::size_t i = 0; i < n; ++i) {
                double q = signal(ds.X, b, i, 0) + cfg.noise * rng_e.normal();
                // Ties (q exactly 0) fall in scenario 1.
                if (q >= 0.0) ds.Y(i, 0) = 1.0;
                else ds.Y(i, 1) = 1.0;
            }
            break;
        }
        case Problem::Portfolio: {
            Matrix b = draw_mixing(rng_b, p, cfg.n_assets);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < p; ++k) ds.X(i, k) = rng_x.uniform(-1.0, 1.0);
            ds.Y = Matrix(n, cfg.n_assets);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < cfg.n_assets; ++j) {
                    double eps = rng_e.uniform(1.0 - cfg.noise, 1.0 + cfg.noise);
                    ds.Y(i, j) = signal(ds.X, b, i, j) * eps;
                }
            standardize_targets(ds);
            break;
        }
        case Problem::ShortestPath: {
            const std::size_t s = cfg.grid_side;
            const std::size_t m = 2 * s * (s - 1);
            Matrix b = draw_mixing(rng_b, p, m);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < p; ++k) ds.X(i, k) = rng_x.normal();
            ds.Y = Matrix(n, m);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    double base = std::pow(signal(ds.X, b, i, j) + 3.0, cfg.deg) + 1.0;
                    ds.Y(i, j) = base * rng_e.uniform(1.0 - cfg.noise, 1.0 + cfg.noise);
                }
            standardize_targets(ds);
            break;
        }
    }
    ds.validate();
    return ds;
}

} // namespace synthgen
} // namespace lossrobust
