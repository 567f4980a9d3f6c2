#include "lossrobust/mlcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "lossrobust/csv.hpp"
#include "lossrobust/rng.hpp"

namespace lossrobust {
namespace mlcore {

namespace {
constexpr double kLogVarClamp = 10.0;
constexpr double kProbFloor = 1e-300;
} // namespace

std::string head_name(Head h) {
    switch (h) {
        case Head::Regression: return "regression";
        case Head::RegressionWithVariance: return "regression_with_variance";
        case Head::SoftmaxClassifier: return "softmax_classifier";
    }
    throw std::logic_error("head_name: bad head");
}

Head head_from_name(const std::string& s) {
    for (Head h : {Head::Regression, Head::RegressionWithVariance, Head::SoftmaxClassifier})
        if (head_name(h) == s) return h;
    throw std::runtime_error("head_from_name: unknown head '" + s + "'");
}

TrainLoss loss_for_head(Head h) {
    switch (h) {
        case Head::Regression: return TrainLoss::Mse;
        case Head::RegressionWithVariance: return TrainLoss::Msev;
        case Head::SoftmaxClassifier: return TrainLoss::CrossEntropy;
    }
    throw std::logic_error("loss_for_head: bad head");
}

std::size_t PredictorModel::raw_out() const {
    return head == Head::RegressionWithVariance ? 2 * out_dim : out_dim;
}

namespace {

// Raw affine-ReLU-affine forward; z has raw_out entries.
void forward(const PredictorModel& m, const double* x, Vec& h, Vec& z) {
    const std::size_t nh = m.hidden();
    h.assign(nh, 0.0);
    for (std::size_t u = 0; u < nh; ++u) {
        double a = m.b1[u];
        for (std::size_t k = 0; k < m.in_dim; ++k) a += m.W1(u, k) * x[k];
        h[u] = a > 0.0 ? a : 0.0;
    }
    const std::size_t no = m.raw_out();
    z.assign(no, 0.0);
    for (std::size_t o = 0; o < no; ++o) {
        double a = m.b2[o];
        for (std::size_t u = 0; u < nh; ++u) a += m.W2(o, u) * h[u];
        z[o] = a;
    }
}

Prediction decode(const PredictorModel& m, const Vec& z) {
    Prediction p;
    switch (m.head) {
        case Head::Regression:
            p.mean = z;
            break;
        case Head::RegressionWithVariance: {
            p.mean.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m.out_dim));
            p.variance.resize(m.out_dim);
            for (std::size_t j = 0; j < m.out_dim; ++j) {
                double s = std::clamp(z[m.out_dim + j], -kLogVarClamp, kLogVarClamp);
                p.variance[j] = std::exp(s);
            }
            break;
        }
        case Head::SoftmaxClassifier: {
            double zmax = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            p.probs.resize(z.size());
            for (std::size_t j = 0; j < z.size(); ++j) {
                p.probs[j] = std::exp(z[j] - zmax);
                sum += p.probs[j];
            }
            for (double& v : p.probs) v = std::max(v / sum, kProbFloor);
            break;
        }
    }
    return p;
}

} // namespace

Prediction PredictorModel::predict(const Vec& x) const {
    if (x.size() != in_dim) throw std::invalid_argument("predict: input dimension mismatch");
    Vec h, z;
    forward(*this, x.data(), h, z);
    return decode(*this, z);
}

double loss_value(TrainLoss kind, const Vec& y, const Prediction& pred) {
    switch (kind) {
        case TrainLoss::Mse: {
            if (y.size() != pred.mean.size()) throw std::invalid_argument("loss_value: size mismatch");
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                double d = y[j] - pred.mean[j];
                s += d * d;
            }
            return s;
        }
        case TrainLoss::Msev: {
            if (y.size() != pred.mean.size() || pred.variance.size() != y.size())
                throw std::invalid_argument("loss_value: size mismatch");
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                double d = y[j] - pred.mean[j];
                s += d * d / pred.variance[j] + std::log(pred.variance[j]);
            }
            return s;
        }
        case TrainLoss::CrossEntropy: {
            if (y.size() != pred.probs.size()) throw std::invalid_argument("loss_value: size mismatch");
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j)
                if (y[j] != 0.0) s -= y[j] * std::log(std::max(pred.probs[j], kProbFloor));
            return s;
        }
    }
    throw std::logic_error("loss_value: bad kind");
}

ModelGrads gradients(const PredictorModel& m, const Matrix& X, const Matrix& Y,
                     const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw std::invalid_argument("gradients: no rows");
    ModelGrads g;
    g.dW1 = Matrix(m.W1.rows, m.W1.cols);
    g.db1.assign(m.b1.size(), 0.0);
    g.dW2 = Matrix(m.W2.rows, m.W2.cols);
    g.db2.assign(m.b2.size(), 0.0);

    const double inv_n = 1.0 / static_cast<double>(rows.size());
    Vec h, z, dz, dh;
    for (std::size_t r : rows) {
        forward(m, &X.data[r * X.cols], h, z);
        dz.assign(z.size(), 0.0);
        switch (m.head) {
            case Head::Regression:
                for (std::size_t j = 0; j < m.out_dim; ++j)
                    dz[j] = 2.0 * (z[j] - Y(r, j)) * inv_n;
                break;
            case Head::RegressionWithVariance:
                for (std::size_t j = 0; j < m.out_dim; ++j) {
                    double s = z[m.out_dim + j];
                    bool clamped = s < -kLogVarClamp || s > kLogVarClamp;
                    double sc = std::clamp(s, -kLogVarClamp, kLogVarClamp);
                    double inv_var = std::exp(-sc);
                    double d = Y(r, j) - z[j];
                    dz[j] = -2.0 * d * inv_var * inv_n;
                    dz[m.out_dim + j] = clamped ? 0.0 : (1.0 - d * d * inv_var) * inv_n;
                }
                break;
            case Head::SoftmaxClassifier: {
                Prediction p = decode(m, z);
                for (std::size_t j = 0; j < z.size(); ++j)
                    dz[j] = (p.probs[j] - Y(r, j)) * inv_n;
                break;
            }
        }
        dh.assign(h.size(), 0.0);
        for (std::size_t o = 0; o < z.size(); ++o) {
            g.db2[o] += dz[o];
            for (std::size_t u = 0; u < h.size(); ++u) {
                g.dW2(o, u) += dz[o] * h[u];
                dh[u] += m.W2(o, u) * dz[o];
            }
        }
        for (std::size_t u = 0; u < h.size(); ++u) {
            if (h[u] <= 0.0) continue; // ReLU gate
            g.db1[u] += dh[u];
            for (std::size_t k = 0; k < m.in_dim; ++k) g.dW1(u, k) += dh[u] * X(r, k);
        }
    }
    return g;
}

namespace {

struct AdamState {
    Vec m, v;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(Vec& w, const Vec& grad, AdamState& st, double lr, std::size_t t,
               std::size_t lo = 0, std::size_t hi = SIZE_MAX) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    hi = std::min(hi, w.size());
    for (std::size_t i = lo; i < hi; ++i) {
        st.m[i] = b1 * st.m[i] + (1.0 - b1) * grad[i];
        st.v[i] = b2 * st.v[i] + (1.0 - b2) * grad[i] * grad[i];
        w[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
    }
}

double mean_loss(const PredictorModel& m, const Matrix& X, const Matrix& Y,
                 const std::vector<std::size_t>& rows, TrainLoss kind) {
    double total = 0.0;
    Vec h, z;
    for (std::size_t r : rows) {
        forward(m, &X.data[r * X.cols], h, z);
        total += loss_value(kind, Y.row(r), decode(m, z));
    }
    return total / static_cast<double>(rows.size());
}

} // namespace

PredictorModel train(const LabeledDataset& ds, Head head, const TrainConfig& cfg,
                     TrainDiagnostics* diag) {
    ds.validate();
    if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw std::invalid_argument("train: val_fraction must lie in (0,1)");
    if (cfg.hidden == 0) throw std::invalid_argument("train: hidden must be positive");

    auto train_rows = ds.indices(Split::Train);
    if (train_rows.size() < 4) throw std::invalid_argument("train: too few training rows");

    PredictorModel model;
    model.head = head;
    model.in_dim = ds.n_features();
    model.out_dim = ds.n_targets();
    const std::size_t nh = cfg.hidden;
    const std::size_t no = head == Head::RegressionWithVariance ? 2 * ds.n_targets() : ds.n_targets();
    model.W1 = Matrix(nh, model.in_dim);
    model.b1.assign(nh, 0.0);
    model.W2 = Matrix(no, nh);
    model.b2.assign(no, 0.0);

    // Uniform +-1/sqrt(fan_in) init; log-variance rows start at zero so the
    // warm-up phase predicts unit variance exactly.
    Rng init_rng(Rng::derive(cfg.seed, 11));
    double s1 = 1.0 / std::sqrt(static_cast<double>(model.in_dim));
    for (double& w : model.W1.data) w = init_rng.uniform(-s1, s1);
    double s2 = 1.0 / std::sqrt(static_cast<double>(nh));
    const std::size_t mean_rows = head == Head::RegressionWithVariance ? ds.n_targets() : no;
    for (std::size_t o = 0; o < mean_rows; ++o)
        for (std::size_t u = 0; u < nh; ++u) model.W2(o, u) = init_rng.uniform(-s2, s2);

    if (cfg.max_epochs == 0) return model;

    // Early-stopping holdout carved from the training rows.
    Rng shuffle_rng(Rng::derive(cfg.seed, 12));
    for (std::size_t i = train_rows.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform01() * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(train_rows[i - 1], train_rows[j]);
    }
    std::size_t n_holdout = static_cast<std::size_t>(
        std::floor(cfg.val_fraction * static_cast<double>(train_rows.size())));
    n_holdout = std::max<std::size_t>(1, std::min(n_holdout, train_rows.size() - 1));
    std::vector<std::size_t> holdout(train_rows.begin(),
                                     train_rows.begin() + static_cast<std::ptrdiff_t>(n_holdout));
    std::vector<std::size_t> fit(train_rows.begin() + static_cast<std::ptrdiff_t>(n_holdout),
                                 train_rows.end());

    const TrainLoss kind = loss_for_head(head);
    AdamState aW1(model.W1.data.size()), ab1(model.b1.size()), aW2(model.W2.data.size()),
        ab2(model.b2.size());
    std::size_t step = 0;

    const bool has_warmup = head == Head::RegressionWithVariance && cfg.variance_warmup_epochs > 0;
    const std::size_t var_w_lo = ds.n_targets() * nh; // first log-variance entry in W2.data
    const std::size_t var_b_lo = ds.n_targets();

    PredictorModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    bool best_valid = false;
    std::size_t since_best = 0;
    std::vector<std::size_t> order(fit);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const bool frozen = has_warmup && epoch <= cfg.variance_warmup_epochs;
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform01() * static_cast<double>(i));
            if (j >= i) j = i - 1;
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
            ModelGrads g = gradients(model, ds.X, ds.Y, batch);
            ++step;
            adam_step(model.W1.data, g.dW1.data, aW1, cfg.learning_rate, step);
            adam_step(model.b1, g.db1, ab1, cfg.learning_rate, step);
            if (frozen) {
                adam_step(model.W2.data, g.dW2.data, aW2, cfg.learning_rate, step, 0, var_w_lo);
                adam_step(model.b2, g.db2, ab2, cfg.learning_rate, step, 0, var_b_lo);
            } else {
                adam_step(model.W2.data, g.dW2.data, aW2, cfg.learning_rate, step);
                adam_step(model.b2, g.db2, ab2, cfg.learning_rate, step);
            }
        }
        if (frozen && epoch == cfg.variance_warmup_epochs) {
            // Early-stopping bookkeeping starts fresh once the variance head moves.
            best_loss = std::numeric_limits<double>::infinity();
            best_valid = false;
            since_best = 0;
        }
        if (diag) {
            diag->epochs_run = epoch;
            diag->epoch_fit_loss.push_back(mean_loss(model, ds.X, ds.Y, fit, kind));
        }
        if (frozen && epoch < cfg.variance_warmup_epochs) continue;
        double vl = mean_loss(model, ds.X, ds.Y, holdout, kind);
        if (diag) diag->final_holdout_loss = vl;
        if (vl < best_loss) {
            best_loss = vl;
            best = model;
            best_valid = true;
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }
    if (diag) diag->best_holdout_loss = best_valid ? best_loss : diag->final_holdout_loss;
    return best_valid ? best : model;
}

void save_model(const PredictorModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << "meta," << head_name(m.head) << ',' << m.in_dim << ',' << m.out_dim << '\n';
    auto write = [&](const char* name, std::size_t rows, std::size_t cols, const Vec& data) {
        out << name << ',' << rows << ',' << cols;
        for (double v : data) out << ',' << format_double(v);
        out << '\n';
    };
    write("W1", m.W1.rows, m.W1.cols, m.W1.data);
    write("b1", m.b1.size(), 1, m.b1);
    write("W2", m.W2.rows, m.W2.cols, m.W2.data);
    write("b2", m.b2.size(), 1, m.b2);
}

PredictorModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    PredictorModel m;
    std::string line;
    bool have_meta = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f[0] == "meta") {
            if (f.size() != 4) throw std::runtime_error("load_model: bad meta line");
            m.head = head_from_name(std::string(f[1]));
            m.in_dim = static_cast<std::size_t>(parse_double(f[2]));
            m.out_dim = static_cast<std::size_t>(parse_double(f[3]));
            have_meta = true;
            continue;
        }
        if (f.size() < 3) throw std::runtime_error("load_model: malformed tensor line");
        auto rows = static_cast<std::size_t>(parse_double(f[1]));
        auto cols = static_cast<std::size_t>(parse_double(f[2]));
        if (f.size() != 3 + rows * cols) throw std::runtime_error("load_model: value count mismatch");
        Vec data(rows * cols);
        for (std::size_t i = 0; i < data.size(); ++i) data[i] = parse_double(f[3 + i]);
        if (f[0] == "W1") {
            m.W1 = Matrix(rows, cols);
            m.W1.data = std::move(data);
        } else if (f[0] == "b1") {
            m.b1 = std::move(data);
        } else if (f[0] == "W2") {
            m.W2 = Matrix(rows, cols);
            m.W2.data = std::move(data);
        } else if (f[0] == "b2") {
            m.b2 = std::move(data);
        } else {
            throw std::runtime_error("load_model: unknown tensor '" + std::string(f[0]) + "'");
        }
    }
    if (!have_meta) throw std::runtime_error("load_model: missing meta line");
    return m;
}

} // namespace mlcore
} // namespace lossrobust
