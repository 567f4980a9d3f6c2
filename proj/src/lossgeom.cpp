#include "lossrobust/lossgeom.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "lossrobust/csv.hpp"

namespace lossrobust {
namespace lossgeom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOneHotTol = 1e-12;

bool is_one_hot(const Vec& y, std::size_t& hot) {
    std::size_t ones = 0;
    hot = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (std::fabs(y[j] - 1.0) <= kOneHotTol) {
            hot = j;
            ++ones;
        } else if (std::fabs(y[j]) > kOneHotTol) {
            return false;
        }
    }
    return ones == 1;
}
} // namespace

std::string loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::SquaredError: return "squared_error";
        case LossKind::AbsoluteError: return "absolute_error";
        case LossKind::Huber: return "huber";
        case LossKind::CrossEntropy: return "cross_entropy";
        case LossKind::Hinge: return "hinge";
        case LossKind::Misclassification: return "misclassification";
        case LossKind::ScaledSquaredError: return "scaled_squared_error";
    }
    throw std::logic_error("loss_kind_name: bad kind");
}

LossKind loss_kind_from_name(const std::string& s) {
    for (LossKind k : {LossKind::SquaredError, LossKind::AbsoluteError, LossKind::Huber,
                       LossKind::CrossEntropy, LossKind::Hinge, LossKind::Misclassification,
                       LossKind::ScaledSquaredError})
        if (loss_kind_name(k) == s) return k;
    throw std::runtime_error("loss_kind_from_name: unknown loss '" + s + "'");
}

double UncertaintySetSpec::norm_radius() const {
    if (loss != LossKind::SquaredError && loss != LossKind::ScaledSquaredError)
        throw std::logic_error("norm_radius: only defined for squared-error sets");
    return std::sqrt(radius);
}

void UncertaintySetSpec::validate() const {
    if (center.empty()) throw std::invalid_argument("UncertaintySetSpec: empty center");
    if (radius < 0.0) throw std::invalid_argument("UncertaintySetSpec: negative radius");
    if (!(huber_delta > 0.0)) throw std::invalid_argument("UncertaintySetSpec: huber_delta must be positive");
    if (!scale.empty()) {
        if (scale.size() != center.size())
            throw std::invalid_argument("UncertaintySetSpec: scale size mismatch");
        for (double s : scale)
            if (!(s > 0.0)) throw std::invalid_argument("UncertaintySetSpec: scale entries must be positive");
    }
    if (!component_weights.empty()) {
        if (component_weights.size() != center.size())
            throw std::invalid_argument("UncertaintySetSpec: weight size mismatch");
        for (double w : component_weights)
            if (!(w > 0.0)) throw std::invalid_argument("UncertaintySetSpec: weights must be positive");
    }
    if (loss == LossKind::CrossEntropy) {
        double sum = 0.0;
        for (double c : center) {
            if (!(c >= 0.0) || c > 1.0)
                throw std::invalid_argument("UncertaintySetSpec: cross-entropy center must be a distribution");
            sum += c;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("UncertaintySetSpec: cross-entropy center must sum to 1");
    }
}

double loss_eval(LossKind k, double huber_delta, double y, double yhat) {
    double d = y - yhat;
    switch (k) {
        case LossKind::SquaredError:
        case LossKind::ScaledSquaredError:
            return d * d;
        case LossKind::AbsoluteError:
            return std::fabs(d);
        case LossKind::Huber: {
            double a = std::fabs(d);
            return a <= huber_delta ? 0.5 * d * d : huber_delta * a - 0.5 * huber_delta * huber_delta;
        }
        case LossKind::Hinge: {
            // Labels in {0,1}, predictions in [0,1], mapped onto [-1,1] margins.
            double margin = (2.0 * y - 1.0) * (2.0 * yhat - 1.0);
            return std::max(0.0, 1.0 - margin);
        }
        case LossKind::CrossEntropy:
        case LossKind::Misclassification:
            throw std::invalid_argument("loss_eval: vector-level loss has no per-component form");
    }
    throw std::logic_error("loss_eval: bad kind");
}

double set_loss(const UncertaintySetSpec& s, const Vec& y) {
    s.validate();
    if (y.size() != s.dim()) throw std::invalid_argument("set_loss: dimension mismatch");
    auto weight = [&](std::size_t j) {
        return s.component_weights.empty() ? 1.0 : s.component_weights[j];
    };
    switch (s.loss) {
        case LossKind::CrossEntropy: {
            std::size_t hot = 0;
            if (!is_one_hot(y, hot))
                throw std::invalid_argument("set_loss: cross-entropy requires a one-hot label");
            double p = std::max(s.center[hot], 1e-300);
            return -std::log(p);
        }
        case LossKind::Misclassification: {
            double hamming = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j)
                if (std::fabs(y[j] - s.center[j]) > 1e-9) hamming += 1.0;
            return hamming;
        }
        case LossKind::ScaledSquaredError: {
            if (s.scale.empty())
                throw std::invalid_argument("set_loss: scaled squared error requires scale");
            double total = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                double r = (y[j] - s.center[j]) / s.scale[j];
                total += weight(j) * r * r;
            }
            return total;
        }
        default: {
            double total = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j)
                total += weight(j) * loss_eval(s.loss, s.huber_delta, y[j], s.center[j]);
            return total;
        }
    }
}

bool member(const UncertaintySetSpec& s, const Vec& y) {
    if (s.loss == LossKind::Misclassification)
        return set_loss(s, y) <= std::floor(s.radius);
    return set_loss(s, y) <= s.radius;
}

double conjugate(LossKind k, double huber_delta, double v, double yhat) {
    switch (k) {
        case LossKind::SquaredError:
            return yhat * v + v * v / 4.0;
        case LossKind::AbsoluteError:
            return std::fabs(v) <= 1.0 ? yhat * v : kInf;
        case LossKind::Huber:
            if (!(huber_delta > 0.0)) throw std::invalid_argument("conjugate: huber_delta must be positive");
            return std::fabs(v) <= huber_delta ? yhat * v + v * v / 2.0 : kInf;
        default:
            throw std::invalid_argument("conjugate: closed form available only for scalar regression losses");
    }
}

CombinedLossWeights combine_losses(const Vec& mean_losses, const std::vector<bool>& is_classification) {
    if (mean_losses.empty()) throw std::invalid_argument("combine_losses: no components");
    if (mean_losses.size() != is_classification.size())
        throw std::invalid_argument("combine_losses: size mismatch");
    CombinedLossWeights out;
    out.weights.resize(mean_losses.size());
    out.sigma_star_sq.resize(mean_losses.size());
    for (std::size_t j = 0; j < mean_losses.size(); ++j) {
        if (!(mean_losses[j] > 0.0))
            throw std::invalid_argument("combine_losses: mean losses must be positive");
        // sigma^2 minimizing mean_loss/sigma^2 + log sigma^2 is mean_loss for
        // regression; classification components optimize to twice that, while
        // the normalizing weight stays 1/mean_loss for both.
        out.weights[j] = 1.0 / mean_losses[j];
        out.sigma_star_sq[j] = is_classification[j] ? 2.0 * mean_losses[j] : mean_losses[j];
    }
    return out;
}

std::pair<bool, bool> kl_equivalence_check(const Vec& onehot, const Vec& predicted, double rho) {
    if (onehot.size() != predicted.size())
        throw std::invalid_argument("kl_equivalence_check: dimension mismatch");
    std::size_t hot = 0;
    if (!is_one_hot(onehot, hot))
        throw std::invalid_argument("kl_equivalence_check: label must be one-hot");
    double ce = -std::log(std::max(predicted[hot], 1e-300));
    // KL(onehot || predicted) reduces to the same -log term: 1*log(1/p_hot).
    double kl = 0.0;
    for (std::size_t j = 0; j < onehot.size(); ++j) {
        if (std::fabs(onehot[j]) <= kOneHotTol) continue; // 0*log(0/q) = 0
        kl += onehot[j] * std::log(onehot[j] / std::max(predicted[j], 1e-300));
    }
    return {ce <= rho, kl <= rho};
}

std::pair<double, double> hinge_equivalence_check(double y, double yhat) {
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("hinge_equivalence_check: y must be 0 or 1");
    if (yhat < 0.0 || yhat > 1.0)
        throw std::invalid_argument("hinge_equivalence_check: yhat must lie in [0,1]");
    double hinge = loss_eval(LossKind::Hinge, 1.0, y, yhat);
    double variation = 2.0 * std::fabs(yhat - y);
    return {hinge, variation};
}

void save_set_spec(const UncertaintySetSpec& s, const std::string& path) {
    s.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_set_spec: cannot open " + path);
    out << "loss=" << loss_kind_name(s.loss) << '\n';
    out << "huber_delta=" << format_double(s.huber_delta) << '\n';
    out << "radius=" << format_double(s.radius) << '\n';
    auto write_vec = [&](const char* key, const Vec& v) {
        out << key << '=';
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (j) out << ' ';
            out << format_double(v[j]);
        }
        out << '\n';
    };
    write_vec("center", s.center);
    if (!s.scale.empty()) write_vec("scale", s.scale);
    if (!s.component_weights.empty()) write_vec("component_weights", s.component_weights);
}

UncertaintySetSpec load_set_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_set_spec: cannot open " + path);
    UncertaintySetSpec s;
    std::string line;
    auto read_vec = [](const std::string& rest) {
        Vec v;
        std::size_t start = 0;
        while (start < rest.size()) {
            std::size_t pos = rest.find(' ', start);
            if (pos == std::string::npos) pos = rest.size();
            v.push_back(parse_double(std::string_view(rest).substr(start, pos - start)));
            start = pos + 1;
        }
        return v;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("load_set_spec: malformed line '" + line + "'");
        std::string key = line.substr(0, eq), rest = line.substr(eq + 1);
        if (key == "loss") s.loss = loss_kind_from_name(rest);
        else if (key == "huber_delta") s.huber_delta = parse_double(rest);
        else if (key == "radius") s.radius = parse_double(rest);
        else if (key == "center") s.center = read_vec(rest);
        else if (key == "scale") s.scale = read_vec(rest);
        else if (key == "component_weights") s.component_weights = read_vec(rest);
        else throw std::runtime_error("load_set_spec: unknown key '" + key + "'");
    }
    s.validate();
    return s;
}

} // namespace lossgeom
} // namespace lossrobust
