#pragma once

#include <string>
#include <utility>

#include "lossrobust/linalg.hpp"

namespace lossrobust {
namespace lossgeom {

enum class LossKind {
    SquaredError,
    AbsoluteError,
    Huber,
    CrossEntropy,
    Hinge,
    Misclassification,
    ScaledSquaredError // squared error on per-component standardized residuals
};

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& s);

/**
 * @brief Uncertainty set {y : sum_j w_j * loss_j(y_j, center_j) <= radius}.
 *
 * radius is the loss threshold.  For SquaredError / ScaledSquaredError the
 * equivalent ellipsoid has norm radius sqrt(radius); norm_radius() exposes
 * that conversion.  scale holds per-component sigma for ScaledSquaredError
 * (ones otherwise); component_weights default to ones.
 */
struct UncertaintySetSpec {
    LossKind loss = LossKind::SquaredError;
    double huber_delta = 1.0;
    Vec center;
    Vec scale;
    Vec component_weights;
    double radius = 0.0;

    std::size_t dim() const { return center.size(); }
    double norm_radius() const;
    void validate() const;
};

void save_set_spec(const UncertaintySetSpec& s, const std::string& path);
UncertaintySetSpec load_set_spec(const std::string& path);

/// Per-component loss value; yhat is the prediction for that component.
double loss_eval(LossKind k, double huber_delta, double y, double yhat);

/// Total weighted loss of vector y against the set's center.
double set_loss(const UncertaintySetSpec& s, const Vec& y);

/// Membership test, boundary inclusive.
bool member(const UncertaintySetSpec& s, const Vec& y);

/**
 * @brief Convex conjugate sup_y { v*y - loss(y, yhat) } for one component.
 *
 * Returns +infinity outside the finite domain (|v| > 1 for AbsoluteError,
 * |v| > delta for Huber).  Closed forms:
 *   SquaredError:  yhat*v + v^2/4
 *   AbsoluteError: yhat*v             (|v| <= 1)
 *   Huber(delta):  yhat*v + v^2/2     (|v| <= delta)
 */
double conjugate(LossKind k, double huber_delta, double v, double yhat);

/**
 * @brief Scale weights for summing per-component losses into one set.
 *
 * Given per-component mean losses, the weight of component j is
 * 1 / mean_loss_j, the minimizer of the normalized penalty
 * mean_loss / s^2 + log s^2 over scale s^2 (regression); classification
 * components carry sigma_star_sq = 2 * mean_loss but the same weight.
 */
struct CombinedLossWeights {
    Vec weights;
    Vec sigma_star_sq;
};

CombinedLossWeights combine_losses(const Vec& mean_losses, const std::vector<bool>& is_classification);

/**
 * @brief Checks that cross-entropy membership of a one-hot label equals
 * KL-ball membership of the same label against the predicted distribution.
 * Returns (cross-entropy side, KL side); the two must always agree.
 */
std::pair<bool, bool> kl_equivalence_check(const Vec& onehot, const Vec& predicted, double rho);

/// Hinge loss of y in {0,1} against yhat in [0,1] equals 2*|yhat - y|.
std::pair<double, double> hinge_equivalence_check(double y, double yhat);

} // namespace lossgeom
} // namespace lossrobust
