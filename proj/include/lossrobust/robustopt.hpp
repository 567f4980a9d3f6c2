#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lossrobust/linalg.hpp"
#include "lossrobust/lossgeom.hpp"

namespace lossrobust {
namespace robustopt {

/**
 * @brief Newsvendor cost data: order x units at unit cost, pay backlog for
 * unmet demand and holding for excess.  Requires backlog > order_cost > 0.
 */
struct NewsvendorProblem {
    double order_cost = 1.0;
    double backlog_cost = 6.0;
    double holding_cost = 2.0;
    Vec demands; // strictly increasing scenario demands

    void validate() const;
    double cost(double x, double demand) const;
    Vec cost_vector(double x) const; // per-scenario costs at order quantity x
};

struct RobustProblem {
    enum class Kind { Newsvendor, Portfolio, ShortestPath };
    Kind kind = Kind::Portfolio;
    NewsvendorProblem newsvendor; // used when kind == Newsvendor
    int grid_side = 5;            // used when kind == ShortestPath
    lossgeom::UncertaintySetSpec set;
};

struct RobustSolution {
    Vec decision;          // order quantity / simplex weights / edge indicator
    double robust_value = 0.0;
    Vec inner_worst_case;  // point of the uncertainty set achieving the inner max
    int iterations = 0;
};

std::string solution_csv_header(std::size_t decision_dim);
std::string solution_csv_row(const std::string& problem, double alpha, const std::string& method,
                             double radius, const RobustSolution& sol);

/**
 * @brief Support function of the ellipsoid {y : ||(y - center) / sigma||_2 <= rho}:
 * sup_{y in set} w'y = w'center + rho * ||sigma . w||_2.
 *
 * Accepts SquaredError / ScaledSquaredError sets; component weights fold into
 * sigma as sigma_j / sqrt(weight_j).
 */
double ellipsoid_support(const lossgeom::UncertaintySetSpec& set, const Vec& w);

/// Maximizer of w'y over the same ellipsoid (center when sigma.w vanishes).
Vec ellipsoid_argmax(const lossgeom::UncertaintySetSpec& set, const Vec& w);

struct KlWorstCase {
    Vec p;            // worst-case distribution
    double value = 0; // sum_j p_j cost_j at the worst case
    double theta = 0; // exponential tilting parameter reached
    double kl = 0;    // divergence of p from the (clamped) center
};

/**
 * @brief Maximizes sum_j p_j cost_j over {p in simplex : KL(p || p_hat) <= rho}.
 *
 * p_hat entries are clamped at 1e-12 and renormalized.  Solved by bisection on
 * the tilting parameter theta in [0, 1e3]; when rho reaches the divergence of
 * the argmax-concentrated limit the worst case saturates at max_j cost_j.
 */
KlWorstCase kl_worst_case(const Vec& p_hat, const Vec& costs, double rho);

/**
 * @brief Robust newsvendor: min over x in [0, max demand] of the worst-case
 * expected cost over scenario distributions in the set.
 *
 * CrossEntropy sets give a KL ball around set.center; Misclassification sets
 * allow every scenario whose one-hot label sits within the radius.  Outer
 * minimization is golden-section to 1e-9 in x (the objective is convex in x).
 */
RobustSolution solve_newsvendor(const NewsvendorProblem& prob, const lossgeom::UncertaintySetSpec& set);

/**
 * @brief Robust portfolio: min over simplex x of -center'x + rho*||sigma . x||_2
 * by away-step conditional gradient until the duality gap is below 1e-8.
 *
 * Throws if 1e5 iterations pass without convergence.  Vertex ties take the
 * lowest index.
 */
RobustSolution solve_portfolio(const lossgeom::UncertaintySetSpec& set);

/**
 * @brief Robust shortest path on a grid_side x grid_side lattice moving only
 * east/south: enumerates every monotone path and minimizes
 * center'x + rho*||sigma . x||_2 over path indicators x.
 *
 * Ties are broken by lexicographic order of the sorted edge-index sequence.
 * Refuses grid_side > 8 (enumeration too large; use the cutting-plane mode).
 */
RobustSolution solve_shortest_path(int grid_side, const lossgeom::UncertaintySetSpec& set);

RobustSolution solve(const RobustProblem& prob);

/// Number of edges of the monotone grid: 2 * s * (s - 1).
int grid_edge_count(int grid_side);

/**
 * @brief All monotone NW->SE paths as edge-index lists in traversal order.
 *
 * Edge indexing: horizontal edge (i,j)->(i,j+1) has index i*(s-1)+j;
 * vertical edge (i,j)->(i+1,j) has index s*(s-1) + i*s + j.
 */
std::vector<std::vector<int>> enumerate_paths(int grid_side);

/// Nominal shortest path value by dynamic programming over the grid DAG.
double dp_shortest_path(int grid_side, const Vec& edge_costs);

struct CuttingPlaneResult {
    Vec decision;
    double master_value = 0.0;      // lower bound from the final master solve
    double worst_value = 0.0;       // pessimized value at the returned decision
    Vec last_cut;
    int iterations = 0;             // master solves performed
    std::vector<double> master_trace; // master value after each solve
};

using MasterOracle = std::function<std::pair<Vec, double>(const std::vector<Vec>& scenarios)>;
using Pessimizer = std::function<std::pair<Vec, double>(const Vec& x)>;

/**
 * @brief Generic cutting-plane loop: pessimize at the current decision, add the
 * scenario as a cut, re-solve the master over all cuts; stop once the
 * pessimized value exceeds the master value by at most tol.
 *
 * A singleton uncertainty set terminates after one master solve.  Throws with
 * the violation trace if max_iter master solves do not close the gap.
 */
CuttingPlaneResult cutting_plane(const MasterOracle& master, const Pessimizer& pessimize,
                                 const Vec& initial_x, double tol, int max_iter = 10000);

/// Portfolio solved by cutting planes (master = dense simplex-method LP).
RobustSolution cutting_plane_portfolio(const lossgeom::UncertaintySetSpec& set, double tol = 1e-9);

/// Newsvendor solved by cutting planes (master = golden-section in x).
RobustSolution cutting_plane_newsvendor(const NewsvendorProblem& prob,
                                        const lossgeom::UncertaintySetSpec& set, double tol = 1e-9);

/**
 * @brief Dual (Fenchel) value of sup_{y in set} w'y - offset for
 * SquaredError / AbsoluteError / Huber / ScaledSquaredError sets:
 * inf_{u > 0} of u * conj(w / u) + radius * u - offset, searched over the
 * 1-D dual scale u.  Equals the support-function value for these sets.
 */
double robust_counterpart_value(const lossgeom::UncertaintySetSpec& set, const Vec& w, double offset);

/**
 * @brief min c'z subject to A z = b, z >= 0, by the two-phase tableau simplex
 * method with Bland's rule.  Throws on infeasible or unbounded input.
 * Intended for the small master programs of the cutting-plane loop.
 */
Vec simplex_lp(const Matrix& A, const Vec& b, const Vec& c);

} // namespace robustopt
} // namespace lossrobust
