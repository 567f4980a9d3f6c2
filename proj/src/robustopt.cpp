#include "lossrobust/robustopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lossrobust/csv.hpp"

namespace lossrobust {
namespace robustopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiltCap = 1e3;

/// Minimizes a unimodal f over [lo, hi] to interval width tol; returns f at the midpoint.
double golden_section_min(double lo, double hi, double tol,
                          const std::function<double(double)>& f, double* x_out) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;
    double a = lo, b = hi;
    double h = b - a;
    double x1 = a + invphi2 * h, x2 = a + invphi * h;
    double f1 = f(x1), f2 = f(x2);
    while (h > tol) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            h = b - a;
            x1 = a + invphi2 * h;
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            h = b - a;
            x2 = a + invphi * h;
            f2 = f(x2);
        }
    }
    double xm = 0.5 * (a + b);
    if (x_out) *x_out = xm;
    return f(xm);
}

/// Per-component sigma of the norm form, with component weights folded in
/// as sigma_j / sqrt(weight_j).
Vec effective_sigma(const lossgeom::UncertaintySetSpec& set) {
    using lossgeom::LossKind;
    if (set.loss != LossKind::SquaredError && set.loss != LossKind::ScaledSquaredError)
        throw std::invalid_argument("effective_sigma: set must use squared error in norm form");
    const std::size_t n = set.dim();
    Vec sig(n, 1.0);
    if (set.loss == LossKind::ScaledSquaredError) {
        if (set.scale.size() != n)
            throw std::invalid_argument("effective_sigma: scaled squared error requires scale");
        sig = set.scale;
    }
    if (!set.component_weights.empty()) {
        if (set.component_weights.size() != n)
            throw std::invalid_argument("effective_sigma: component weight size mismatch");
        for (std::size_t j = 0; j < n; ++j) {
            if (!(set.component_weights[j] > 0.0))
                throw std::invalid_argument("effective_sigma: component weights must be positive");
            sig[j] /= std::sqrt(set.component_weights[j]);
        }
    }
    return sig;
}

struct TiltState {
    Vec p;
    double value = 0.0;
    double kl = 0.0;
};

/// Exponentially tilted distribution q proportional to p * exp(theta * costs).
TiltState tilt(const Vec& logp, const Vec& costs, double theta) {
    const std::size_t l = logp.size();
    double mx = -kInf;
    for (std::size_t j = 0; j < l; ++j) mx = std::max(mx, logp[j] + theta * costs[j]);
    TiltState st;
    st.p.resize(l);
    double z = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
        st.p[j] = std::exp(logp[j] + theta * costs[j] - mx);
        z += st.p[j];
    }
    const double logz = mx + std::log(z);
    for (std::size_t j = 0; j < l; ++j) {
        st.p[j] /= z;
        st.value += st.p[j] * costs[j];
    }
    st.kl = theta * st.value - logz; // sum_j q_j log(q_j / p_j)
    return st;
}

} // namespace

void NewsvendorProblem::validate() const {
    if (!(order_cost > 0.0)) throw std::invalid_argument("NewsvendorProblem: order cost must be positive");
    if (!(backlog_cost > order_cost))
        throw std::invalid_argument("NewsvendorProblem: backlog cost must exceed order cost");
    if (!(holding_cost >= 0.0)) throw std::invalid_argument("NewsvendorProblem: holding cost must be >= 0");
    if (demands.empty()) throw std::invalid_argument("NewsvendorProblem: demands must be nonempty");
    for (std::size_t j = 0; j < demands.size(); ++j) {
        if (!std::isfinite(demands[j]))
            throw std::invalid_argument("NewsvendorProblem: demands must be finite");
        if (j > 0 && !(demands[j] > demands[j - 1]))
            throw std::invalid_argument("NewsvendorProblem: demands must be strictly increasing");
    }
}

double NewsvendorProblem::cost(double x, double demand) const {
    return order_cost * x + backlog_cost * std::max(demand - x, 0.0) +
           holding_cost * std::max(x - demand, 0.0);
}

Vec NewsvendorProblem::cost_vector(double x) const {
    Vec out(demands.size());
    for (std::size_t j = 0; j < demands.size(); ++j) out[j] = cost(x, demands[j]);
    return out;
}

std::string solution_csv_header(std::size_t decision_dim) {
    std::string h = "problem,alpha,method,radius,robust_value";
    for (std::size_t j = 0; j < decision_dim; ++j) h += ",x" + std::to_string(j + 1);
    return h;
}

std::string solution_csv_row(const std::string& problem, double alpha, const std::string& method,
                             double radius, const RobustSolution& sol) {
    std::string row = problem + "," + format_double(alpha) + "," + method + "," +
                      format_double(radius) + "," + format_double(sol.robust_value);
    for (double v : sol.decision) row += "," + format_double(v);
    return row;
}

double ellipsoid_support(const lossgeom::UncertaintySetSpec& set, const Vec& w) {
    if (w.size() != set.dim()) throw std::invalid_argument("ellipsoid_support: dimension mismatch");
    const Vec sig = effective_sigma(set);
    double q = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double t = sig[j] * w[j];
        q += t * t;
    }
    return dot(w, set.center) + set.norm_radius() * std::sqrt(q);
}

Vec ellipsoid_argmax(const lossgeom::UncertaintySetSpec& set, const Vec& w) {
    if (w.size() != set.dim()) throw std::invalid_argument("ellipsoid_argmax: dimension mismatch");
    const Vec sig = effective_sigma(set);
    double q = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double t = sig[j] * w[j];
        q += t * t;
    }
    Vec y = set.center;
    const double denom = std::sqrt(q);
    if (denom == 0.0) return y;
    const double rho = set.norm_radius();
    for (std::size_t j = 0; j < w.size(); ++j) y[j] += rho * sig[j] * sig[j] * w[j] / denom;
    return y;
}

KlWorstCase kl_worst_case(const Vec& p_hat, const Vec& costs, double rho) {
    if (p_hat.empty() || p_hat.size() != costs.size())
        throw std::invalid_argument("kl_worst_case: p_hat and costs must have equal nonzero size");
    if (!(rho >= 0.0)) throw std::invalid_argument("kl_worst_case: rho must be >= 0");
    const std::size_t l = p_hat.size();
    Vec p(l);
    double tot = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
        if (!(p_hat[j] >= 0.0) || !std::isfinite(p_hat[j]))
            throw std::invalid_argument("kl_worst_case: p_hat entries must be finite and >= 0");
        p[j] = std::max(p_hat[j], 1e-12);
        tot += p[j];
    }
    for (double& v : p) v /= tot;
    Vec logp(l);
    for (std::size_t j = 0; j < l; ++j) logp[j] = std::log(p[j]);

    KlWorstCase out;
    if (rho == 0.0) {
        out.p = p;
        out.value = dot(p, costs);
        return out;
    }
    // Saturation: past the divergence of the argmax-concentrated limit the
    // worst case puts all mass on the costliest scenarios.
    const double cmax = *std::max_element(costs.begin(), costs.end());
    double sat_mass = 0.0;
    for (std::size_t j = 0; j < l; ++j)
        if (costs[j] == cmax) sat_mass += p[j];
    const double kl_sat = -std::log(sat_mass);
    if (rho >= kl_sat) {
        out.p.assign(l, 0.0);
        for (std::size_t j = 0; j < l; ++j)
            if (costs[j] == cmax) out.p[j] = p[j] / sat_mass;
        out.value = cmax;
        out.theta = kTiltCap;
        out.kl = kl_sat;
        return out;
    }
    TiltState top = tilt(logp, costs, kTiltCap);
    if (top.kl <= rho) {
        out.p = top.p;
        out.value = top.value;
        out.theta = kTiltCap;
        out.kl = top.kl;
        return out;
    }
    // KL "KL(q(theta)||p)" is nondecreasing in theta; bisect to the radius.
    double lo = 0.0, hi = kTiltCap;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tilt(logp, costs, mid).kl <= rho) lo = mid;
        else hi = mid;
    }
    TiltState fin = tilt(logp, costs, lo);
    out.p = fin.p;
    out.value = fin.value;
    out.theta = lo;
    out.kl = fin.kl;
    return out;
}

RobustSolution solve_newsvendor(const NewsvendorProblem& prob, const lossgeom::UncertaintySetSpec& set) {
    using lossgeom::LossKind;
    prob.validate();
    set.validate();
    const std::size_t l = prob.demands.size();
    if (set.dim() != l)
        throw std::invalid_argument("solve_newsvendor: set dimension must equal the scenario count");
    if (set.loss != LossKind::CrossEntropy && set.loss != LossKind::Misclassification)
        throw std::invalid_argument("solve_newsvendor: set loss must be cross-entropy or misclassification");

    int evals = 0;
    std::function<double(double)> objective;
    std::vector<std::size_t> allowed;
    if (set.loss == LossKind::CrossEntropy) {
        objective = [&](double x) {
            ++evals;
            return kl_worst_case(set.center, prob.cost_vector(x), set.radius).value;
        };
    } else {
        for (std::size_t j = 0; j < l; ++j) {
            Vec onehot(l, 0.0);
            onehot[j] = 1.0;
            if (lossgeom::member(set, onehot)) allowed.push_back(j);
        }
        if (allowed.empty())
            throw std::runtime_error("solve_newsvendor: misclassification set admits no scenario");
        objective = [&](double x) {
            ++evals;
            double worst = -kInf;
            for (std::size_t j : allowed) worst = std::max(worst, prob.cost(x, prob.demands[j]));
            return worst;
        };
    }

    double xm = 0.0;
    const double value = golden_section_min(0.0, prob.demands.back(), 1e-9, objective, &xm);
    RobustSolution sol;
    sol.decision = {xm};
    sol.robust_value = value;
    sol.iterations = evals;
    if (set.loss == LossKind::CrossEntropy) {
        sol.inner_worst_case = kl_worst_case(set.center, prob.cost_vector(xm), set.radius).p;
    } else {
        std::size_t worst_j = allowed.front();
        for (std::size_t j : allowed)
            if (prob.cost(xm, prob.demands[j]) > prob.cost(xm, prob.demands[worst_j])) worst_j = j;
        sol.inner_worst_case.assign(l, 0.0);
        sol.inner_worst_case[worst_j] = 1.0;
    }
    return sol;
}

RobustSolution solve_portfolio(const lossgeom::UncertaintySetSpec& set) {
    set.validate();
    const Vec sig = effective_sigma(set);
    const double rho = set.norm_radius();
    const Vec& mu = set.center;
    const std::size_t n = set.dim();
    if (n == 0) throw std::invalid_argument("solve_portfolio: empty set");

    auto fval = [&](const Vec& x) {
        double q = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double t = sig[j] * x[j];
            q += t * t;
        }
        return -dot(mu, x) + rho * std::sqrt(q);
    };
    // Exact line search on the segment x + gamma*d via the derivative of
    // -mu'(x+gamma d) + rho*sqrt(a + 2b gamma + c gamma^2).
    auto line_search = [&](const Vec& x, const Vec& d, double gmax) {
        double a = 0.0, b = 0.0, c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double sx = sig[j] * x[j], sd = sig[j] * d[j];
            a += sx * sx;
            b += sx * sd;
            c += sd * sd;
        }
        const double md = dot(mu, d);
        auto dphi = [&](double t) {
            double q = a + 2.0 * b * t + c * t * t;
            q = std::max(q, 0.0);
            const double nr = std::sqrt(q);
            const double slope = nr > 0.0 ? rho * (b + c * t) / nr : rho * std::sqrt(c);
            return -md + slope;
        };
        if (dphi(0.0) >= 0.0) return 0.0;
        if (dphi(gmax) <= 0.0) return gmax;
        double lo = 0.0, hi = gmax;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (dphi(mid) <= 0.0) lo = mid;
            else hi = mid;
        }
        return lo;
    };

    std::size_t i0 = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (mu[j] > mu[i0]) i0 = j;
    Vec x(n, 0.0);
    x[i0] = 1.0;

    const int cap = 100000;
    const double gap_tol = 1e-8;
    int steps = 0;
    double gap = kInf;
    while (true) {
        double q = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double t = sig[j] * x[j];
            q += t * t;
        }
        const double nrm = std::sqrt(q);
        Vec g(n);
        for (std::size_t j = 0; j < n; ++j)
            g[j] = -mu[j] + (nrm > 0.0 ? rho * sig[j] * sig[j] * x[j] / nrm : 0.0);

        std::size_t s = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (g[j] < g[s]) s = j;
        const double gx = dot(g, x);
        gap = gx - g[s];
        if (gap <= gap_tol) break;
        if (steps >= cap) {
            std::ostringstream os;
            os << "solve_portfolio: no convergence in " << cap
               << " iterations; duality gap " << gap;
            throw std::runtime_error(os.str());
        }
        std::size_t a = n;
        for (std::size_t j = 0; j < n; ++j)
            if (x[j] > 0.0 && (a == n || g[j] > g[a])) a = j;
        const double away_gap = g[a] - gx;

        Vec d(n);
        double gmax = 1.0;
        if (away_gap > gap && x[a] < 1.0) {
            for (std::size_t j = 0; j < n; ++j) d[j] = x[j];
            d[a] -= 1.0;
            gmax = x[a] / (1.0 - x[a]);
        } else {
            for (std::size_t j = 0; j < n; ++j) d[j] = -x[j];
            d[s] += 1.0;
        }
        const double gamma = line_search(x, d, gmax);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            x[j] += gamma * d[j];
            if (x[j] < 1e-15) x[j] = 0.0;
            sum += x[j];
        }
        for (std::size_t j = 0; j < n; ++j) x[j] /= sum;
        ++steps;
    }

    RobustSolution sol;
    sol.decision = x;
    sol.robust_value = fval(x);
    Vec negx(n);
    for (std::size_t j = 0; j < n; ++j) negx[j] = -x[j];
    sol.inner_worst_case = ellipsoid_argmax(set, negx);
    sol.iterations = steps;
    return sol;
}

int grid_edge_count(int grid_side) {
    if (grid_side < 2) throw std::invalid_argument("grid_edge_count: grid_side must be >= 2");
    return 2 * grid_side * (grid_side - 1);
}

std::vector<std::vector<int>> enumerate_paths(int grid_side) {
    if (grid_side < 2) throw std::invalid_argument("enumerate_paths: grid_side must be >= 2");
    if (grid_side > 8)
        throw std::invalid_argument(
            "enumerate_paths: grid_side > 8 enumerates too many paths; use the cutting-plane mode");
    const int s = grid_side;
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int, int)> walk = [&](int i, int j) {
        if (i == s - 1 && j == s - 1) {
            out.push_back(cur);
            return;
        }
        if (j + 1 < s) {
            cur.push_back(i * (s - 1) + j);
            walk(i, j + 1);
            cur.pop_back();
        }
        if (i + 1 < s) {
            cur.push_back(s * (s - 1) + i * s + j);
            walk(i + 1, j);
            cur.pop_back();
        }
    };
    walk(0, 0);
    return out;
}

double dp_shortest_path(int grid_side, const Vec& edge_costs) {
    const int s = grid_side;
    if ((int)edge_costs.size() != grid_edge_count(s))
        throw std::invalid_argument("dp_shortest_path: edge cost size mismatch");
    std::vector<double> dist(s * s, kInf);
    dist[0] = 0.0;
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            const int idx = i * s + j;
            if (j > 0)
                dist[idx] = std::min(dist[idx], dist[i * s + j - 1] + edge_costs[i * (s - 1) + (j - 1)]);
            if (i > 0)
                dist[idx] = std::min(dist[idx], dist[(i - 1) * s + j] + edge_costs[s * (s - 1) + (i - 1) * s + j]);
        }
    }
    return dist[s * s - 1];
}

RobustSolution solve_shortest_path(int grid_side, const lossgeom::UncertaintySetSpec& set) {
    set.validate();
    const Vec sig = effective_sigma(set);
    const int m = grid_edge_count(grid_side);
    if ((int)set.dim() != m)
        throw std::invalid_argument("solve_shortest_path: set dimension must equal the edge count");
    const double rho = set.norm_radius();
    const auto paths = enumerate_paths(grid_side);

    double best = kInf;
    std::vector<int> best_key;
    std::size_t best_idx = 0;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        double lin = 0.0, q = 0.0;
        for (int e : paths[k]) {
            lin += set.center[e];
            q += sig[e] * sig[e];
        }
        const double val = lin + rho * std::sqrt(q);
        std::vector<int> key = paths[k];
        std::sort(key.begin(), key.end());
        if (val < best || (val == best && key < best_key)) {
            best = val;
            best_key = std::move(key);
            best_idx = k;
        }
    }

    RobustSolution sol;
    sol.decision.assign(m, 0.0);
    for (int e : paths[best_idx]) sol.decision[e] = 1.0;
    sol.robust_value = best;
    sol.inner_worst_case = ellipsoid_argmax(set, sol.decision);
    sol.iterations = (int)paths.size();
    return sol;
}

RobustSolution solve(const RobustProblem& prob) {
    switch (prob.kind) {
        case RobustProblem::Kind::Newsvendor: return solve_newsvendor(prob.newsvendor, prob.set);
        case RobustProblem::Kind::Portfolio: return solve_portfolio(prob.set);
        case RobustProblem::Kind::ShortestPath: return solve_shortest_path(prob.grid_side, prob.set);
    }
    throw std::logic_error("solve: unknown problem kind");
}

CuttingPlaneResult cutting_plane(const MasterOracle& master, const Pessimizer& pessimize,
                                 const Vec& initial_x, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("cutting_plane: tol must be positive");
    CuttingPlaneResult res;
    std::vector<Vec> cuts;
    std::vector<double> violations;
    Vec x = initial_x;
    double mv = -kInf;
    for (int it = 0; it < max_iter; ++it) {
        auto [y, worst] = pessimize(x);
        const double violation = worst - mv;
        violations.push_back(violation);
        if (violation <= tol) {
            res.decision = x;
            res.master_value = mv;
            res.worst_value = worst;
            res.last_cut = y;
            res.iterations = it;
            return res;
        }
        cuts.push_back(std::move(y));
        auto [xn, v] = master(cuts);
        x = std::move(xn);
        mv = v;
        res.master_trace.push_back(v);
    }
    std::ostringstream os;
    os << "cutting_plane: iteration cap " << max_iter << " exceeded; recent violations:";
    const std::size_t tail = violations.size() > 5 ? violations.size() - 5 : 0;
    for (std::size_t i = tail; i < violations.size(); ++i) os << " " << violations[i];
    throw std::runtime_error(os.str());
}

Vec simplex_lp(const Matrix& A, const Vec& b, const Vec& c) {
    const std::size_t m = A.rows, n = A.cols;
    if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex_lp: shape mismatch");
    constexpr double tol = 1e-9;
    const std::size_t cols = n + m + 1, rhs = cols - 1;
    std::vector<Vec> t(m + 1, Vec(cols, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        const double s = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t[i][j] = s * A(i, j);
        t[i][n + i] = 1.0;
        t[i][rhs] = s * b[i];
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

    auto pivot = [&](std::size_t pr, std::size_t pc) {
        const double piv = t[pr][pc];
        for (std::size_t j = 0; j < cols; ++j) t[pr][j] /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == pr) continue;
            const double f = t[i][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[pr][j];
            t[i][pc] = 0.0;
        }
        basis[pr] = pc;
    };
    // Bland's rule: first improving column enters; ratio ties resolved by the
    // lowest leaving basis index, which rules out cycling.
    auto optimize = [&](const std::vector<bool>& allowed) {
        for (int guard = 0; guard < 200000; ++guard) {
            std::size_t pc = rhs;
            for (std::size_t j = 0; j < rhs; ++j) {
                if (allowed[j] && t[m][j] < -tol) {
                    pc = j;
                    break;
                }
            }
            if (pc == rhs) return;
            std::size_t pr = m;
            double best = 0.0;
            std::size_t best_var = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (t[i][pc] > tol) {
                    const double ratio = t[i][rhs] / t[i][pc];
                    if (pr == m || ratio < best - 1e-15 ||
                        (std::abs(ratio - best) <= 1e-15 && basis[i] < best_var)) {
                        pr = i;
                        best = ratio;
                        best_var = basis[i];
                    }
                }
            }
            if (pr == m) throw std::runtime_error("simplex_lp: unbounded program");
            pivot(pr, pc);
        }
        throw std::runtime_error("simplex_lp: pivot guard tripped");
    };

    // Phase 1: minimize the artificial mass.
    for (std::size_t j = 0; j < cols; ++j) {
        if (j >= n && j < n + m) {
            t[m][j] = 0.0;
            continue;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += t[i][j];
        t[m][j] = -s;
    }
    std::vector<bool> allowed(cols, true);
    optimize(allowed);
    if (-t[m][rhs] > 1e-7) throw std::runtime_error("simplex_lp: infeasible program");
    // Drive leftover artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(t[i][j]) > tol) {
                pivot(i, j);
                break;
            }
        }
    }

    // Phase 2 over the original objective; artificial columns stay out.
    for (std::size_t j = 0; j < cols; ++j) t[m][j] = j < n ? c[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] >= n) continue;
        const double f = c[basis[i]];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) t[m][j] -= f * t[i][j];
    }
    for (std::size_t j = n; j < n + m; ++j) allowed[j] = false;
    optimize(allowed);

    Vec z(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) z[basis[i]] = t[i][rhs];
    return z;
}

RobustSolution cutting_plane_portfolio(const lossgeom::UncertaintySetSpec& set, double tol) {
    set.validate();
    effective_sigma(set); // validates the set kind up front
    const std::size_t n = set.dim();

    Pessimizer pessimize = [&](const Vec& x) {
        Vec negx(n);
        for (std::size_t j = 0; j < n; ++j) negx[j] = -x[j];
        Vec y = ellipsoid_argmax(set, negx);
        return std::make_pair(y, -dot(x, y));
    };
    MasterOracle master = [&](const std::vector<Vec>& cuts) {
        const std::size_t k = cuts.size();
        // min t  s.t.  -y'x - t <= 0 for every cut y,  x on the simplex.
        Matrix A(1 + k, n + 2 + k);
        Vec b(1 + k, 0.0), c(n + 2 + k, 0.0);
        for (std::size_t j = 0; j < n; ++j) A(0, j) = 1.0;
        b[0] = 1.0;
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t j = 0; j < n; ++j) A(1 + r, j) = -cuts[r][j];
            A(1 + r, n) = -1.0;     // t+
            A(1 + r, n + 1) = 1.0;  // t-
            A(1 + r, n + 2 + r) = 1.0;
        }
        c[n] = 1.0;
        c[n + 1] = -1.0;
        Vec z = simplex_lp(A, b, c);
        Vec x(z.begin(), z.begin() + n);
        double sum = 0.0;
        for (double& v : x) {
            if (v < 0.0) v = 0.0;
            sum += v;
        }
        for (double& v : x) v /= sum;
        return std::make_pair(x, z[n] - z[n + 1]);
    };

    Vec x0(n, 1.0 / (double)n);
    auto cp = cutting_plane(master, pessimize, x0, tol);
    RobustSolution sol;
    sol.decision = cp.decision;
    sol.robust_value = cp.worst_value;
    sol.inner_worst_case = cp.last_cut;
    sol.iterations = cp.iterations;
    return sol;
}

RobustSolution cutting_plane_newsvendor(const NewsvendorProblem& prob,
                                        const lossgeom::UncertaintySetSpec& set, double tol) {
    prob.validate();
    set.validate();
    if (set.loss != lossgeom::LossKind::CrossEntropy)
        throw std::invalid_argument("cutting_plane_newsvendor: set loss must be cross-entropy");
    if (set.dim() != prob.demands.size())
        throw std::invalid_argument("cutting_plane_newsvendor: set dimension must equal the scenario count");
    const double dmax = prob.demands.back();

    Pessimizer pessimize = [&](const Vec& x) {
        auto kw = kl_worst_case(set.center, prob.cost_vector(x[0]), set.radius);
        return std::make_pair(kw.p, kw.value);
    };
    MasterOracle master = [&](const std::vector<Vec>& cuts) {
        auto f = [&](double x) {
            const Vec costs = prob.cost_vector(x);
            double worst = -kInf;
            for (const Vec& p : cuts) worst = std::max(worst, dot(p, costs));
            return worst;
        };
        double xm = 0.0;
        const double v = golden_section_min(0.0, dmax, 1e-9, f, &xm);
        return std::make_pair(Vec{xm}, v);
    };

    auto cp = cutting_plane(master, pessimize, Vec{0.0}, tol);
    RobustSolution sol;
    sol.decision = cp.decision;
    sol.robust_value = cp.worst_value;
    sol.inner_worst_case = cp.last_cut;
    sol.iterations = cp.iterations;
    return sol;
}

double robust_counterpart_value(const lossgeom::UncertaintySetSpec& set, const Vec& w, double offset) {
    using lossgeom::LossKind;
    if (w.size() != set.dim()) throw std::invalid_argument("robust_counterpart_value: dimension mismatch");
    const LossKind kind = set.loss;
    if (kind != LossKind::SquaredError && kind != LossKind::AbsoluteError &&
        kind != LossKind::Huber && kind != LossKind::ScaledSquaredError)
        throw std::invalid_argument("robust_counterpart_value: unsupported loss kind");
    const double rho = set.radius;
    if (rho < 0.0)
        throw std::runtime_error(
            "robust_counterpart_value: dual unbounded below; the uncertainty set is empty");

    const std::size_t n = set.dim();
    Vec omega(n, 1.0);
    if (!set.component_weights.empty()) {
        if (set.component_weights.size() != n)
            throw std::invalid_argument("robust_counterpart_value: component weight size mismatch");
        omega = set.component_weights;
    }
    Vec sigma(n, 1.0);
    if (kind == LossKind::ScaledSquaredError) {
        if (set.scale.size() != n)
            throw std::invalid_argument("robust_counterpart_value: scaled squared error requires scale");
        sigma = set.scale;
    }

    const double base = dot(w, set.center);
    if (rho == 0.0) return base - offset; // singleton duality

    // u * conj(w/u) decomposes into base + sum_j u * omega_j * B(a_j / u) with
    // a_j = sigma_j w_j / omega_j and B the conjugate of the centered unit loss.
    double amax = 0.0, quad = 0.0;
    const double qcoef = (kind == LossKind::Huber) ? 0.5 : 0.25; // B(t) = qcoef * t^2 on its domain
    for (std::size_t j = 0; j < n; ++j) {
        const double a = sigma[j] * w[j] / omega[j];
        amax = std::max(amax, std::abs(a));
        quad += omega[j] * qcoef * a * a;
    }
    if (kind == LossKind::AbsoluteError)
        return base + rho * amax - offset; // phi(u) = rho*u, nondecreasing on [amax, inf)
    if (quad == 0.0) return base - offset;

    double umin = 0.0;
    if (kind == LossKind::Huber) umin = amax / set.huber_delta;
    auto phi = [&](double u) { return rho * u + quad / u; };
    const double ustar = std::sqrt(quad / rho);
    double lo = std::max(umin, 1e-3 * ustar);
    double hi = std::max({1e3 * ustar, umin * (1.0 + 1e-3), 2.0 * lo});
    const double dual = golden_section_min(lo, hi, 1e-9 * std::max(1.0, hi), phi, nullptr);
    return base + dual - offset;
}

} // namespace robustopt
} // namespace lossrobust
