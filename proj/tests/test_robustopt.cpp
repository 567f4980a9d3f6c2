#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lossrobust/robustopt.hpp"
#include "lossrobust/rng.hpp"
#include "oracles.hpp"

using namespace lossrobust;
using namespace lossrobust::robustopt;
using lossgeom::LossKind;
using lossgeom::UncertaintySetSpec;

namespace {

UncertaintySetSpec norm_ball(Vec center, double norm_radius) {
    UncertaintySetSpec s;
    s.loss = LossKind::SquaredError;
    s.center = std::move(center);
    s.radius = norm_radius * norm_radius;
    return s;
}

UncertaintySetSpec scaled_ball(Vec center, Vec scale, double norm_radius) {
    UncertaintySetSpec s;
    s.loss = LossKind::ScaledSquaredError;
    s.center = std::move(center);
    s.scale = std::move(scale);
    s.radius = norm_radius * norm_radius;
    return s;
}

/// sigma_j / sqrt(weight_j), the documented norm-form scale of a set.
Vec folded_sigma(const UncertaintySetSpec& s) {
    Vec sig(s.dim(), 1.0);
    if (s.loss == LossKind::ScaledSquaredError) sig = s.scale;
    if (!s.component_weights.empty())
        for (std::size_t j = 0; j < sig.size(); ++j) sig[j] /= std::sqrt(s.component_weights[j]);
    return sig;
}

NewsvendorProblem two_scenario() {
    NewsvendorProblem p;
    p.order_cost = 1.0;
    p.backlog_cost = 6.0;
    p.holding_cost = 2.0;
    p.demands = {1.0, 10.0};
    return p;
}

} // namespace

TEST_CASE("newsvendor cost pieces and validation") {
    NewsvendorProblem p = two_scenario();
    CHECK_NOTHROW(p.validate());
    CHECK(p.cost(2.0, 5.0) == doctest::Approx(2.0 + 6.0 * 3.0).epsilon(1e-15));
    CHECK(p.cost(7.0, 5.0) == doctest::Approx(7.0 + 2.0 * 2.0).epsilon(1e-15));
    CHECK(p.cost(5.0, 5.0) == 5.0);
    Vec cv = p.cost_vector(1.0);
    CHECK(cv[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cv[1] == doctest::Approx(1.0 + 54.0).epsilon(1e-15));

    NewsvendorProblem bad = p;
    bad.order_cost = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.backlog_cost = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.holding_cost = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.demands = {};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.demands = {5.0, 5.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("ellipsoid support function: degenerate, axis, and folded-scale cases") {
    UncertaintySetSpec point = norm_ball({1.0, -2.0, 0.5}, 0.0);
    Vec w = {2.0, 1.0, -4.0};
    CHECK(ellipsoid_support(point, w) == doctest::Approx(dot(w, point.center)).epsilon(1e-15));

    UncertaintySetSpec ball = norm_ball({1.0, -2.0, 0.5}, 1.5);
    Vec axis = {0.0, 1.0, 0.0};
    CHECK(ellipsoid_support(ball, axis) == doctest::Approx(-2.0 + 1.5).epsilon(1e-12));

    UncertaintySetSpec sc = scaled_ball({0.0, 0.0}, {3.0, 0.5}, 2.0);
    sc.component_weights = {4.0, 1.0};
    // Effective sigma = (3/2, 0.5): support along e1 = 2 * 1.5.
    CHECK(ellipsoid_support(sc, {1.0, 0.0}) == doctest::Approx(3.0).epsilon(1e-12));

    CHECK_THROWS_AS(ellipsoid_support(ball, {1.0}), std::invalid_argument);
    UncertaintySetSpec ce = norm_ball({0.5, 0.5}, 1.0);
    ce.loss = LossKind::CrossEntropy;
    CHECK_THROWS_AS(ellipsoid_support(ce, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("ellipsoid support dominates every sampled boundary point and is attained") {
    Rng rng(314);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t m = 4;
        Vec center(m), scale(m), weights(m), w(m);
        for (std::size_t j = 0; j < m; ++j) {
            center[j] = rng.uniform(-2, 2);
            scale[j] = rng.uniform(0.3, 2.0);
            weights[j] = rng.uniform(0.5, 3.0);
            w[j] = rng.uniform(-2, 2);
        }
        UncertaintySetSpec s = scaled_ball(center, scale, rng.uniform(0.5, 2.0));
        s.component_weights = weights;
        const double rho = s.norm_radius();
        const Vec sig = folded_sigma(s);
        const double sup = ellipsoid_support(s, w);

        double best = -1e300;
        for (int k = 0; k < 100000; ++k) {
            Vec u(m);
            double nrm = 0.0;
            for (double& v : u) {
                v = rng.normal();
                nrm += v * v;
            }
            nrm = std::sqrt(nrm);
            double val = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                val += w[j] * (center[j] + rho * sig[j] * u[j] / nrm);
            CHECK(val <= sup + 1e-9);
            best = std::max(best, val);
        }
        // Sampling gap scales with the ellipsoid extent, not with |sup|, so
        // the attainment check is absolute in the set's value range.
        double extent = rho * norm2({sig[0] * w[0], sig[1] * w[1], sig[2] * w[2], sig[3] * w[3]});
        CHECK(sup - best <= 2e-3 * std::max(1.0, extent));

        // The closed-form maximizer sits on the boundary and attains the value.
        Vec ystar = ellipsoid_argmax(s, w);
        CHECK(dot(w, ystar) == doctest::Approx(sup).epsilon(1e-12));
        CHECK(lossgeom::set_loss(s, ystar) == doctest::Approx(s.radius).epsilon(1e-9));
        Vec inside(m);
        for (std::size_t j = 0; j < m; ++j)
            inside[j] = center[j] + 0.999999 * (ystar[j] - center[j]);
        CHECK(lossgeom::member(s, inside));
    }
    UncertaintySetSpec zero = norm_ball({1.0, 2.0}, 1.0);
    CHECK(ellipsoid_argmax(zero, {0.0, 0.0}) == zero.center);
}

TEST_CASE("KL worst case: center at zero radius, saturation at large radius") {
    Vec p_hat = {0.5, 0.3, 0.2};
    Vec costs = {1.0, 4.0, 2.0};
    KlWorstCase base = kl_worst_case(p_hat, costs, 0.0);
    CHECK(base.value == doctest::Approx(dot(p_hat, costs)).epsilon(1e-9));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(base.p[j] == doctest::Approx(p_hat[j]).epsilon(1e-9));

    // Saturation: all mass on the costliest scenario once rho >= -log p_hat_max.
    KlWorstCase sat = kl_worst_case(p_hat, costs, -std::log(0.3) + 0.1);
    CHECK(sat.value == 4.0);
    CHECK(sat.p[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sat.kl == doctest::Approx(-std::log(0.3)).epsilon(1e-9));

    CHECK_THROWS_AS(kl_worst_case({}, {}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(kl_worst_case({0.5, 0.5}, {1.0}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(kl_worst_case({0.5, 0.5}, {1.0, 2.0}, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(kl_worst_case({0.5, -0.5}, {1.0, 2.0}, 0.1), std::invalid_argument);
}

TEST_CASE("KL worst case matches a dense grid search on two scenarios") {
    Rng rng(2718);
    for (int trial = 0; trial < 8; ++trial) {
        double a = rng.uniform(0.1, 0.9);
        Vec p_hat = {a, 1.0 - a};
        Vec costs = {rng.uniform(0, 5), rng.uniform(0, 5)};
        double rho = rng.uniform(0.01, 0.5);
        KlWorstCase wc = kl_worst_case(p_hat, costs, rho);

        double best = -1e300;
        const int steps = 200000;
        for (int k = 0; k <= steps; ++k) {
            double t = double(k) / steps;
            double kl = 0.0;
            if (t > 0.0) kl += t * std::log(t / p_hat[0]);
            if (t < 1.0) kl += (1.0 - t) * std::log((1.0 - t) / p_hat[1]);
            if (kl <= rho) best = std::max(best, t * costs[0] + (1.0 - t) * costs[1]);
        }
        CHECK(wc.value == doctest::Approx(best).epsilon(1e-4));
        CHECK(wc.kl <= rho + 1e-9);
        CHECK(wc.p[0] + wc.p[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("KL worst case value is nondecreasing in the radius") {
    Vec p_hat = {0.4, 0.35, 0.25};
    Vec costs = {2.0, 5.0, 1.0};
    double prev = -1e300;
    for (double rho : {0.0, 0.01, 0.05, 0.1, 0.3, 0.8, 2.0}) {
        double v = kl_worst_case(p_hat, costs, rho).value;
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(prev == 5.0); // saturated well before rho = 2
}

TEST_CASE("robust newsvendor with a KL ball: frozen endpoints") {
    NewsvendorProblem p = two_scenario();

    UncertaintySetSpec s;
    s.loss = LossKind::CrossEntropy;
    s.center = {1.0, 0.0};
    s.radius = 0.0;
    RobustSolution certain = solve_newsvendor(p, s);
    CHECK(certain.decision[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(certain.robust_value == doctest::Approx(1.0).epsilon(1e-4));

    // Without holding costs a huge ball saturates on the max-cost scenario and
    // ordering the full d = 10 costs exactly 10 whatever the demand mix.
    NewsvendorProblem free_holding = p;
    free_holding.holding_cost = 0.0;
    s.center = {0.5, 0.5};
    s.radius = 10.0;
    RobustSolution worst = solve_newsvendor(free_holding, s);
    CHECK(worst.decision[0] == doctest::Approx(10.0).epsilon(1e-4));
    CHECK(worst.robust_value == doctest::Approx(10.0).epsilon(1e-6));

    // With holding cost 2 the saturated minimax balances 3x-2 against 60-5x.
    RobustSolution balance = solve_newsvendor(p, s);
    CHECK(balance.decision[0] == doctest::Approx(7.75).epsilon(1e-4));
    CHECK(balance.robust_value == doctest::Approx(21.25).epsilon(1e-6));

    // Zero radius at the uniform mix: expected cost 29 - x on [1, 10].
    s.radius = 0.0;
    RobustSolution mix = solve_newsvendor(p, s);
    CHECK(mix.decision[0] == doctest::Approx(10.0).epsilon(1e-4));
    CHECK(mix.robust_value == doctest::Approx(19.0).epsilon(1e-6));

    UncertaintySetSpec wrong = norm_ball({0.5, 0.5}, 1.0);
    CHECK_THROWS_AS(solve_newsvendor(p, wrong), std::invalid_argument);
    s.center = {0.5, 0.5, 0.0};
    CHECK_THROWS_AS(solve_newsvendor(p, s), std::invalid_argument);
}

TEST_CASE("robust newsvendor with a KL ball matches a dense x grid") {
    NewsvendorProblem p = two_scenario();
    UncertaintySetSpec s;
    s.loss = LossKind::CrossEntropy;
    s.center = {0.7, 0.3};
    s.radius = 0.08;
    RobustSolution sol = solve_newsvendor(p, s);

    double best = 1e300, bestx = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        double x = 10.0 * k / 100000.0;
        double v = kl_worst_case(s.center, p.cost_vector(x), s.radius).value;
        if (v < best) {
            best = v;
            bestx = x;
        }
    }
    CHECK(sol.robust_value == doctest::Approx(best).epsilon(1e-6));
    CHECK(std::fabs(sol.decision[0] - bestx) <= 0.05);
    // The reported worst-case mix prices the solution back to the value.
    CHECK(dot(sol.inner_worst_case, p.cost_vector(sol.decision[0])) ==
          doctest::Approx(sol.robust_value).epsilon(1e-9));
}

TEST_CASE("robust newsvendor with a scenario-budget set is plain minimax") {
    NewsvendorProblem p = two_scenario();
    p.demands = {1.0, 5.0, 10.0};
    UncertaintySetSpec s;
    s.loss = LossKind::Misclassification;
    s.center = {1.0, 0.0, 0.0};
    s.radius = 0.0;
    RobustSolution only_first = solve_newsvendor(p, s);
    CHECK(only_first.decision[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(only_first.robust_value == doctest::Approx(1.0).epsilon(1e-6));

    // Radius 2.5 admits every scenario (one-hot labels differ in two slots):
    // minimax of cost(x,1) = 3x-2 rising against cost(x,10) = 60-5x falling.
    s.radius = 2.5;
    RobustSolution all = solve_newsvendor(p, s);
    CHECK(all.decision[0] == doctest::Approx(7.75).epsilon(1e-4));
    CHECK(all.robust_value == doctest::Approx(21.25).epsilon(1e-6));
    // Both extreme scenarios tie at the saddle; the reported worst case must
    // be one of them and price the solution back to the minimax value.
    CHECK(dot(all.inner_worst_case, p.cost_vector(all.decision[0])) ==
          doctest::Approx(21.25).epsilon(1e-4));
}

TEST_CASE("robust portfolio: certainty picks the best asset, symmetry spreads evenly") {
    UncertaintySetSpec s = norm_ball({1.0, 2.0, 3.0}, 0.0);
    RobustSolution best = solve_portfolio(s);
    CHECK(best.decision[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(best.robust_value == doctest::Approx(-3.0).epsilon(1e-9));

    UncertaintySetSpec sym = norm_ball({1.0, 1.0, 1.0}, 0.6);
    RobustSolution even = solve_portfolio(sym);
    for (double x : even.decision) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(even.robust_value == doctest::Approx(-1.0 + 0.6 / std::sqrt(3.0)).epsilon(1e-7));

    double total = 0.0;
    for (double x : even.decision) {
        CHECK(x >= 0.0);
        total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(solve_portfolio(norm_ball({}, 1.0)), std::invalid_argument);
}

TEST_CASE("robust portfolio matches exhaustive simplex grids") {
    Rng rng(555);
    auto run = [&](std::size_t m, int steps, double slack) {
        Vec mu(m), sc(m);
        for (std::size_t j = 0; j < m; ++j) {
            mu[j] = rng.uniform(-1, 1);
            sc[j] = rng.uniform(0.2, 2.0);
        }
        UncertaintySetSpec s = scaled_ball(mu, sc, rng.uniform(0.2, 1.5));
        const double rho = s.norm_radius();
        RobustSolution sol = solve_portfolio(s);

        double grid_best = 1e300;
        for (const Vec& x : oracles::simplex_grid(m, steps)) {
            double q = 0.0;
            for (std::size_t j = 0; j < m; ++j) q += sc[j] * sc[j] * x[j] * x[j];
            grid_best = std::min(grid_best, -dot(mu, x) + rho * std::sqrt(q));
        }
        CHECK(sol.robust_value <= grid_best + 1e-9);
        CHECK(sol.robust_value >= grid_best - slack);

        double q = 0.0;
        for (std::size_t j = 0; j < m; ++j) q += sc[j] * sc[j] * sol.decision[j] * sol.decision[j];
        CHECK(-dot(mu, sol.decision) + rho * std::sqrt(q) ==
              doctest::Approx(sol.robust_value).epsilon(1e-12));
    };
    for (int t = 0; t < 5; ++t) run(3, 100, 1e-3);
    for (int t = 0; t < 3; ++t) run(5, 50, 5e-3);
}

TEST_CASE("robust portfolio value grows with the radius") {
    UncertaintySetSpec s = norm_ball({0.3, 0.8, 0.5, 0.1}, 0.0);
    double prev = -1e300;
    for (double rho : {0.0, 0.2, 0.5, 1.0, 2.0}) {
        s.radius = rho * rho;
        double v = solve_portfolio(s).robust_value;
        CHECK(v >= prev - 1e-10);
        prev = v;
    }
}

TEST_CASE("path enumeration: counts, lengths, uniqueness, and the index layout") {
    auto paths = enumerate_paths(5);
    CHECK(paths.size() == 70); // C(8,4)
    std::vector<std::vector<int>> keys;
    for (const auto& p : paths) {
        CHECK(p.size() == 8);
        for (int e : p) {
            CHECK(e >= 0);
            CHECK(e < grid_edge_count(5));
        }
        auto k = p;
        std::sort(k.begin(), k.end());
        CHECK(std::adjacent_find(k.begin(), k.end()) == k.end());
        keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());

    auto two = enumerate_paths(2);
    CHECK(two.size() == 2);
    // East-then-south explores first: horizontal (0,0) edge 0, vertical (0,1) edge 2+0*2+1 = 3.
    CHECK(two[0] == std::vector<int>{0, 3});
    CHECK(two[1] == std::vector<int>{2, 1});

    CHECK(grid_edge_count(5) == 40);
    CHECK_THROWS_AS(enumerate_paths(1), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_paths(9), std::invalid_argument);
    CHECK_THROWS_AS(grid_edge_count(1), std::invalid_argument);
}

TEST_CASE("grid DP agrees with path enumeration and an independent recursion") {
    Rng rng(808);
    for (int trial = 0; trial < 20; ++trial) {
        int s = 2 + trial % 5; // 2..6
        Vec costs(grid_edge_count(s));
        for (double& c : costs) c = rng.uniform(0.0, 3.0);

        double brute = 1e300;
        for (const auto& p : enumerate_paths(s)) {
            double tot = 0.0;
            for (int e : p) tot += costs[e];
            brute = std::min(brute, tot);
        }
        double dp = dp_shortest_path(s, costs);
        CHECK(dp == doctest::Approx(brute).epsilon(1e-12));
        CHECK(dp == doctest::Approx(oracles::grid_dp(s, costs)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(dp_shortest_path(3, Vec(5, 1.0)), std::invalid_argument);
}

TEST_CASE("robust shortest path: nominal reduction, tie-break, and robust pricing") {
    const int s = 5;
    const int m = grid_edge_count(s);
    Rng rng(909);

    // Zero radius reduces to the nominal DP.
    Vec costs(m);
    for (double& c : costs) c = rng.uniform(0.1, 2.0);
    UncertaintySetSpec nominal = norm_ball(costs, 0.0);
    RobustSolution plain = solve_shortest_path(s, nominal);
    CHECK(plain.robust_value == doctest::Approx(dp_shortest_path(s, costs)).epsilon(1e-12));
    double picked = 0.0;
    int used = 0;
    for (std::size_t e = 0; e < std::size_t(m); ++e) {
        if (plain.decision[e] == 1.0) {
            picked += costs[e];
            ++used;
        } else {
            CHECK(plain.decision[e] == 0.0);
        }
    }
    CHECK(used == 2 * (s - 1));
    CHECK(picked == doctest::Approx(plain.robust_value).epsilon(1e-12));

    // All-equal costs tie every path; the sorted-edge-lexicographic rule picks
    // the top row followed by the rightmost column.
    UncertaintySetSpec flat = norm_ball(Vec(m, 1.0), 0.7);
    RobustSolution tie = solve_shortest_path(s, flat);
    std::vector<int> expect;
    for (int j = 0; j < s - 1; ++j) expect.push_back(j);
    for (int i = 0; i < s - 1; ++i) expect.push_back(s * (s - 1) + i * s + (s - 1));
    for (int e = 0; e < m; ++e) {
        bool on = std::find(expect.begin(), expect.end(), e) != expect.end();
        CHECK(tie.decision[e] == (on ? 1.0 : 0.0));
    }
    CHECK(tie.robust_value ==
          doctest::Approx(2.0 * (s - 1) + 0.7 * std::sqrt(2.0 * (s - 1))).epsilon(1e-12));

    // Robust value equals the enumeration minimum computed independently.
    Vec scale(m);
    for (double& v : scale) v = rng.uniform(0.2, 1.5);
    UncertaintySetSpec rob = scaled_ball(costs, scale, 0.9);
    RobustSolution sol = solve_shortest_path(s, rob);
    double brute = 1e300;
    for (const auto& p : enumerate_paths(s)) {
        double lin = 0.0, q = 0.0;
        for (int e : p) {
            lin += costs[e];
            q += scale[e] * scale[e];
        }
        brute = std::min(brute, lin + 0.9 * std::sqrt(q));
    }
    CHECK(sol.robust_value == doctest::Approx(brute).epsilon(1e-12));

    CHECK_THROWS_AS(solve_shortest_path(4, rob), std::invalid_argument);
}

TEST_CASE("problem dispatcher routes to the specialized solvers") {
    RobustProblem prob;
    prob.kind = RobustProblem::Kind::Portfolio;
    prob.set = norm_ball({0.5, 1.5}, 0.3);
    CHECK(solve(prob).robust_value ==
          doctest::Approx(solve_portfolio(prob.set).robust_value).epsilon(1e-12));

    prob.kind = RobustProblem::Kind::Newsvendor;
    prob.newsvendor = two_scenario();
    prob.set.loss = LossKind::CrossEntropy;
    prob.set.center = {0.6, 0.4};
    prob.set.radius = 0.05;
    CHECK(solve(prob).robust_value ==
          doctest::Approx(solve_newsvendor(prob.newsvendor, prob.set).robust_value)
              .epsilon(1e-12));

    prob.kind = RobustProblem::Kind::ShortestPath;
    prob.grid_side = 3;
    prob.set = norm_ball(Vec(grid_edge_count(3), 1.0), 0.2);
    CHECK(solve(prob).robust_value ==
          doctest::Approx(solve_shortest_path(3, prob.set).robust_value).epsilon(1e-12));
}

TEST_CASE("generic cutting plane: two parabolas need two master solves") {
    // min over x of max_d (x - d)^2 with adversarial d in {1, 3}: saddle at
    // x = 2, value 1.  The loop must discover both scenarios.
    MasterOracle master = [](const std::vector<Vec>& cuts) {
        auto worst = [&](double x) {
            double w = -1e300;
            for (const Vec& d : cuts) w = std::max(w, (x - d[0]) * (x - d[0]));
            return w;
        };
        double xstar = 0.0;
        double v = oracles::golden_min(0.0, 4.0, worst, &xstar, 1e-12);
        return std::make_pair(Vec{xstar}, v);
    };
    Pessimizer pessimize = [](const Vec& x) {
        double lo = (x[0] - 1.0) * (x[0] - 1.0);
        double hi = (x[0] - 3.0) * (x[0] - 3.0);
        return lo >= hi ? std::make_pair(Vec{1.0}, lo) : std::make_pair(Vec{3.0}, hi);
    };
    CuttingPlaneResult res = cutting_plane(master, pessimize, {0.0}, 1e-9);
    CHECK(res.iterations == 2);
    CHECK(res.decision[0] == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(res.worst_value == doctest::Approx(1.0).epsilon(1e-6));
    REQUIRE(res.master_trace.size() == 2);
    CHECK(res.master_trace[0] <= res.master_trace[1] + 1e-12);
    CHECK(res.master_value == doctest::Approx(res.master_trace.back()).epsilon(1e-15));

    // A pessimizer that never closes the gap trips the iteration cap.
    Pessimizer stubborn = [](const Vec& x) { return std::make_pair(x, 1e9); };
    MasterOracle flat = [](const std::vector<Vec>&) { return std::make_pair(Vec{0.0}, 0.0); };
    CHECK_THROWS_WITH(cutting_plane(flat, stubborn, {0.0}, 1e-9, 3),
                      doctest::Contains("iteration cap 3"));
    CHECK_THROWS_AS(cutting_plane(flat, stubborn, {0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("cutting-plane portfolio reproduces the conditional-gradient solver") {
    Rng rng(616);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t m = 2 + trial % 3;
        Vec mu(m), sc(m);
        for (std::size_t j = 0; j < m; ++j) {
            mu[j] = rng.uniform(-1, 1);
            sc[j] = rng.uniform(0.3, 1.5);
        }
        UncertaintySetSpec s = scaled_ball(mu, sc, rng.uniform(0.1, 1.0));
        RobustSolution direct = solve_portfolio(s);
        RobustSolution cp = cutting_plane_portfolio(s, 1e-9);
        CHECK(cp.robust_value == doctest::Approx(direct.robust_value).epsilon(1e-6));
        CHECK(cp.iterations >= 1);
        double total = 0.0;
        for (double x : cp.decision) {
            CHECK(x >= -1e-9);
            total += x;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-7));
    }
    // Zero radius is a singleton set: one master solve settles it.
    UncertaintySetSpec point = norm_ball({0.2, 0.9}, 0.0);
    CHECK(cutting_plane_portfolio(point).iterations == 1);
}

TEST_CASE("cutting-plane newsvendor reproduces the direct KL solver") {
    NewsvendorProblem p = two_scenario();
    Rng rng(717);
    for (int trial = 0; trial < 6; ++trial) {
        UncertaintySetSpec s;
        s.loss = LossKind::CrossEntropy;
        double a = rng.uniform(0.2, 0.8);
        s.center = {a, 1.0 - a};
        s.radius = rng.uniform(0.0, 0.4);
        RobustSolution direct = solve_newsvendor(p, s);
        RobustSolution cp = cutting_plane_newsvendor(p, s, 1e-9);
        CHECK(cp.robust_value == doctest::Approx(direct.robust_value).epsilon(1e-5));
        CHECK(cp.decision[0] == doctest::Approx(direct.decision[0]).epsilon(1e-2));
    }
    UncertaintySetSpec bad = norm_ball({0.5, 0.5}, 0.5);
    CHECK_THROWS_AS(cutting_plane_newsvendor(p, bad), std::invalid_argument);
}

TEST_CASE("robust counterpart value equals the support function for normed sets") {
    Rng rng(818);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + trial % 4;
        Vec center(m), scale(m), w(m);
        for (std::size_t j = 0; j < m; ++j) {
            center[j] = rng.uniform(-2, 2);
            scale[j] = rng.uniform(0.2, 2.0);
            w[j] = rng.uniform(-2, 2);
        }
        double offset = rng.uniform(-1, 1);
        UncertaintySetSpec se = norm_ball(center, rng.uniform(0.0, 2.0));
        CHECK(robust_counterpart_value(se, w, offset) ==
              doctest::Approx(ellipsoid_support(se, w) - offset).epsilon(1e-8));

        UncertaintySetSpec sc = scaled_ball(center, scale, rng.uniform(0.1, 2.0));
        sc.component_weights = Vec(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) sc.component_weights[j] = rng.uniform(0.5, 2.0);
        CHECK(robust_counterpart_value(sc, w, 0.0) ==
              doctest::Approx(ellipsoid_support(sc, w)).epsilon(1e-8));
    }
}

TEST_CASE("robust counterpart value: L1 ball and Huber ball closed forms") {
    Rng rng(919);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 1 + trial % 3;
        Vec center(m), w(m);
        for (std::size_t j = 0; j < m; ++j) {
            center[j] = rng.uniform(-2, 2);
            w[j] = rng.uniform(-2, 2);
        }
        double rho = rng.uniform(0.0, 3.0);

        UncertaintySetSpec l1;
        l1.loss = LossKind::AbsoluteError;
        l1.center = center;
        l1.radius = rho;
        CHECK(robust_counterpart_value(l1, w, 0.0) ==
              doctest::Approx(dot(w, center) + rho * norm_inf(w)).epsilon(1e-10));
    }

    // Huber ball in one dimension: boundary point r solves huber(r) = rho.
    for (int trial = 0; trial < 20; ++trial) {
        double delta = rng.uniform(0.5, 2.0);
        double rho = rng.uniform(0.01, 3.0);
        double w = rng.uniform(0.2, 2.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        double c = rng.uniform(-1, 1);
        UncertaintySetSpec hb;
        hb.loss = LossKind::Huber;
        hb.center = {c};
        hb.huber_delta = delta;
        hb.radius = rho;
        double r = rho <= 0.5 * delta * delta ? std::sqrt(2.0 * rho)
                                              : 0.5 * delta + rho / delta;
        CHECK(robust_counterpart_value(hb, {w}, 0.0) ==
              doctest::Approx(w * c + std::fabs(w) * r).epsilon(1e-6));
    }

    UncertaintySetSpec point = norm_ball({1.0, 2.0}, 0.0);
    CHECK(robust_counterpart_value(point, {3.0, -1.0}, 0.5) ==
          doctest::Approx(1.0 - 0.5).epsilon(1e-12));
    UncertaintySetSpec ce = point;
    ce.loss = LossKind::CrossEntropy;
    ce.center = {0.5, 0.5};
    CHECK_THROWS_AS(robust_counterpart_value(ce, {1.0, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("two-phase simplex solves, and rejects bad programs") {
    // max 2a+3b s.t. a+b <= 4, a+3b <= 6 (slacks appended): optimum (3,1).
    Matrix A(2, 4);
    A(0, 0) = 1; A(0, 1) = 1; A(0, 2) = 1; A(0, 3) = 0;
    A(1, 0) = 1; A(1, 1) = 3; A(1, 2) = 0; A(1, 3) = 1;
    Vec b = {4.0, 6.0};
    Vec c = {-2.0, -3.0, 0.0, 0.0};
    Vec z = simplex_lp(A, b, c);
    CHECK(z[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(z[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dot(c, z) == doctest::Approx(-9.0).epsilon(1e-9));

    // Equality-only feasibility: z1 = 1 and z1 = 2 cannot both hold.
    Matrix Ainf(2, 1);
    Ainf(0, 0) = 1;
    Ainf(1, 0) = 1;
    CHECK_THROWS_WITH(simplex_lp(Ainf, {1.0, 2.0}, {1.0}), doctest::Contains("infeasible"));

    // z1 - z2 = 0 with cost -z1 runs off to infinity along the diagonal.
    Matrix Aunb(1, 2);
    Aunb(0, 0) = 1;
    Aunb(0, 1) = -1;
    CHECK_THROWS_WITH(simplex_lp(Aunb, {0.0}, {-1.0, 0.0}), doctest::Contains("unbounded"));

    CHECK_THROWS_AS(simplex_lp(Matrix(1, 2), {1.0, 2.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("solution rows serialize in the fixed column order") {
    CHECK(solution_csv_header(3) == "problem,alpha,method,radius,robust_value,x1,x2,x3");
    RobustSolution sol;
    sol.decision = {0.25, 0.75};
    sol.robust_value = -1.5;
    CHECK(solution_csv_row("portfolio", 0.1, "mse", 2.0, sol) ==
          "portfolio,0.1,mse,2,-1.5,0.25,0.75");
}
