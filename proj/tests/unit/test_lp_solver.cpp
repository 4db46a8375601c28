#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <vector>

#include "support/tableau_simplex.hpp"
#include "svcsched/lp_solver.hpp"
#include "svcsched/rng.hpp"

using namespace svcsched;

namespace {

LpProblem dense_problem(int num_rows, const std::vector<double>& a, const std::vector<double>& b,
                        const std::vector<double>& c) {
    LpProblem lp;
    lp.num_constraints = num_rows;
    lp.rhs = b;
    int n = static_cast<int>(c.size());
    for (int j = 0; j < n; ++j) {
        std::vector<std::pair<int, double>> entries;
        for (int i = 0; i < num_rows; ++i)
            if (a[i * n + j] != 0.0) entries.emplace_back(i, a[i * n + j]);
        lp.add_column(c[j], std::move(entries));
    }
    return lp;
}

void check_optimality_conditions(const LpProblem& lp, const LpSolution& sol) {
    REQUIRE(sol.optimal());
    // Primal feasibility.
    std::vector<double> residual = lp.rhs;
    for (int j = 0; j < lp.num_vars; ++j) {
        CHECK(sol.x[j] >= 0.0);
        for (int k = lp.col_ptr[j]; k < lp.col_ptr[j + 1]; ++k)
            residual[lp.row_idx[k]] -= lp.values[k] * sol.x[j];
    }
    for (double r : residual) CHECK(std::abs(r) < 1e-7);
    // Strong duality.
    double dual_objective = 0.0;
    for (int i = 0; i < lp.num_constraints; ++i) dual_objective += lp.rhs[i] * sol.duals[i];
    CHECK(std::abs(dual_objective - sol.objective) <= 1e-6 * (1.0 + std::abs(sol.objective)));
    // Dual feasibility and complementary slackness.
    for (int j = 0; j < lp.num_vars; ++j) {
        CHECK(sol.reduced_costs[j] > -1e-7);
        CHECK(std::abs(sol.x[j] * sol.reduced_costs[j]) <= 1e-6);
    }
}

}  // namespace

TEST_SUITE("lp_solver") {

TEST_CASE("one-constraint toy problem") {
    auto lp = dense_problem(1, {1.0, 1.0}, {1.0}, {1.0, 1.0});
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
    check_optimality_conditions(lp, sol);
}

TEST_CASE("vertex solutions and duals on a textbook instance") {
    // max 3x + 2y st x + y + s1 = 4, x + 3y + s2 = 6 -> x = 4, objective 12.
    auto lp = dense_problem(2, {1, 1, 1, 0, 1, 3, 0, 1}, {4, 6}, {3, 2, 0, 0});
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(sol.x[0] == doctest::Approx(4.0));
    check_optimality_conditions(lp, sol);
}

TEST_CASE("infeasibility is certified") {
    // x1 + x2 = -1 with x >= 0.
    auto lp = dense_problem(1, {1.0, 1.0}, {-1.0}, {1.0, 0.0});
    auto sol = solve(lp);
    CHECK(sol.status == SolveStatus::Infeasible);
    REQUIRE(sol.certificate.size() == 1);
    // Farkas: y.rhs < 0 while y.A_j >= 0 for every column.
    CHECK(sol.certificate[0] * lp.rhs[0] < 0.0);
    CHECK(sol.certificate[0] * 1.0 >= -1e-9);
}

TEST_CASE("unboundedness reports an improving ray") {
    // max x1 st x1 - x2 = 1: x = (1 + t, t) improves forever.
    auto lp = dense_problem(1, {1.0, -1.0}, {1.0}, {1.0, 0.0});
    auto sol = solve(lp);
    CHECK(sol.status == SolveStatus::Unbounded);
    REQUIRE(sol.certificate.size() == 2);
    // The ray has positive objective growth and zero constraint movement.
    CHECK(sol.certificate[0] - sol.certificate[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.certificate[0] > 0.0);
}

TEST_CASE("degenerate problems with redundant rows do not cycle") {
    // Duplicate constraint rows produce a degenerate basis.
    auto lp = dense_problem(3, {1, 1, 0, 1, 1, 0, 0, 1, 1}, {1, 1, 2}, {1.0, 0.5, 0.25});
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    check_optimality_conditions(lp, sol);
    CHECK(sol.objective == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("bland fallback still reaches the optimum") {
    SolverOptions options;
    options.bland_after_degenerate = 0;  // Bland pricing from the first pivot
    auto lp = dense_problem(2, {1, 1, 1, 0, 1, 3, 0, 1}, {4, 6}, {3, 2, 0, 0});
    auto sol = solve(lp, options);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("random instances agree with the textbook tableau oracle") {
    Rng rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        int m = 2 + static_cast<int>(rng.next_below(4));
        int n = m + 1 + static_cast<int>(rng.next_below(6));
        std::vector<double> a(m * n), c(n), feasible_x(n, 0.0);
        for (auto& v : a) v = std::floor((rng.next_double() * 4.0 - 1.5) * 4.0) / 4.0;
        for (auto& v : c) v = std::floor((rng.next_double() * 2.0 - 0.5) * 8.0) / 8.0;
        // Build the RHS from a known nonnegative point so phase one succeeds.
        for (auto& v : feasible_x) v = rng.next_double() < 0.4 ? 0.0 : rng.next_double() * 2.0;
        std::vector<double> b(m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) b[i] += a[i * n + j] * feasible_x[j];

        auto lp = dense_problem(m, a, b, c);
        auto mine = solve(lp);
        auto expected = oracle::tableau_solve(n, m, a, b, c);
        REQUIRE(expected.feasible);
        if (!expected.bounded) {
            CHECK(mine.status == SolveStatus::Unbounded);
            continue;
        }
        REQUIRE(mine.optimal());
        CHECK(mine.objective == doctest::Approx(expected.objective).epsilon(1e-7));
        check_optimality_conditions(lp, mine);
        ++checked;
    }
    CHECK(checked > 20);  // most random instances are bounded
}

TEST_CASE("degenerate and rank-deficient instances agree with the oracle") {
    Rng rng(555);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        int base_rows = 2 + static_cast<int>(rng.next_below(3));
        int n = base_rows + 2 + static_cast<int>(rng.next_below(5));
        int m = base_rows + 1;  // one duplicated row makes A rank deficient
        std::vector<double> a(m * n), c(n), feasible_x(n, 0.0);
        for (int i = 0; i < base_rows; ++i)
            for (int j = 0; j < n; ++j)
                a[i * n + j] = std::floor((rng.next_double() * 4.0 - 1.5) * 2.0) / 2.0;
        for (int j = 0; j < n; ++j) a[base_rows * n + j] = a[0 * n + j];
        for (auto& v : c) v = std::floor((rng.next_double() * 2.0 - 0.5) * 4.0) / 4.0;
        // A sparse witness point: most entries at zero gives heavy degeneracy.
        for (auto& v : feasible_x) v = rng.next_double() < 0.7 ? 0.0 : 1.0 + rng.next_double();
        std::vector<double> b(m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) b[i] += a[i * n + j] * feasible_x[j];

        auto lp = dense_problem(m, a, b, c);
        auto mine = solve(lp);
        auto expected = oracle::tableau_solve(n, m, a, b, c);
        REQUIRE(expected.feasible);
        if (!expected.bounded) {
            CHECK(mine.status == SolveStatus::Unbounded);
            continue;
        }
        REQUIRE(mine.optimal());
        CHECK(mine.objective == doctest::Approx(expected.objective).epsilon(1e-6));
        check_optimality_conditions(lp, mine);
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("identical inputs give bit-identical solutions") {
    auto lp = dense_problem(2, {1, 2, 1, 0, 2, 1, 0, 1}, {3, 3}, {1.5, 1.0, 0.0, 0.25});
    auto first = solve(lp);
    auto second = solve(lp);
    REQUIRE(first.optimal());
    REQUIRE(second.optimal());
    CHECK(std::memcmp(first.x.data(), second.x.data(), first.x.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(first.duals.data(), second.duals.data(), first.duals.size() * sizeof(double)) == 0);
    CHECK(first.objective == second.objective);
    CHECK(first.iterations == second.iterations);
}

TEST_CASE("iteration limit is reported") {
    SolverOptions options;
    options.max_iterations = 1;
    auto lp = dense_problem(2, {1, 1, 1, 0, 1, 3, 0, 1}, {4, 6}, {3, 2, 0, 0});
    auto sol = solve(lp, options);
    CHECK(sol.status == SolveStatus::IterationLimit);
}

}  // TEST_SUITE
