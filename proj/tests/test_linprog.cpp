#include "oracles.hpp"
#include "realize/linprog.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace realize;

namespace {

/// Checks rows and bounds at the returned point.
void expect_feasible(const LinearProgram& lp, const LpSolution& sol, double tol = 1e-9) {
    ASSERT_EQ(sol.x.size(), lp.n_vars());
    for (std::size_t i = 0; i < lp.ineq_lhs.size(); ++i) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < lp.n_vars(); ++j) lhs += lp.ineq_lhs[i][j] * sol.x[j];
        EXPECT_LE(lhs, lp.ineq_rhs[i] + tol) << "row " << i;
    }
    for (std::size_t i = 0; i < lp.eq_lhs.size(); ++i) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < lp.n_vars(); ++j) lhs += lp.eq_lhs[i][j] * sol.x[j];
        EXPECT_NEAR(lhs, lp.eq_rhs[i], tol) << "equality " << i;
    }
    for (std::size_t j = 0; j < lp.n_vars(); ++j) {
        EXPECT_GE(sol.x[j], lp.lower[j] - tol);
        EXPECT_LE(sol.x[j], lp.upper[j] + tol);
    }
}

LinearProgram beale() {
    LinearProgram lp(4);
    lp.objective = {0.75, -20.0, 0.5, -6.0};
    lp.add_ineq({0.25, -8.0, -1.0, 9.0}, 0.0);
    lp.add_ineq({0.5, -12.0, -0.5, 3.0}, 0.0);
    lp.add_ineq({0.0, 0.0, 1.0, 0.0}, 1.0);
    return lp;
}

LinearProgram klee_minty(std::size_t n) {
    LinearProgram lp(n);
    for (std::size_t j = 0; j < n; ++j) lp.objective[j] = std::pow(10.0, static_cast<double>(n - 1 - j));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(n, 0.0);
        for (std::size_t j = 0; j < i; ++j) row[j] = 2.0 * std::pow(10.0, static_cast<double>(i - j));
        row[i] = 1.0;
        lp.add_ineq(row, std::pow(100.0, static_cast<double>(i)));
    }
    return lp;
}

/// Same program with every infinite bound replaced by +-cap, for the vertex oracle.
LinearProgram boxed(LinearProgram lp, double cap) {
    for (auto& l : lp.lower)
        if (!std::isfinite(l)) l = -cap;
    for (auto& u : lp.upper)
        if (!std::isfinite(u)) u = cap;
    return lp;
}

} // namespace

TEST(Simplex, TextbookTwoVariableProgram) {
    LinearProgram lp(2);
    lp.objective = {3.0, 5.0};
    lp.add_ineq({1.0, 0.0}, 4.0);
    lp.add_ineq({0.0, 2.0}, 12.0);
    lp.add_ineq({3.0, 2.0}, 18.0);
    const auto sol = SimplexSolver{}.solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.objective_value, *oracle::vertex_optimum(lp), 1e-9);
    EXPECT_NEAR(sol.x[0], 2.0, 1e-9);
    EXPECT_NEAR(sol.x[1], 6.0, 1e-9);
}

TEST(Simplex, BealeCyclingExampleTerminates) {
    const LinearProgram lp = beale();
    const auto sol = SimplexSolver{}.solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    const auto expected = oracle::vertex_optimum(boxed(lp, 100.0));
    ASSERT_TRUE(expected.has_value());
    EXPECT_NEAR(sol.objective_value, *expected, 1e-9);
    expect_feasible(lp, sol);
}

TEST(Simplex, KleeMintyCube) {
    for (std::size_t n : {2u, 3u, 4u}) {
        const LinearProgram lp = klee_minty(n);
        const auto sol = SimplexSolver{}.solve(lp);
        ASSERT_EQ(sol.status, LpStatus::Optimal);
        const auto expected = oracle::vertex_optimum(boxed(lp, 1e7));
        ASSERT_TRUE(expected.has_value());
        EXPECT_NEAR(sol.objective_value, *expected, 1e-6 * std::abs(*expected));
        expect_feasible(lp, sol, 1e-6);
    }
}

TEST(Simplex, DetectsInfeasibility) {
    LinearProgram lp(2);
    lp.objective = {1.0, 1.0};
    lp.add_ineq({1.0, 1.0}, 1.0);
    lp.add_ineq({-1.0, -1.0}, -2.0);
    EXPECT_EQ(SimplexSolver{}.solve(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, DetectsCrossedBoundsAsInfeasible) {
    LinearProgram lp(1);
    lp.lower[0] = 2.0;
    lp.upper[0] = 1.0;
    EXPECT_EQ(SimplexSolver{}.solve(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
    LinearProgram lp(2);
    lp.objective = {1.0, 0.0};
    lp.add_ineq({-1.0, 1.0}, 1.0);
    EXPECT_EQ(SimplexSolver{}.solve(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, FreeAndNegativeVariables) {
    // maximize -x0 - x1 with x0 free, x1 in [-5, -1], x0 >= -3 written as a row.
    LinearProgram lp(2);
    lp.objective = {-1.0, -1.0};
    lp.lower = {-infinity, -5.0};
    lp.upper = {infinity, -1.0};
    lp.add_ineq({-1.0, 0.0}, 3.0);
    const auto sol = SimplexSolver{}.solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.x[0], -3.0, 1e-9);
    EXPECT_NEAR(sol.x[1], -5.0, 1e-9);
    EXPECT_NEAR(sol.objective_value, 8.0, 1e-9);
}

TEST(Simplex, UpperBoundOnlyVariable) {
    LinearProgram lp(1);
    lp.objective = {-1.0};
    lp.lower = {-infinity};
    lp.upper = {4.0};
    lp.add_ineq({-1.0}, 2.0); // x >= -2
    const auto sol = SimplexSolver{}.solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.x[0], -2.0, 1e-9);
}

TEST(Simplex, EqualityConstraintsAndRedundancy) {
    LinearProgram lp(3);
    lp.objective = {1.0, 2.0, 3.0};
    lp.upper = {10.0, 10.0, 10.0};
    lp.add_eq({1.0, 1.0, 1.0}, 6.0);
    lp.add_eq({2.0, 2.0, 2.0}, 12.0); // redundant copy
    lp.add_eq({1.0, -1.0, 0.0}, 0.0);
    const auto sol = SimplexSolver{}.solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    // x0 = x1 and x2 = 6 - 2 x0 leave 18 - 3 x0, maximal at x0 = 0.
    EXPECT_NEAR(sol.objective_value, 18.0, 1e-9);
    expect_feasible(lp, sol);
}

TEST(Simplex, ZeroVariableProgram) {
    LinearProgram lp(0);
    const auto sol = SimplexSolver{}.solve(lp);
    EXPECT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_EQ(sol.objective_value, 0.0);
}

TEST(Simplex, MalformedProgramIsRejected) {
    LinearProgram lp(2);
    lp.add_ineq({1.0}, 1.0);
    EXPECT_THROW(SimplexSolver{}.solve(lp), Error);
    LinearProgram nan(1);
    nan.objective[0] = std::nan("");
    EXPECT_THROW(SimplexSolver{}.solve(nan), Error);
}

TEST(Simplex, MatchesVertexEnumerationOnRandomPrograms) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::size_t optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + trial % 3;
        LinearProgram lp(n);
        for (auto& c : lp.objective) c = coef(rng);
        for (std::size_t j = 0; j < n; ++j) {
            lp.lower[j] = -1.0 - std::abs(coef(rng));
            lp.upper[j] = 1.0 + std::abs(coef(rng));
        }
        const std::size_t rows = 2 + trial % 4;
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<double> row(n);
            for (auto& v : row) v = coef(rng);
            lp.add_ineq(row, coef(rng));
        }
        if (trial % 5 == 0) {
            std::vector<double> row(n);
            for (auto& v : row) v = coef(rng);
            lp.add_eq(row, 0.3 * coef(rng));
        }
        const auto expected = oracle::vertex_optimum(lp, 1e-9);
        const auto sol = SimplexSolver{}.solve(lp);
        if (!expected) {
            EXPECT_EQ(sol.status, LpStatus::Infeasible) << "trial " << trial;
            ++infeasible;
            continue;
        }
        ASSERT_EQ(sol.status, LpStatus::Optimal) << "trial " << trial;
        EXPECT_NEAR(sol.objective_value, *expected, 1e-7) << "trial " << trial;
        expect_feasible(lp, sol);
        ++optimal;
    }
    EXPECT_GT(optimal, 100u);
    EXPECT_GT(infeasible, 5u);
}

TEST(Simplex, SolvesAreBitwiseReproducible) {
    const LinearProgram lp = klee_minty(4);
    const auto a = SimplexSolver{}.solve(lp);
    const auto b = SimplexSolver{}.solve(lp);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Dump, WritesOneLinePerConstraint) {
    LinearProgram lp(2);
    lp.objective = {1.0, 0.0};
    lp.add_ineq({1.0, 1.0}, 2.0);
    lp.add_eq({1.0, -1.0}, 0.0);
    std::ostringstream out;
    dump_program(out, lp);
    EXPECT_EQ(out.str(), "vars 2\nmaximize 1 0\nbound 0 0 inf\nbound 1 0 inf\nineq 1 1 <= 2\neq 1 -1 = 0\n");
}
