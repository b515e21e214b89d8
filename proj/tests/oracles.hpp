#pragma once

// Independent reference implementations used to check the library. None of
// them call the code under test beyond plain data accessors.

#include "realize/cmp.hpp"
#include "realize/linprog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using realize::ActionId;
using realize::Cmp;
using realize::Policy;
using realize::RewardFunction;
using realize::StateId;

/// Bellman backups until the sup-norm change drops below `residual`. Terminal states are ordinary absorbing states.
inline std::vector<double> policy_values(const Cmp& cmp, const RewardFunction& r, const Policy& pi,
                                         double residual = 1e-12) {
    const std::size_t n = cmp.n_states();
    std::vector<double> v(n, 0.0), next(n);
    for (int it = 0; it < 1'000'000; ++it) {
        double delta = 0.0;
        for (StateId s = 0; s < n; ++s) {
            double q = r(s, pi(s));
            for (StateId t = 0; t < n; ++t) q += cmp.gamma() * cmp.transition(s, pi(s), t) * v[t];
            next[s] = q;
            delta = std::max(delta, std::abs(q - v[s]));
        }
        v.swap(next);
        if (delta < residual) break;
    }
    return v;
}

struct OptimalValues {
    std::vector<double> v;
    std::vector<double> q; ///< pair-indexed
};

/// Value iteration for the optimal action values; terminal states are worth zero when `zero_terminal`.
inline OptimalValues value_iteration(const Cmp& cmp, const RewardFunction& r, bool zero_terminal = false,
                                     double residual = 1e-10) {
    const std::size_t n = cmp.n_states(), m = cmp.n_actions();
    OptimalValues out{std::vector<double>(n, 0.0), std::vector<double>(n * m, 0.0)};
    for (int it = 0; it < 1'000'000; ++it) {
        double delta = 0.0;
        for (StateId s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (ActionId a = 0; a < m; ++a) {
                double q = r(s, a);
                for (StateId t = 0; t < n; ++t) {
                    const double vt = zero_terminal && cmp.is_terminal(t) ? 0.0 : out.v[t];
                    q += cmp.gamma() * cmp.transition(s, a, t) * vt;
                }
                out.q[s * m + a] = q;
                best = std::max(best, q);
            }
            delta = std::max(delta, std::abs(best - out.v[s]));
            out.v[s] = best;
        }
        if (delta < residual) break;
    }
    return out;
}

inline StateId sample(const std::vector<double>& p, std::mt19937_64& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (StateId k = 0; k < p.size(); ++k) {
        if (u < p[k]) return k;
        u -= p[k];
    }
    return p.size() - 1;
}

struct MonteCarloEstimate {
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Discounted visit counts from sampled rollouts, truncated once gamma^t < 1e-12.
inline MonteCarloEstimate mc_visitation(const Cmp& cmp, const Policy& pi, std::size_t rollouts, std::uint64_t seed) {
    const std::size_t pairs = cmp.n_pairs();
    std::mt19937_64 rng(seed);
    std::vector<double> sum(pairs, 0.0), sum_sq(pairs, 0.0), episode(pairs);
    std::vector<double> row(cmp.n_states());
    for (std::size_t k = 0; k < rollouts; ++k) {
        std::fill(episode.begin(), episode.end(), 0.0);
        StateId s = cmp.start_state();
        for (double discount = 1.0; discount >= 1e-12; discount *= cmp.gamma()) {
            episode[s * cmp.n_actions() + pi(s)] += discount;
            for (StateId t = 0; t < cmp.n_states(); ++t) row[t] = cmp.transition(s, pi(s), t);
            s = sample(row, rng);
        }
        for (std::size_t j = 0; j < pairs; ++j) {
            sum[j] += episode[j];
            sum_sq[j] += episode[j] * episode[j];
        }
    }
    MonteCarloEstimate est{std::vector<double>(pairs), std::vector<double>(pairs)};
    const double n = static_cast<double>(rollouts);
    for (std::size_t j = 0; j < pairs; ++j) {
        est.mean[j] = sum[j] / n;
        const double var = std::max(0.0, sum_sq[j] / n - est.mean[j] * est.mean[j]);
        est.std_error[j] = std::sqrt(var / n);
    }
    return est;
}

/// Breadth-first reachability over every action.
inline std::vector<bool> reachable_any(const Cmp& cmp) {
    std::vector<bool> seen(cmp.n_states(), false);
    std::vector<StateId> frontier{cmp.start_state()};
    seen[cmp.start_state()] = true;
    for (std::size_t head = 0; head < frontier.size(); ++head)
        for (ActionId a = 0; a < cmp.n_actions(); ++a)
            for (StateId t = 0; t < cmp.n_states(); ++t)
                if (cmp.transition(frontier[head], a, t) > 0.0 && !seen[t]) {
                    seen[t] = true;
                    frontier.push_back(t);
                }
    return seen;
}

/// Every policy by counting in base |A|.
inline std::vector<Policy> all_policies(std::size_t n_states, std::size_t n_actions) {
    std::vector<Policy> out;
    Policy p{std::vector<ActionId>(n_states, 0)};
    while (true) {
        out.push_back(p);
        std::size_t k = n_states;
        while (k > 0 && ++p.actions[k - 1] == n_actions) p.actions[--k] = 0;
        if (k == 0) break;
    }
    return out;
}

inline std::size_t hamming(const Policy& a, const Policy& b) {
    std::size_t d = 0;
    for (std::size_t s = 0; s < a.size(); ++s) d += a(s) != b(s);
    return d;
}

// ---------------------------------------------------------------------------
// Linear programming by vertex enumeration
// ---------------------------------------------------------------------------

/// Solves A x = b by Gaussian elimination with partial pivoting; empty when singular.
inline std::optional<std::vector<double>> gauss(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12) return std::nullopt;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

/**
Optimum of a bounded LP: the best feasible basic solution among all choices
of n tight constraints (equalities always tight). Empty when infeasible.
Requires finite bounds on every variable.
*/
inline std::optional<double> vertex_optimum(const realize::LinearProgram& lp, double tol = 1e-7) {
    const std::size_t n = lp.n_vars();
    std::vector<std::vector<double>> rows = lp.ineq_lhs;
    std::vector<double> rhs = lp.ineq_rhs;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        rows.push_back(e);
        rhs.push_back(lp.upper[j]);
        e[j] = -1.0;
        rows.push_back(e);
        rhs.push_back(-lp.lower[j]);
    }
    const std::size_t free_rows = n - std::min(n, lp.eq_lhs.size());
    std::optional<double> best;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t start) {
        if (pick.size() == free_rows) {
            std::vector<std::vector<double>> a = lp.eq_lhs;
            std::vector<double> b = lp.eq_rhs;
            for (std::size_t i : pick) {
                a.push_back(rows[i]);
                b.push_back(rhs[i]);
            }
            auto x = gauss(a, b);
            if (!x) return;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                double lhs = 0.0;
                for (std::size_t j = 0; j < n; ++j) lhs += rows[i][j] * (*x)[j];
                if (lhs > rhs[i] + tol) return;
            }
            double value = 0.0;
            for (std::size_t j = 0; j < n; ++j) value += lp.objective[j] * (*x)[j];
            if (!best || value > *best) best = value;
            return;
        }
        for (std::size_t i = start; i < rows.size(); ++i) {
            pick.push_back(i);
            choose(i + 1);
            pick.pop_back();
        }
    };
    choose(0);
    return best;
}

// ---------------------------------------------------------------------------
// Two-state, two-action reward search
// ---------------------------------------------------------------------------

/// Start-state visitation of a 2x2 CMP by Cramer's rule on (I - gamma P^T) v = e0.
inline std::array<double, 4> rho_2x2(const Cmp& cmp, const Policy& pi) {
    const double g = cmp.gamma();
    const double p00 = cmp.transition(0, pi(0), 0), p01 = cmp.transition(0, pi(0), 1);
    const double p10 = cmp.transition(1, pi(1), 0), p11 = cmp.transition(1, pi(1), 1);
    // Rows of (I - g P^T): [1 - g p00, -g p10; -g p01, 1 - g p11]
    const double a = 1 - g * p00, b = -g * p10, c = -g * p01, d = 1 - g * p11;
    const double det = a * d - b * c;
    const double v0 = d / det, v1 = -c / det;
    std::array<double, 4> rho{};
    rho[0 * 2 + pi(0)] = v0;
    rho[1 * 2 + pi(1)] = v1;
    return rho;
}

/// Every reward vector on the {-1, -0.9, ..., 1}^4 lattice; stops when `accept` returns true.
inline bool lattice_search(const std::function<bool(const std::array<double, 4>&)>& accept) {
    std::array<double, 4> r{};
    for (int i0 = -10; i0 <= 10; ++i0)
        for (int i1 = -10; i1 <= 10; ++i1)
            for (int i2 = -10; i2 <= 10; ++i2)
                for (int i3 = -10; i3 <= 10; ++i3) {
                    r = {i0 / 10.0, i1 / 10.0, i2 / 10.0, i3 / 10.0};
                    if (accept(r)) return true;
                }
    return false;
}

// ---------------------------------------------------------------------------
// Satisfiability by truth table
// ---------------------------------------------------------------------------

struct Clause {
    bool positive;
    std::array<std::size_t, 3> vars;
};

inline bool satisfiable(std::size_t n_vars, const std::vector<Clause>& clauses) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_vars); ++mask) {
        bool all = true;
        for (const auto& c : clauses) {
            bool any = false;
            for (std::size_t v : c.vars) any = any || (((mask >> v) & 1U) == (c.positive ? 1U : 0U));
            if (!any) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

} // namespace oracle
