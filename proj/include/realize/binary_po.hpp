#pragma once

#include "realize/task.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

namespace realize {

/**
Decision over rewards restricted to {0, 1} per state: does some assignment
order the listed policies as required? Solved by exhaustive search over all
2^|S| assignments, which is only feasible at desk scale; the general
finite-output problem is NP-hard.
*/

inline constexpr std::size_t max_binary_states = 24;

namespace detail {

/// Discounted state occupancy d(s) = sum_a rho(s, a) for each distinct policy in `po`.
struct BinaryPoSystem {
    std::vector<std::vector<double>> occupancy; // per distinct policy
    std::vector<std::tuple<std::size_t, Relation, std::size_t>> relations;
};

inline BinaryPoSystem prepare_binary_po(const Cmp& cmp, const PolicyOrder& po, const Tolerances& tol) {
    validate_cmp(cmp, tol);
    validate_policy_order(cmp, po);
    if (cmp.n_states() > max_binary_states)
        throw Error(ErrorKind::SearchSpaceTooLarge,
                    "2^" + std::to_string(cmp.n_states()) + " assignments exceed 2^" + std::to_string(max_binary_states));
    BinaryPoSystem system;
    std::map<Policy, std::size_t> ids;
    auto id_of = [&](const Policy& p) {
        auto [it, inserted] = ids.try_emplace(p, system.occupancy.size());
        if (inserted) {
            const auto rho = compute_visitation(cmp, p, tol).rho;
            std::vector<double> d(cmp.n_states(), 0.0);
            for (StateId s = 0; s < cmp.n_states(); ++s)
                for (ActionId a = 0; a < cmp.n_actions(); ++a) d[s] += rho[pair_index(cmp, s, a)];
            system.occupancy.push_back(std::move(d));
        }
        return it->second;
    };
    for (const auto& r : po.relations) system.relations.emplace_back(id_of(r.lhs), r.rel, id_of(r.rhs));
    return system;
}

} // namespace detail

/// Calls `visit` with every satisfying {0,1} state assignment; stops early when it returns false.
inline void for_each_binary_po_solution(const Cmp& cmp, const PolicyOrder& po,
                                        const std::function<bool(const std::vector<int>&)>& visit,
                                        const Tolerances& tol = {}) {
    const auto system = detail::prepare_binary_po(cmp, po, tol);
    const std::size_t n = cmp.n_states();
    std::vector<int> assignment(n, 0);
    std::vector<double> values(system.occupancy.size());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t s = 0; s < n; ++s) assignment[s] = static_cast<int>((mask >> s) & 1U);
        for (std::size_t k = 0; k < values.size(); ++k) {
            double v = 0.0;
            for (std::size_t s = 0; s < n; ++s)
                if (assignment[s]) v += system.occupancy[k][s];
            values[k] = v;
        }
        bool ok = true;
        for (const auto& [lhs, rel, rhs] : system.relations) {
            const double gap = values[rhs] - values[lhs];
            if (rel == Relation::LessThan ? !(gap > tol.binary_margin) : std::abs(gap) > tol.binary_margin) {
                ok = false;
                break;
            }
        }
        if (ok && !visit(assignment)) return;
    }
}

inline bool decide_binary_po_bruteforce(const Cmp& cmp, const PolicyOrder& po, const Tolerances& tol = {}) {
    bool found = false;
    for_each_binary_po_solution(
        cmp, po,
        [&](const std::vector<int>&) {
            found = true;
            return false;
        },
        tol);
    return found;
}

// ---------------------------------------------------------------------------
// Monotone 3-SAT reduction (test-fixture generator)
// ---------------------------------------------------------------------------

/// Three distinct variables, all positive or all negated.
struct MonotoneClause {
    bool positive = true;
    std::array<std::size_t, 3> variables{};
};

struct MonotoneFormula {
    std::size_t n_variables = 0;
    std::vector<MonotoneClause> clauses;
};

/**
Reduction instance. State 0 is the only decision state; every other state is
terminal. `zero_state` / `one_state` are the two primitive terminals and
literal states come in (v, not v) pairs. Action k at the decision state is
"policy k"; action 0 reaches `zero_state`, action 1 reaches `one_state`,
then one action per variable, then one per clause.
*/
struct BinaryPoInstance {
    Cmp cmp;
    PolicyOrder order;
    StateId decision_state = 0;
    StateId zero_state = 1;
    StateId one_state = 2;

    StateId literal_state(std::size_t variable, bool negated) const { return 3 + 2 * variable + (negated ? 1 : 0); }
    static Policy action_policy(std::size_t n_states, ActionId a) {
        Policy p{std::vector<ActionId>(n_states, 0)};
        p.actions[0] = a;
        return p;
    }
};

inline BinaryPoInstance build_monotone_3sat_instance(const MonotoneFormula& formula, double gamma = 0.95) {
    for (const auto& clause : formula.clauses) {
        std::set<std::size_t> distinct(clause.variables.begin(), clause.variables.end());
        if (distinct.size() != 3)
            throw Error(ErrorKind::InvalidTask, "clause must mention three distinct variables");
        for (std::size_t v : clause.variables)
            if (v >= formula.n_variables) throw Error(ErrorKind::InvalidIndex, "clause variable out of range");
    }
    BinaryPoInstance instance;
    const std::size_t n_states = 3 + 2 * formula.n_variables;
    const std::size_t n_actions = 2 + formula.n_variables + formula.clauses.size();
    std::vector<double> t(n_states * n_actions * n_states, 0.0);
    auto at = [&](StateId s, ActionId a, StateId next) -> double& { return t[(s * n_actions + a) * n_states + next]; };
    std::vector<bool> terminal(n_states, true);
    terminal[0] = false;
    for (StateId s = 1; s < n_states; ++s)
        for (ActionId a = 0; a < n_actions; ++a) at(s, a, s) = 1.0;

    at(0, 0, instance.zero_state) = 1.0;
    at(0, 1, instance.one_state) = 1.0;
    for (std::size_t v = 0; v < formula.n_variables; ++v) {
        at(0, 2 + v, instance.literal_state(v, false)) = 0.5;
        at(0, 2 + v, instance.literal_state(v, true)) = 0.5;
    }
    for (std::size_t c = 0; c < formula.clauses.size(); ++c) {
        const auto& clause = formula.clauses[c];
        for (std::size_t v : clause.variables)
            at(0, 2 + formula.n_variables + c, instance.literal_state(v, !clause.positive)) += 1.0 / 3.0;
    }
    instance.cmp = Cmp(n_states, n_actions, std::move(t), gamma, 0, std::move(terminal));

    auto policy = [&](ActionId a) { return BinaryPoInstance::action_policy(n_states, a); };
    auto& rel = instance.order.relations;
    rel.push_back({policy(0), Relation::LessThan, policy(1)});
    for (std::size_t v = 0; v < formula.n_variables; ++v) {
        rel.push_back({policy(0), Relation::LessThan, policy(2 + v)});
        rel.push_back({policy(2 + v), Relation::LessThan, policy(1)});
    }
    for (std::size_t c = 0; c < formula.clauses.size(); ++c) {
        // Some literal of the clause must carry reward one.
        rel.push_back({policy(0), Relation::LessThan, policy(2 + formula.n_variables + c)});
    }
    return instance;
}

} // namespace realize
