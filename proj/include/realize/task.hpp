#pragma once

#include "realize/policy_analysis.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace realize {

enum class SoapMode { Equal, Range };

inline const char* to_string(SoapMode mode) { return mode == SoapMode::Equal ? "equal" : "range"; }

/// Set of acceptable policies. Every policy outside `good` is unacceptable.
struct Soap {
    std::vector<Policy> good;
    SoapMode mode = SoapMode::Equal;
};

/// `LessThan` means value(lhs) < value(rhs).
enum class Relation { LessThan, Equal };

struct PolicyRelation {
    Policy lhs;
    Relation rel;
    Policy rhs;
};

/// Explicit list of policy relations; transitive consequences are not expanded.
struct PolicyOrder {
    std::vector<PolicyRelation> relations;
};

struct TrajectoryRelation {
    Trajectory lhs;
    Relation rel;
    Trajectory rhs;
};

struct TrajectoryOrder {
    std::size_t horizon = 0;
    std::vector<TrajectoryRelation> relations;
};

using Task = std::variant<Soap, PolicyOrder, TrajectoryOrder>;

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate_soap(const Cmp& cmp, const Soap& soap) {
    if (soap.good.empty()) throw Error(ErrorKind::EmptySoap, "a SOAP needs at least one policy");
    std::vector<Policy> sorted = soap.good;
    for (const Policy& p : sorted) validate_policy(cmp, p);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorKind::InvalidTask, "duplicate policy in SOAP");
}

namespace detail {

/**
Rejects relation lists that are not a partial order: items tied by Equal
relations are merged with union-find, then strict relations must form an
acyclic graph over the merged classes. The diagnostic names a cycle.
*/
template <class Item, class Key>
void check_order_consistency(const std::vector<std::tuple<const Item*, Relation, const Item*>>& rels, Key key) {
    std::map<decltype(key(std::declval<const Item&>())), std::size_t> ids;
    auto id_of = [&](const Item& item) {
        auto [it, inserted] = ids.try_emplace(key(item), ids.size());
        return it->second;
    };
    std::vector<std::pair<std::size_t, std::size_t>> strict;
    std::vector<std::pair<std::size_t, std::size_t>> ties;
    for (const auto& [lhs, rel, rhs] : rels) {
        const std::size_t a = id_of(*lhs);
        const std::size_t b = id_of(*rhs);
        (rel == Relation::Equal ? ties : strict).push_back({a, b});
    }
    std::vector<std::size_t> parent(ids.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [a, b] : ties) parent[find(a)] = find(b);

    std::vector<std::vector<std::size_t>> adj(ids.size());
    for (auto [a, b] : strict) {
        const std::size_t ra = find(a), rb = find(b);
        if (ra == rb)
            throw Error(ErrorKind::InconsistentOrder,
                        "strict relation between items " + std::to_string(a) + " and " + std::to_string(b) +
                            " that are tied by equalities");
        adj[ra].push_back(rb);
    }
    // Iterative three-colour DFS.
    std::vector<int> colour(ids.size(), 0);
    std::vector<std::size_t> from(ids.size(), SIZE_MAX);
    for (std::size_t root = 0; root < ids.size(); ++root) {
        if (colour[root] != 0) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        colour[root] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < adj[node].size()) {
                const std::size_t child = adj[node][next++];
                if (colour[child] == 1) {
                    std::vector<std::size_t> path{node};
                    for (std::size_t v = node; v != child;) path.push_back(v = from[v]);
                    std::string cycle;
                    for (auto it = path.rbegin(); it != path.rend(); ++it) cycle += "#" + std::to_string(*it) + " < ";
                    throw Error(ErrorKind::InconsistentOrder,
                                "strict relations form a cycle: " + cycle + "#" + std::to_string(child));
                }
                if (colour[child] == 0) {
                    colour[child] = 1;
                    from[child] = node;
                    stack.push_back({child, 0});
                }
            } else {
                colour[node] = 2;
                stack.pop_back();
            }
        }
    }
}

} // namespace detail

inline void validate_policy_order(const Cmp& cmp, const PolicyOrder& po) {
    std::vector<std::tuple<const Policy*, Relation, const Policy*>> rels;
    for (const auto& r : po.relations) {
        validate_policy(cmp, r.lhs);
        validate_policy(cmp, r.rhs);
        rels.emplace_back(&r.lhs, r.rel, &r.rhs);
    }
    detail::check_order_consistency<Policy>(rels, [](const Policy& p) { return p.actions; });
}

inline void validate_trajectory_order(const Cmp& cmp, const TrajectoryOrder& to) {
    if (to.horizon == 0) throw Error(ErrorKind::InvalidTask, "trajectory horizon must be positive");
    std::vector<std::tuple<const Trajectory*, Relation, const Trajectory*>> rels;
    auto check = [&](const Trajectory& tau) {
        if (tau.size() != to.horizon)
            throw Error(ErrorKind::InvalidTask, "trajectory of length " + std::to_string(tau.size()) +
                                                    " in an order of horizon " + std::to_string(to.horizon));
        if (tau.front().state != cmp.start_state())
            throw Error(ErrorKind::InvalidTask, "trajectory does not start at the start state");
        for (const Step& step : tau)
            if (step.state >= cmp.n_states() || step.action >= cmp.n_actions())
                throw Error(ErrorKind::InvalidIndex, "trajectory step out of range");
    };
    for (const auto& r : to.relations) {
        check(r.lhs);
        check(r.rhs);
        rels.emplace_back(&r.lhs, r.rel, &r.rhs);
    }
    detail::check_order_consistency<Trajectory>(rels, [](const Trajectory& t) { return t; });
}

/// Indices of trajectories (numbered lhs, rhs per relation) with a zero-probability transition.
inline std::vector<std::size_t> infeasible_trajectories(const Cmp& cmp, const TrajectoryOrder& to) {
    std::vector<std::size_t> out;
    std::size_t index = 0;
    auto feasible = [&](const Trajectory& tau) {
        for (std::size_t i = 0; i + 1 < tau.size(); ++i)
            if (cmp.transition(tau[i].state, tau[i].action, tau[i + 1].state) <= 0.0) return false;
        return true;
    };
    for (const auto& r : to.relations) {
        if (!feasible(r.lhs)) out.push_back(index);
        ++index;
        if (!feasible(r.rhs)) out.push_back(index);
        ++index;
    }
    return out;
}

inline void validate_task(const Cmp& cmp, const Task& task) {
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Soap>) validate_soap(cmp, t);
            else if constexpr (std::is_same_v<T, PolicyOrder>) validate_policy_order(cmp, t);
            else validate_trajectory_order(cmp, t);
        },
        task);
}

// ---------------------------------------------------------------------------
// Verification by exhaustive evaluation
// ---------------------------------------------------------------------------

struct PolicyWitness {
    Policy first;
    double first_value = 0.0;
    Policy second;
    double second_value = 0.0;
    std::string reason;
};

struct TrajectoryWitness {
    std::size_t relation = 0;
    double lhs_value = 0.0;
    double rhs_value = 0.0;
    std::string reason;
};

template <class Witness>
struct Verdict {
    bool realized = true;
    std::optional<Witness> witness;
};

namespace detail {

inline bool relation_holds(Relation rel, double lhs, double rhs, const Tolerances& tol) {
    if (rel == Relation::LessThan) return rhs - lhs > tol.strict_margin;
    return std::abs(rhs - lhs) <= tol.equality;
}

/// Checks good-vs-bad separation given precomputed values.
inline Verdict<PolicyWitness> judge_soap(SoapMode mode, const std::vector<std::pair<Policy, double>>& good,
                                         const std::vector<std::pair<Policy, double>>& bad,
                                         const Tolerances& tol) {
    auto by_value = [](const auto& a, const auto& b) { return a.second < b.second; };
    const auto& [worst_good, worst_good_value] = *std::min_element(good.begin(), good.end(), by_value);
    const auto& [best_good, best_good_value] = *std::max_element(good.begin(), good.end(), by_value);
    if (mode == SoapMode::Equal && best_good_value - worst_good_value > tol.equality)
        return {false, PolicyWitness{worst_good, worst_good_value, best_good, best_good_value,
                                     "acceptable policies do not tie"}};
    if (bad.empty()) return {};
    const auto& [best_bad, best_bad_value] = *std::max_element(bad.begin(), bad.end(), by_value);
    if (!(worst_good_value - best_bad_value > tol.strict_margin))
        return {false, PolicyWitness{worst_good, worst_good_value, best_bad, best_bad_value,
                                     "unacceptable policy is not strictly worse"}};
    return {};
}

} // namespace detail

/**
Evaluates the start-state value of every deterministic policy and checks the
SOAP condition. Equal mode additionally requires the acceptable policies to
tie within `tol.equality`.
*/
inline Verdict<PolicyWitness> verify_soap(const Cmp& cmp, const RewardFunction& reward, const Soap& soap,
                                          const Tolerances& tol = {}, std::uint64_t cap = default_policy_cap) {
    validate_soap(cmp, soap);
    check_reward(cmp, reward);
    std::unordered_set<Policy, PolicyHash> members(soap.good.begin(), soap.good.end());
    std::vector<std::pair<Policy, double>> good, bad;
    for (Policy& p : enumerate_policies(cmp, cap)) {
        const double v = start_value(cmp, reward, p, tol);
        (members.contains(p) ? good : bad).emplace_back(std::move(p), v);
    }
    return detail::judge_soap(soap.mode, good, bad, tol);
}

/**
Sampled variant for policy spaces beyond the enumeration cap: the bad set is
the full fringe plus `samples` uniformly drawn non-members.
*/
inline Verdict<PolicyWitness> verify_soap_sampled(const Cmp& cmp, const RewardFunction& reward, const Soap& soap,
                                                  std::size_t samples, std::uint64_t seed,
                                                  const Tolerances& tol = {}) {
    validate_soap(cmp, soap);
    check_reward(cmp, reward);
    std::unordered_set<Policy, PolicyHash> members(soap.good.begin(), soap.good.end());
    std::vector<std::pair<Policy, double>> good, bad;
    for (const Policy& p : soap.good) good.emplace_back(p, start_value(cmp, reward, p, tol));
    for (Policy& p : compute_fringe(cmp, soap.good)) {
        const double v = start_value(cmp, reward, p, tol);
        bad.emplace_back(std::move(p), v);
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<ActionId> pick(0, cmp.n_actions() - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        Policy p{std::vector<ActionId>(cmp.n_states())};
        for (auto& a : p.actions) a = pick(rng);
        if (members.contains(p)) continue;
        const double v = start_value(cmp, reward, p, tol);
        bad.emplace_back(std::move(p), v);
    }
    return detail::judge_soap(soap.mode, good, bad, tol);
}

/// Checks each listed relation on start-state values.
inline Verdict<PolicyWitness> verify_po(const Cmp& cmp, const RewardFunction& reward, const PolicyOrder& po,
                                        const Tolerances& tol = {}) {
    validate_policy_order(cmp, po);
    check_reward(cmp, reward);
    std::map<Policy, double> cache;
    auto value = [&](const Policy& p) {
        auto it = cache.find(p);
        if (it == cache.end()) it = cache.emplace(p, start_value(cmp, reward, p, tol)).first;
        return it->second;
    };
    for (const auto& r : po.relations) {
        const double lhs = value(r.lhs);
        const double rhs = value(r.rhs);
        if (!detail::relation_holds(r.rel, lhs, rhs, tol))
            return {false, PolicyWitness{r.lhs, lhs, r.rhs, rhs,
                                         r.rel == Relation::LessThan ? "strict relation violated"
                                                                     : "equality violated"}};
    }
    return {};
}

/// Checks each listed relation on N-step discounted returns.
inline Verdict<TrajectoryWitness> verify_to(const Cmp& cmp, const RewardFunction& reward, const TrajectoryOrder& to,
                                            const Tolerances& tol = {}) {
    validate_trajectory_order(cmp, to);
    check_reward(cmp, reward);
    for (std::size_t i = 0; i < to.relations.size(); ++i) {
        const auto& r = to.relations[i];
        const double lhs = trajectory_return(reward, r.lhs, cmp.gamma());
        const double rhs = trajectory_return(reward, r.rhs, cmp.gamma());
        if (!detail::relation_holds(r.rel, lhs, rhs, tol))
            return {false, TrajectoryWitness{i, lhs, rhs,
                                             r.rel == Relation::LessThan ? "strict relation violated"
                                                                         : "equality violated"}};
    }
    return {};
}

/// Dispatches to the verifier matching the task; true iff realized.
inline bool verify_task(const Cmp& cmp, const RewardFunction& reward, const Task& task, const Tolerances& tol = {}) {
    return std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Soap>) return verify_soap(cmp, reward, t, tol).realized;
            else if constexpr (std::is_same_v<T, PolicyOrder>) return verify_po(cmp, reward, t, tol).realized;
            else return verify_to(cmp, reward, t, tol).realized;
        },
        task);
}

} // namespace realize
