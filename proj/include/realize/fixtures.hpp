#pragma once

#include "realize/task.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace realize {

inline constexpr double default_gamma = 0.95;

/// Policy on a two-state CMP written with 1-based action labels, e.g. pi(1, 2).
inline Policy pi(std::initializer_list<ActionId> one_based) {
    Policy p;
    for (ActionId a : one_based) p.actions.push_back(a - 1);
    return p;
}

namespace detail {

inline std::vector<double> deterministic_tensor(std::size_t n_states, std::size_t n_actions,
                                                const std::vector<std::vector<StateId>>& next) {
    std::vector<double> t(n_states * n_actions * n_states, 0.0);
    for (StateId s = 0; s < n_states; ++s)
        for (ActionId a = 0; a < n_actions; ++a) t[(s * n_actions + a) * n_states + next[s][a]] = 1.0;
    return t;
}

} // namespace detail

/**
Two states visited in alternation regardless of the action taken, so each
state's action choice contributes independently to the start-state value.
This is the CMP on which the "choose each action in exactly one state" task
cannot be expressed.
*/
inline Cmp make_xor_cmp(double gamma = default_gamma) {
    return {2, 2, detail::deterministic_tensor(2, 2, {{1, 1}, {0, 0}}), gamma, 0};
}

/// The same alternating CMP separates range from equal SOAP realization.
inline Cmp make_soap_separation_cmp(double gamma = default_gamma) { return make_xor_cmp(gamma); }

/// Start state self-loops under both actions; state 1 is never reached.
inline Cmp make_steady_state_cmp(double gamma = default_gamma) {
    return {2, 2, detail::deterministic_tensor(2, 2, {{0, 0}, {1, 1}}), gamma, 0};
}

/**
Pair of three-state CMPs with opposite action effects. From s0 both actions
reach s1 or s2 with probability 0.5. In the first CMP a1 stays put and a2
flips between s1 and s2; in the second the effects are swapped.
*/
inline std::pair<Cmp, Cmp> make_nonclosed_pair(double gamma = default_gamma) {
    auto build = [gamma](bool first_stays) {
        std::vector<double> t(3 * 2 * 3, 0.0);
        auto at = [&](StateId s, ActionId a, StateId n) -> double& { return t[(s * 2 + a) * 3 + n]; };
        for (ActionId a = 0; a < 2; ++a) {
            at(0, a, 1) = 0.5;
            at(0, a, 2) = 0.5;
        }
        const ActionId stay = first_stays ? 0 : 1;
        const ActionId flip = 1 - stay;
        at(1, stay, 1) = 1.0;
        at(2, stay, 2) = 1.0;
        at(1, flip, 2) = 1.0;
        at(2, flip, 1) = 1.0;
        return Cmp(3, 2, std::move(t), gamma, 0);
    };
    return {build(true), build(false)};
}

// ---------------------------------------------------------------------------
// Russell & Norvig 4x3 grid
// ---------------------------------------------------------------------------

enum GridAction : ActionId { Up = 0, Right = 1, Down = 2, Left = 3 };

/// Grid CMP plus the cell layout. Cells are (column, row), 1-based, with row 1 at the bottom.
struct GridWorld {
    Cmp cmp;
    std::vector<std::pair<int, int>> cell_of_state;
    StateId goal_state = 0;
    StateId fire_state = 0;

    std::optional<StateId> state_of(int column, int row) const {
        for (StateId s = 0; s < cell_of_state.size(); ++s)
            if (cell_of_state[s] == std::make_pair(column, row)) return s;
        return std::nullopt;
    }
    StateId at(int column, int row) const { return state_of(column, row).value(); }
};

/**
4x3 grid with a wall at (2,2), fire at (4,2), goal at (4,3) and start at
(1,1). The intended move happens with probability 1 - slip; each of the two
orthogonal moves happens with probability slip / 2. Moving into the wall or
the boundary leaves the agent in place; both terminal cells are absorbing.
*/
inline GridWorld make_russell_norvig_grid(double slip = 0.35, double gamma = default_gamma) {
    if (!(slip >= 0.0 && slip < 1.0))
        throw Error(ErrorKind::InvalidProbability, "slip must lie in [0, 1), got " + std::to_string(slip));
    constexpr int columns = 4, rows = 3;
    const std::pair<int, int> wall{2, 2}, fire{4, 2}, goal{4, 3};

    GridWorld world;
    for (int r = 1; r <= rows; ++r)
        for (int c = 1; c <= columns; ++c)
            if (std::make_pair(c, r) != wall) world.cell_of_state.emplace_back(c, r);
    const std::size_t n = world.cell_of_state.size();
    world.goal_state = world.at(goal.first, goal.second);
    world.fire_state = world.at(fire.first, fire.second);

    constexpr std::array<std::pair<int, int>, 4> moves{{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};
    auto destination = [&](StateId s, ActionId move) {
        auto [c, r] = world.cell_of_state[s];
        const int nc = c + moves[move].first, nr = r + moves[move].second;
        auto target = world.state_of(nc, nr);
        return target ? *target : s;
    };

    std::vector<double> t(n * 4 * n, 0.0);
    std::vector<bool> terminal(n, false);
    terminal[world.goal_state] = terminal[world.fire_state] = true;
    for (StateId s = 0; s < n; ++s) {
        for (ActionId a = 0; a < 4; ++a) {
            double* row = &t[(s * 4 + a) * n];
            if (terminal[s]) {
                row[s] = 1.0;
                continue;
            }
            row[destination(s, a)] += 1.0 - slip;
            row[destination(s, (a + 1) % 4)] += slip / 2.0;
            row[destination(s, (a + 3) % 4)] += slip / 2.0;
        }
    }
    world.cmp = Cmp(n, 4, std::move(t), gamma, world.at(1, 1), std::move(terminal));
    return world;
}

/**
Conventional goal reward: +1 for entering the goal, -1 for entering the fire,
expressed over (s, a) as the expected entry reward. Terminal pairs earn 0.
*/
inline RewardFunction make_grid_goal_reward(const GridWorld& world) {
    const Cmp& cmp = world.cmp;
    std::vector<double> values(cmp.n_pairs(), 0.0);
    for (StateId s = 0; s < cmp.n_states(); ++s) {
        if (cmp.is_terminal(s)) continue;
        for (ActionId a = 0; a < cmp.n_actions(); ++a)
            values[pair_index(cmp, s, a)] =
                cmp.transition(s, a, world.goal_state) - cmp.transition(s, a, world.fire_state);
    }
    return {cmp.n_states(), cmp.n_actions(), std::move(values)};
}

/**
Two cautious routes to the goal that never risk the fire. Next to the fire
they push into a wall, in (3,2) and (4,1), and rely on slips to make
progress. From the start one route heads up and over the top row, the other
runs along the bottom row; elsewhere they agree. Because neither route can
reach the fire, and terminal actions never matter once reward is zero
there, the acceptable set contains every choice of action in both terminal
cells.
*/
inline Soap make_grid_cautious_soap(const GridWorld& world, SoapMode mode = SoapMode::Range) {
    Policy base{std::vector<ActionId>(world.cmp.n_states(), Up)};
    auto set = [&](int c, int r, ActionId a) { base.actions[world.at(c, r)] = a; };
    set(2, 1, Right);
    set(3, 1, Right);
    set(4, 1, Down);
    set(1, 2, Up);
    set(3, 2, Left);
    set(1, 3, Right);
    set(2, 3, Right);
    set(3, 3, Right);

    Soap soap;
    soap.mode = mode;
    for (ActionId at_start : {Up, Right}) {
        set(1, 1, at_start);
        for (ActionId g = 0; g < 4; ++g) {
            for (ActionId f = 0; f < 4; ++f) {
                Policy p = base;
                p.actions[world.goal_state] = g;
                p.actions[world.fire_state] = f;
                soap.good.push_back(std::move(p));
            }
        }
    }
    return soap;
}

// ---------------------------------------------------------------------------
// Tasks that cannot be expressed, and their neighbours
// ---------------------------------------------------------------------------

/// Acceptable iff each action is used in exactly one state: {pi_12, pi_21}.
inline Soap make_xor_soap(SoapMode mode = SoapMode::Equal) { return {{pi({1, 2}), pi({2, 1})}, mode}; }

/// Both XOR-good policies strictly above both XOR-bad policies.
inline PolicyOrder make_xor_policy_order() {
    PolicyOrder po;
    for (const Policy& bad : {pi({1, 1}), pi({2, 2})})
        for (const Policy& good : {pi({1, 2}), pi({2, 1})}) po.relations.push_back({bad, Relation::LessThan, good});
    return po;
}

/// Length-2 trajectories: each good XOR trajectory strictly above each bad one.
inline TrajectoryOrder make_xor_trajectory_order() {
    auto tau = [](ActionId first, ActionId second) { return Trajectory{{0, first}, {1, second}}; };
    TrajectoryOrder to;
    to.horizon = 2;
    for (const Trajectory& bad : {tau(0, 0), tau(1, 1)})
        for (const Trajectory& good : {tau(0, 1), tau(1, 0)}) to.relations.push_back({bad, Relation::LessThan, good});
    return to;
}

/// Only pi_21 acceptable on the steady-state CMP.
inline Soap make_steady_state_soap() { return {{pi({2, 1})}, SoapMode::Equal}; }

/// Everything except "always a2": {pi_11, pi_21, pi_12}.
inline Soap make_separation_soap(SoapMode mode) { return {{pi({1, 1}), pi({2, 1}), pi({1, 2})}, mode}; }

/// a1 in s1 and a2 in s2, either action in s0: {pi_112, pi_212}.
inline Soap make_nonclosed_soap(SoapMode mode = SoapMode::Equal) {
    return {{pi({1, 1, 2}), pi({2, 1, 2})}, mode};
}

} // namespace realize
