#pragma once

#include "realize/error.hpp"
#include "realize/tolerances.hpp"

#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace realize {

using StateId = std::size_t;
using ActionId = std::size_t;

/**
Finite controlled Markov process: an environment without a reward function.

Transitions are stored densely as T[s][a][s'] in row-major order. Terminal
states are absorbing (they self-loop with probability one under every
action) so that infinite-horizon visitation math applies uniformly.

Construction only checks shapes; use validate_cmp() for the semantic
invariants (stochastic rows, discount range, terminal self-loops).
*/
class Cmp {
public:
    Cmp() = default;

    Cmp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
        double gamma, StateId start_state, std::vector<bool> terminal = {})
        : n_states_(n_states), n_actions_(n_actions), transition_(std::move(transition)),
          gamma_(gamma), start_state_(start_state), terminal_(std::move(terminal)) {
        if (n_states_ == 0 || n_actions_ == 0)
            throw Error(ErrorKind::InvalidIndex, "a CMP needs at least one state and one action");
        if (transition_.size() != n_states_ * n_actions_ * n_states_)
            throw Error(ErrorKind::DimensionMismatch,
                        "transition tensor has " + std::to_string(transition_.size()) +
                            " entries, expected " +
                            std::to_string(n_states_ * n_actions_ * n_states_));
        if (terminal_.empty()) terminal_.assign(n_states_, false);
        if (terminal_.size() != n_states_)
            throw Error(ErrorKind::DimensionMismatch, "terminal mask length differs from n_states");
    }

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t n_pairs() const noexcept { return n_states_ * n_actions_; }
    double gamma() const noexcept { return gamma_; }
    StateId start_state() const noexcept { return start_state_; }
    bool is_terminal(StateId s) const { return terminal_[s]; }
    const std::vector<bool>& terminal_mask() const noexcept { return terminal_; }

    double transition(StateId s, ActionId a, StateId next) const {
        return transition_[(s * n_actions_ + a) * n_states_ + next];
    }

    /// Next-state distribution for (s, a).
    std::span<const double> row(StateId s, ActionId a) const {
        return {transition_.data() + (s * n_actions_ + a) * n_states_, n_states_};
    }

    const std::vector<double>& transition_tensor() const noexcept { return transition_; }

    /// Copy with a different discount; transitions are shared structure.
    Cmp with_gamma(double gamma) const {
        Cmp copy = *this;
        copy.gamma_ = gamma;
        return copy;
    }

    friend bool operator==(const Cmp&, const Cmp&) = default;

private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    std::vector<double> transition_;
    double gamma_ = 0.0;
    StateId start_state_ = 0;
    std::vector<bool> terminal_;
};

/// Index of the (s, a) pair in every dense state-action vector.
inline std::size_t pair_index(const Cmp& cmp, StateId s, ActionId a) {
    return s * cmp.n_actions() + a;
}

/**
Checks the CMP invariants: every row is a probability distribution (within
`tol.distribution`), 0 <= gamma < 1, the start state exists and terminal
states self-loop under all actions.
*/
inline void validate_cmp(const Cmp& cmp, const Tolerances& tol = {}) {
    if (!(cmp.gamma() >= 0.0 && cmp.gamma() < 1.0))
        throw Error(ErrorKind::InvalidDiscount,
                    "gamma must lie in [0, 1), got " + std::to_string(cmp.gamma()));
    if (cmp.start_state() >= cmp.n_states())
        throw Error(ErrorKind::InvalidIndex,
                    "start state " + std::to_string(cmp.start_state()) + " out of range");
    for (StateId s = 0; s < cmp.n_states(); ++s) {
        for (ActionId a = 0; a < cmp.n_actions(); ++a) {
            double sum = 0.0;
            for (double p : cmp.row(s, a)) {
                if (!(p >= 0.0) || !std::isfinite(p))
                    throw Error(ErrorKind::InvalidDistribution,
                                "negative or non-finite probability at (" + std::to_string(s) +
                                    "," + std::to_string(a) + ")");
                sum += p;
            }
            if (std::abs(sum - 1.0) > tol.distribution)
                throw Error(ErrorKind::InvalidDistribution,
                            "row (" + std::to_string(s) + "," + std::to_string(a) +
                                ") sums to " + std::to_string(sum));
            if (cmp.is_terminal(s) && cmp.transition(s, a, s) != 1.0)
                throw Error(ErrorKind::InvalidDistribution,
                            "terminal state " + std::to_string(s) + " does not self-loop under action " +
                                std::to_string(a));
        }
    }
}

/// Deterministic Markov policy: one action per state.
struct Policy {
    std::vector<ActionId> actions;

    ActionId operator()(StateId s) const { return actions[s]; }
    std::size_t size() const noexcept { return actions.size(); }

    friend auto operator<=>(const Policy&, const Policy&) = default;
    friend bool operator==(const Policy&, const Policy&) = default;
};

struct PolicyHash {
    std::size_t operator()(const Policy& p) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (ActionId a : p.actions) {
            h ^= a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

inline void validate_policy(const Cmp& cmp, const Policy& policy) {
    if (policy.size() != cmp.n_states())
        throw Error(ErrorKind::DimensionMismatch,
                    "policy has " + std::to_string(policy.size()) + " entries for " +
                        std::to_string(cmp.n_states()) + " states");
    for (ActionId a : policy.actions)
        if (a >= cmp.n_actions())
            throw Error(ErrorKind::InvalidIndex, "policy action " + std::to_string(a) + " out of range");
}

/**
Markov reward over state-action pairs, dense and indexed by pair_index().
A state-only reward is the special case with equal entries across actions.
*/
class RewardFunction {
public:
    RewardFunction() = default;
    RewardFunction(std::size_t n_states, std::size_t n_actions, std::vector<double> values)
        : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
        if (values_.size() != n_states_ * n_actions_)
            throw Error(ErrorKind::DimensionMismatch, "reward vector length differs from |S||A|");
        for (double v : values_)
            if (!std::isfinite(v)) throw Error(ErrorKind::MalformedProgram, "non-finite reward entry");
    }

    static RewardFunction zeros(const Cmp& cmp) {
        return {cmp.n_states(), cmp.n_actions(), std::vector<double>(cmp.n_pairs(), 0.0)};
    }

    /// Reward that depends only on the current state.
    static RewardFunction from_state_rewards(const Cmp& cmp, std::span<const double> per_state) {
        if (per_state.size() != cmp.n_states())
            throw Error(ErrorKind::DimensionMismatch, "state reward length differs from |S|");
        std::vector<double> values(cmp.n_pairs());
        for (StateId s = 0; s < cmp.n_states(); ++s)
            for (ActionId a = 0; a < cmp.n_actions(); ++a) values[pair_index(cmp, s, a)] = per_state[s];
        return {cmp.n_states(), cmp.n_actions(), std::move(values)};
    }

    double operator()(StateId s, ActionId a) const { return values_[s * n_actions_ + a]; }
    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const RewardFunction&, const RewardFunction&) = default;

private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    std::vector<double> values_;
};

inline void check_reward(const Cmp& cmp, const RewardFunction& reward) {
    if (reward.n_states() != cmp.n_states() || reward.n_actions() != cmp.n_actions())
        throw Error(ErrorKind::DimensionMismatch, "reward dimensions do not match the CMP");
}

/// An environment paired with a reward.
struct Mdp {
    Cmp cmp;
    RewardFunction reward;

    Mdp(Cmp c, RewardFunction r) : cmp(std::move(c)), reward(std::move(r)) { check_reward(cmp, reward); }
};

/// States reachable from the start state with nonzero probability under `policy`.
inline std::vector<bool> reachable_states(const Cmp& cmp, const Policy& policy) {
    std::vector<bool> seen(cmp.n_states(), false);
    std::vector<StateId> stack{cmp.start_state()};
    seen[cmp.start_state()] = true;
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        auto row = cmp.row(s, policy(s));
        for (StateId next = 0; next < cmp.n_states(); ++next) {
            if (row[next] > 0.0 && !seen[next]) {
                seen[next] = true;
                stack.push_back(next);
            }
        }
    }
    return seen;
}

/// States reachable from the start state under some sequence of actions.
inline std::vector<bool> reachable_states_any(const Cmp& cmp) {
    std::vector<bool> seen(cmp.n_states(), false);
    std::vector<StateId> stack{cmp.start_state()};
    seen[cmp.start_state()] = true;
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        for (ActionId a = 0; a < cmp.n_actions(); ++a) {
            auto row = cmp.row(s, a);
            for (StateId next = 0; next < cmp.n_states(); ++next) {
                if (row[next] > 0.0 && !seen[next]) {
                    seen[next] = true;
                    stack.push_back(next);
                }
            }
        }
    }
    return seen;
}

} // namespace realize
