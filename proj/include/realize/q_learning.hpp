#pragma once

#include "realize/samplers.hpp"
#include "realize/task.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

namespace realize {

/// Tabular action-value estimates, dense over (s, a).
struct QTable {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> q;

    QTable(std::size_t states, std::size_t actions, double initial = 0.0)
        : n_states(states), n_actions(actions), q(states * actions, initial) {}

    double& operator()(StateId s, ActionId a) { return q[s * n_actions + a]; }
    double operator()(StateId s, ActionId a) const { return q[s * n_actions + a]; }

    /// argmax_a Q(s, a), lowest index on ties.
    ActionId best_action(StateId s) const {
        ActionId best = 0;
        for (ActionId a = 1; a < n_actions; ++a)
            if ((*this)(s, a) > (*this)(s, best)) best = a;
        return best;
    }
    double best_value(StateId s) const { return (*this)(s, best_action(s)); }

    Policy greedy() const {
        Policy p{std::vector<ActionId>(n_states)};
        for (StateId s = 0; s < n_states; ++s) p.actions[s] = best_action(s);
        return p;
    }
};

struct LearningConfig {
    double epsilon = 0.2;
    double alpha = 0.1;
    std::size_t episodes = 250;
    std::size_t steps_per_episode = 10;
    std::uint64_t seed = 0;
    double initial_q = 0.0;
    /// Score the metric on one sampled greedy rollout instead of the greedy-reachable set.
    bool metric_rollout = false;
};

inline void validate_config(const LearningConfig& config) {
    if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) throw Error(ErrorKind::InvalidConfig, "epsilon outside [0, 1]");
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha outside [0, 1]");
    if (config.episodes == 0 || config.steps_per_episode == 0)
        throw Error(ErrorKind::InvalidConfig, "episode and step counts must be positive");
}

/**
Best agreement between `greedy` and any acceptable policy, measured as the
fraction of `states` (a mask) where the actions coincide.
*/
inline double soap_policy_match_on(const std::vector<bool>& states, const Policy& greedy, const Soap& soap) {
    if (soap.good.empty()) throw Error(ErrorKind::EmptySoap, "match against an empty SOAP");
    const auto count = static_cast<std::size_t>(std::count(states.begin(), states.end(), true));
    if (count == 0) return 1.0;
    double best = 0.0;
    for (const Policy& g : soap.good) {
        std::size_t agree = 0;
        for (StateId s = 0; s < states.size(); ++s)
            if (states[s] && g(s) == greedy(s)) ++agree;
        best = std::max(best, static_cast<double>(agree) / static_cast<double>(count));
    }
    return best;
}

/// Agreement with the closest acceptable policy on the states the greedy policy can reach.
inline double soap_policy_match(const Cmp& cmp, const Policy& greedy, const Soap& soap) {
    validate_policy(cmp, greedy);
    return soap_policy_match_on(reachable_states(cmp, greedy), greedy, soap);
}

struct LearningRun {
    std::vector<double> metric; ///< one entry per episode; empty without a metric SOAP
    QTable q;
};

namespace detail {

inline StateId sample_next(const Cmp& cmp, StateId s, ActionId a, Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    auto row = cmp.row(s, a);
    StateId last = s;
    for (StateId next = 0; next < cmp.n_states(); ++next) {
        if (row[next] <= 0.0) continue;
        acc += row[next];
        last = next;
        if (u < acc) return next;
    }
    return last;
}

} // namespace detail

/**
Tabular Q-learning with epsilon-greedy exploration. Episodes start at the
start state and last `steps_per_episode` steps or until a terminal state is
entered; transitions into terminal states bootstrap from zero. After each
episode the greedy policy is scored against `metric_soap` when given.
*/
inline LearningRun q_learning_run(const Mdp& mdp, const LearningConfig& config,
                                  const std::optional<Soap>& metric_soap = std::nullopt) {
    validate_config(config);
    const Cmp& cmp = mdp.cmp;
    validate_cmp(cmp);
    if (metric_soap) validate_soap(cmp, *metric_soap);

    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(StreamPurpose::Learning));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<ActionId> any_action(0, cmp.n_actions() - 1);

    LearningRun run{{}, QTable(cmp.n_states(), cmp.n_actions(), config.initial_q)};
    QTable& q = run.q;
    for (std::size_t episode = 0; episode < config.episodes; ++episode) {
        StateId s = cmp.start_state();
        for (std::size_t step = 0; step < config.steps_per_episode && !cmp.is_terminal(s); ++step) {
            const ActionId a = unit(rng) < config.epsilon ? any_action(rng) : q.best_action(s);
            const StateId next = detail::sample_next(cmp, s, a, rng);
            const double bootstrap = cmp.is_terminal(next) ? 0.0 : q.best_value(next);
            const double target = mdp.reward(s, a) + cmp.gamma() * bootstrap;
            q(s, a) += config.alpha * (target - q(s, a));
            s = next;
        }
        if (!metric_soap) continue;
        const Policy greedy = q.greedy();
        if (config.metric_rollout) {
            std::vector<bool> visited(cmp.n_states(), false);
            StateId r = cmp.start_state();
            visited[r] = true;
            for (std::size_t step = 0; step < config.steps_per_episode && !cmp.is_terminal(r); ++step) {
                r = detail::sample_next(cmp, r, greedy(r), rng);
                visited[r] = true;
            }
            run.metric.push_back(soap_policy_match_on(visited, greedy, *metric_soap));
        } else {
            run.metric.push_back(soap_policy_match(cmp, greedy, *metric_soap));
        }
    }
    return run;
}

} // namespace realize
