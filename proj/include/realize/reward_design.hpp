#pragma once

#include "realize/linprog.hpp"
#include "realize/task.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

namespace realize {

/// Which rewards the designer may emit.
enum class RewardFamily {
    StateAction, ///< one free value per (s, a)
    State,       ///< one value per state, shared by all actions
};

struct DesignOptions {
    double rmax = 1.0;
    RewardFamily family = RewardFamily::StateAction;
    /// Pin rewards in terminal states to zero (episodic learners never collect them).
    bool zero_terminal_reward = false;
    Tolerances tol{};
    /// When set, receives the assembled program before it is solved.
    std::ostream* dump_lp = nullptr;
};

enum class DesignStatus { Found, Unrealizable };

inline const char* to_string(DesignStatus status) {
    return status == DesignStatus::Found ? "found" : "unrealizable";
}

struct DesignDiagnostics {
    std::size_t n_variables = 0;
    std::size_t n_inequalities = 0;
    std::size_t n_equalities = 0;
    std::size_t n_policies = 0;     ///< distinct policies whose visitation was computed
    std::optional<LpStatus> lp_status; ///< empty when no program had to be solved
    std::size_t iterations = 0;
    double solve_seconds = 0.0;
};

/**
Result of a design call. `Found` carries a reward within [-rmax, rmax] whose
separation margin `epsilon` exceeds the realizability threshold, or is the
vacuous zero reward when the task has no strict relations (epsilon = 0).
*/
struct DesignOutcome {
    DesignStatus status = DesignStatus::Unrealizable;
    std::optional<RewardFunction> reward;
    double epsilon = 0.0;
    DesignDiagnostics diagnostics;

    bool found() const noexcept { return status == DesignStatus::Found; }
};

/**
Accumulates "value is a linear function of the reward" constraints and
turns them into a program over the reward parameters and a margin epsilon.

Every constraint is written in (s, a) space, as coefficient vectors w with
value = w . R. Strict relations become w_lo . R + eps <= w_hi . R; ties
become equalities. A group separation "every member of `above` beats every
member of `below`" is encoded with one auxiliary threshold t:
w_b . R + eps <= t <= w_g . R, which is equivalent to the |above| x |below|
pairwise constraints with far fewer rows.
*/
class RewardProgramBuilder {
public:
    RewardProgramBuilder(std::size_t n_states, std::size_t n_actions, const DesignOptions& options)
        : n_states_(n_states), n_actions_(n_actions), options_(options) {
        n_params_ = options.family == RewardFamily::State ? n_states : n_states * n_actions;
        fixed_zero_.assign(n_params_, false);
    }

    /// Terminal states of `cmp` get their reward parameters pinned at zero if requested.
    void note_environment(const Cmp& cmp) {
        if (!options_.zero_terminal_reward) return;
        for (StateId s = 0; s < cmp.n_states(); ++s) {
            if (!cmp.is_terminal(s)) continue;
            if (options_.family == RewardFamily::State) {
                fixed_zero_[s] = true;
            } else {
                for (ActionId a = 0; a < n_actions_; ++a) fixed_zero_[s * n_actions_ + a] = true;
            }
        }
    }

    void add_strict(const std::vector<double>& lower, const std::vector<double>& upper) {
        strict_.push_back({project(lower), project(upper)});
    }

    void add_equal(const std::vector<double>& a, const std::vector<double>& b) {
        equal_.push_back({project(a), project(b)});
    }

    void add_group_separation(const std::vector<const std::vector<double>*>& above,
                              const std::vector<const std::vector<double>*>& below) {
        if (below.empty()) return;
        Group g;
        for (const auto* v : above) g.above.push_back(project(*v));
        for (const auto* v : below) g.below.push_back(project(*v));
        groups_.push_back(std::move(g));
    }

    bool has_strict() const noexcept { return !strict_.empty() || !groups_.empty(); }
    std::size_t epsilon_index() const noexcept { return n_params_; }

    /// Program variables: [params..., epsilon, thresholds...]; maximise epsilon.
    LinearProgram build() const {
        const std::size_t eps = n_params_;
        const std::size_t n_vars = n_params_ + 1 + groups_.size();
        LinearProgram lp(n_vars);
        for (std::size_t j = 0; j < n_params_; ++j) {
            lp.lower[j] = fixed_zero_[j] ? 0.0 : -options_.rmax;
            lp.upper[j] = fixed_zero_[j] ? 0.0 : options_.rmax;
        }
        lp.objective[eps] = 1.0;
        lp.lower[eps] = 0.0;
        lp.upper[eps] = infinity;
        for (std::size_t k = 0; k < groups_.size(); ++k) {
            lp.lower[eps + 1 + k] = -infinity;
            lp.upper[eps + 1 + k] = infinity;
        }

        for (const auto& [lo, hi] : strict_) {
            std::vector<double> row(n_vars, 0.0);
            for (std::size_t j = 0; j < n_params_; ++j) row[j] = lo[j] - hi[j];
            row[eps] = 1.0;
            lp.add_ineq(std::move(row), 0.0);
        }
        for (std::size_t k = 0; k < groups_.size(); ++k) {
            const std::size_t t = eps + 1 + k;
            for (const auto& below : groups_[k].below) {
                std::vector<double> row(n_vars, 0.0);
                for (std::size_t j = 0; j < n_params_; ++j) row[j] = below[j];
                row[eps] = 1.0;
                row[t] = -1.0;
                lp.add_ineq(std::move(row), 0.0);
            }
            for (const auto& above : groups_[k].above) {
                std::vector<double> row(n_vars, 0.0);
                for (std::size_t j = 0; j < n_params_; ++j) row[j] = -above[j];
                row[t] = 1.0;
                lp.add_ineq(std::move(row), 0.0);
            }
        }
        for (const auto& [a, b] : equal_) {
            std::vector<double> row(n_vars, 0.0);
            for (std::size_t j = 0; j < n_params_; ++j) row[j] = a[j] - b[j];
            lp.add_eq(std::move(row), 0.0);
        }
        return lp;
    }

    /// Expands the parameter part of an LP solution into a dense (s, a) reward.
    RewardFunction expand(const std::vector<double>& x) const {
        std::vector<double> values(n_states_ * n_actions_);
        for (StateId s = 0; s < n_states_; ++s)
            for (ActionId a = 0; a < n_actions_; ++a)
                values[s * n_actions_ + a] = options_.family == RewardFamily::State ? x[s] : x[s * n_actions_ + a];
        return {n_states_, n_actions_, std::move(values)};
    }

private:
    struct Group {
        std::vector<std::vector<double>> above;
        std::vector<std::vector<double>> below;
    };

    std::vector<double> project(const std::vector<double>& pair_space) const {
        if (options_.family == RewardFamily::StateAction) return pair_space;
        std::vector<double> out(n_states_, 0.0);
        for (StateId s = 0; s < n_states_; ++s)
            for (ActionId a = 0; a < n_actions_; ++a) out[s] += pair_space[s * n_actions_ + a];
        return out;
    }

    std::size_t n_states_;
    std::size_t n_actions_;
    std::size_t n_params_;
    DesignOptions options_;
    std::vector<bool> fixed_zero_;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> strict_;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> equal_;
    std::vector<Group> groups_;
};

namespace detail {

/// Per-call visitation cache keyed by policy.
class VisitationCache {
public:
    VisitationCache(const Cmp& cmp, const Tolerances& tol) : cmp_(cmp), tol_(tol) {}

    const std::vector<double>& operator()(const Policy& policy) {
        auto it = cache_.find(policy);
        if (it == cache_.end()) it = cache_.emplace(policy, compute_visitation(cmp_, policy, tol_).rho).first;
        return it->second;
    }
    std::size_t size() const noexcept { return cache_.size(); }

private:
    const Cmp& cmp_;
    const Tolerances& tol_;
    std::map<Policy, std::vector<double>> cache_;
};

inline void append_soap(RewardProgramBuilder& builder, const Cmp& cmp, const Soap& soap, const DesignOptions& options,
                        std::size_t& n_policies) {
    validate_soap(cmp, soap);
    VisitationCache rho(cmp, options.tol);
    const std::vector<Policy> fringe = compute_fringe(cmp, soap.good);
    const std::vector<double>& anchor = rho(soap.good.front());

    if (soap.mode == SoapMode::Equal) {
        for (std::size_t i = 1; i < soap.good.size(); ++i) builder.add_equal(anchor, rho(soap.good[i]));
        for (const Policy& f : fringe) builder.add_strict(rho(f), anchor);
    } else {
        std::vector<const std::vector<double>*> above, below;
        for (const Policy& g : soap.good) above.push_back(&rho(g));
        for (const Policy& f : fringe) below.push_back(&rho(f));
        builder.add_group_separation(above, below);
    }
    n_policies += rho.size();
}

inline void append_po(RewardProgramBuilder& builder, const Cmp& cmp, const PolicyOrder& po, const DesignOptions& options,
                      std::size_t& n_policies) {
    validate_policy_order(cmp, po);
    VisitationCache rho(cmp, options.tol);
    for (const auto& r : po.relations) {
        if (r.rel == Relation::LessThan) builder.add_strict(rho(r.lhs), rho(r.rhs));
        else builder.add_equal(rho(r.lhs), rho(r.rhs));
    }
    n_policies += rho.size();
}

inline void append_to(RewardProgramBuilder& builder, const Cmp& cmp, const TrajectoryOrder& to) {
    validate_trajectory_order(cmp, to);
    for (const auto& r : to.relations) {
        const auto lhs = discounted_indicator(cmp, r.lhs);
        const auto rhs = discounted_indicator(cmp, r.rhs);
        if (r.rel == Relation::LessThan) builder.add_strict(lhs, rhs);
        else builder.add_equal(lhs, rhs);
    }
}

inline void append_task(RewardProgramBuilder& builder, const Cmp& cmp, const Task& task, const DesignOptions& options,
                        std::size_t& n_policies) {
    builder.note_environment(cmp);
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Soap>) append_soap(builder, cmp, t, options, n_policies);
            else if constexpr (std::is_same_v<T, PolicyOrder>) append_po(builder, cmp, t, options, n_policies);
            else append_to(builder, cmp, t);
        },
        task);
}

template <LpSolver Solver>
DesignOutcome solve_design(const RewardProgramBuilder& builder, std::size_t n_states, std::size_t n_actions,
                           const DesignOptions& options, std::size_t n_policies, const Solver& solver) {
    DesignOutcome outcome;
    const LinearProgram lp = builder.build();
    outcome.diagnostics.n_variables = lp.n_vars();
    outcome.diagnostics.n_inequalities = lp.ineq_lhs.size();
    outcome.diagnostics.n_equalities = lp.eq_lhs.size();
    outcome.diagnostics.n_policies = n_policies;
    if (options.dump_lp) dump_program(*options.dump_lp, lp);

    if (!builder.has_strict()) {
        // Nothing to separate: the zero reward satisfies every tie.
        outcome.status = DesignStatus::Found;
        outcome.reward = RewardFunction(n_states, n_actions, std::vector<double>(n_states * n_actions, 0.0));
        return outcome;
    }

    const auto start = std::chrono::steady_clock::now();
    const LpSolution solution = solver.solve(lp);
    outcome.diagnostics.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.diagnostics.lp_status = solution.status;
    outcome.diagnostics.iterations = solution.iterations;
    if (solution.status != LpStatus::Optimal) return outcome;

    outcome.epsilon = solution.x[builder.epsilon_index()];
    if (outcome.epsilon > options.tol.realizability) {
        outcome.status = DesignStatus::Found;
        outcome.reward = builder.expand(solution.x);
    }
    return outcome;
}

} // namespace detail

/**
Designs a reward realizing `task` in `cmp`, or reports that none exists.

SOAPs are constrained against their fringe only: in Equal mode every
acceptable policy is tied to the first one and the first one beats each
fringe policy; in Range mode every acceptable policy beats every fringe
policy. Policy and trajectory orders encode exactly the listed relations.
*/
template <LpSolver Solver = SimplexSolver>
DesignOutcome design(const Cmp& cmp, const Task& task, const DesignOptions& options = {},
                     const Solver& solver = Solver{}) {
    validate_cmp(cmp, options.tol);
    if (!(options.rmax > 0.0)) throw Error(ErrorKind::InvalidConfig, "rmax must be positive");
    RewardProgramBuilder builder(cmp.n_states(), cmp.n_actions(), options);
    std::size_t n_policies = 0;
    detail::append_task(builder, cmp, task, options, n_policies);
    return detail::solve_design(builder, cmp.n_states(), cmp.n_actions(), options, n_policies, solver);
}

template <LpSolver Solver = SimplexSolver>
DesignOutcome design_soap(const Cmp& cmp, const Soap& soap, const DesignOptions& options = {},
                          const Solver& solver = Solver{}) {
    return design(cmp, Task{soap}, options, solver);
}

template <LpSolver Solver = SimplexSolver>
DesignOutcome design_po(const Cmp& cmp, const PolicyOrder& po, const DesignOptions& options = {},
                        const Solver& solver = Solver{}) {
    return design(cmp, Task{po}, options, solver);
}

template <LpSolver Solver = SimplexSolver>
DesignOutcome design_to(const Cmp& cmp, const TrajectoryOrder& to, const DesignOptions& options = {},
                        const Solver& solver = Solver{}) {
    return design(cmp, Task{to}, options, solver);
}

/// True iff some Markov reward (within the options' family) realizes the task.
template <LpSolver Solver = SimplexSolver>
bool decide_expressible(const Cmp& cmp, const Task& task, const DesignOptions& options = {},
                        const Solver& solver = Solver{}) {
    return design(cmp, task, options, solver).found();
}

/**
One reward for several environments sharing a state-action space: the
per-environment constraint systems are stacked over a single reward vector
and a single margin.
*/
template <LpSolver Solver = SimplexSolver>
DesignOutcome design_multi_env(std::span<const Cmp> cmps, const Task& task, const DesignOptions& options = {},
                               const Solver& solver = Solver{}) {
    if (cmps.empty()) throw Error(ErrorKind::InvalidConfig, "no environments given");
    if (!(options.rmax > 0.0)) throw Error(ErrorKind::InvalidConfig, "rmax must be positive");
    const std::size_t n_states = cmps.front().n_states();
    const std::size_t n_actions = cmps.front().n_actions();
    RewardProgramBuilder builder(n_states, n_actions, options);
    std::size_t n_policies = 0;
    for (const Cmp& cmp : cmps) {
        if (cmp.n_states() != n_states || cmp.n_actions() != n_actions)
            throw Error(ErrorKind::StateActionMismatch, "environments do not share a state-action space");
        validate_cmp(cmp, options.tol);
        detail::append_task(builder, cmp, task, options, n_policies);
    }
    return detail::solve_design(builder, n_states, n_actions, options, n_policies, solver);
}

} // namespace realize
