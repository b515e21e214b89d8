#pragma once

#include "realize/cmp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <set>
#include <unordered_set>
#include <vector>

namespace realize {

inline constexpr std::uint64_t default_policy_cap = 1'000'000;

/// Number of deterministic policies |A|^|S|, saturating at UINT64_MAX.
inline std::uint64_t policy_count(const Cmp& cmp) {
    std::uint64_t count = 1;
    for (std::size_t s = 0; s < cmp.n_states(); ++s) {
        if (count > UINT64_MAX / cmp.n_actions()) return UINT64_MAX;
        count *= cmp.n_actions();
    }
    return count;
}

/// All deterministic policies in lexicographic order (last state varies fastest).
inline std::vector<Policy> enumerate_policies(const Cmp& cmp, std::uint64_t cap = default_policy_cap) {
    const std::uint64_t count = policy_count(cmp);
    if (count > cap)
        throw Error(ErrorKind::PolicySpaceTooLarge,
                    (count == UINT64_MAX ? std::string(">= 2^64") : std::to_string(count)) +
                        " policies exceed the cap of " + std::to_string(cap));
    std::vector<Policy> out;
    out.reserve(count);
    Policy current{std::vector<ActionId>(cmp.n_states(), 0)};
    for (std::uint64_t i = 0; i < count; ++i) {
        out.push_back(current);
        for (std::size_t k = cmp.n_states(); k-- > 0;) {
            if (++current.actions[k] < cmp.n_actions()) break;
            current.actions[k] = 0;
        }
    }
    return out;
}

/**
Discounted state-action occupancy from the start state:
rho(s, a) = sum_t gamma^t Pr(s_t = s, a_t = a | s_0, pi).
Entries sum to 1 / (1 - gamma); the start-state value of any reward R is rho . R.
*/
struct VisitationDistribution {
    std::vector<double> rho;

    double dot(std::span<const double> reward) const {
        double v = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) v += rho[i] * reward[i];
        return v;
    }
    double total() const {
        double t = 0.0;
        for (double r : rho) t += r;
        return t;
    }
};

namespace detail {

inline Eigen::MatrixXd policy_transition_matrix(const Cmp& cmp, const Policy& policy) {
    const auto n = static_cast<Eigen::Index>(cmp.n_states());
    Eigen::MatrixXd p(n, n);
    for (StateId s = 0; s < cmp.n_states(); ++s) {
        auto row = cmp.row(s, policy(s));
        for (StateId next = 0; next < cmp.n_states(); ++next)
            p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(next)) = row[next];
    }
    return p;
}

inline Eigen::VectorXd checked_solve(const Eigen::MatrixXd& system, const Eigen::VectorXd& rhs,
                                     const Tolerances& tol) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd x = lu.solve(rhs);
    const double scale = std::max(1.0, rhs.norm());
    if (!x.allFinite() || (system * x - rhs).norm() > tol.linear_solve * scale * 1e3)
        throw Error(ErrorKind::SingularSystem, "policy system could not be solved accurately");
    return x;
}

} // namespace detail

/// Solves (I - gamma P_pi^T) v = e_{s0} directly and scatters v to (s, pi(s)).
inline VisitationDistribution compute_visitation(const Cmp& cmp, const Policy& policy,
                                                 const Tolerances& tol = {}) {
    validate_policy(cmp, policy);
    const auto n = static_cast<Eigen::Index>(cmp.n_states());
    Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(n, n) - cmp.gamma() * detail::policy_transition_matrix(cmp, policy).transpose();
    Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
    start(static_cast<Eigen::Index>(cmp.start_state())) = 1.0;
    Eigen::VectorXd v = detail::checked_solve(system, start, tol);

    VisitationDistribution out{std::vector<double>(cmp.n_pairs(), 0.0)};
    for (StateId s = 0; s < cmp.n_states(); ++s)
        out.rho[pair_index(cmp, s, policy(s))] = std::max(0.0, v(static_cast<Eigen::Index>(s)));
    return out;
}

/// State values V^pi for every state, from (I - gamma P_pi) V = R_pi.
inline std::vector<double> evaluate_policy(const Cmp& cmp, const RewardFunction& reward,
                                           const Policy& policy, const Tolerances& tol = {}) {
    check_reward(cmp, reward);
    validate_policy(cmp, policy);
    const auto n = static_cast<Eigen::Index>(cmp.n_states());
    Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(n, n) - cmp.gamma() * detail::policy_transition_matrix(cmp, policy);
    Eigen::VectorXd r(n);
    for (StateId s = 0; s < cmp.n_states(); ++s) r(static_cast<Eigen::Index>(s)) = reward(s, policy(s));
    Eigen::VectorXd v = detail::checked_solve(system, r, tol);
    return {v.data(), v.data() + v.size()};
}

/// V^pi(s0) computed as rho_pi . R.
inline double start_value(const Cmp& cmp, const RewardFunction& reward, const Policy& policy,
                          const Tolerances& tol = {}) {
    check_reward(cmp, reward);
    return compute_visitation(cmp, policy, tol).dot(reward.values());
}

/**
Policies outside `good` that differ from some member of `good` in exactly
one state. Returned sorted and without duplicates.
*/
inline std::vector<Policy> compute_fringe(const Cmp& cmp, std::span<const Policy> good) {
    if (good.empty()) throw Error(ErrorKind::EmptySoap, "fringe of an empty policy set");
    std::unordered_set<Policy, PolicyHash> members(good.begin(), good.end());
    std::set<Policy> fringe;
    for (const Policy& g : good) {
        validate_policy(cmp, g);
        Policy neighbor = g;
        for (StateId s = 0; s < cmp.n_states(); ++s) {
            const ActionId original = g(s);
            for (ActionId a = 0; a < cmp.n_actions(); ++a) {
                if (a == original) continue;
                neighbor.actions[s] = a;
                if (!members.contains(neighbor)) fringe.insert(neighbor);
            }
            neighbor.actions[s] = original;
        }
    }
    return {fringe.begin(), fringe.end()};
}

/// One (state, action) step of a fixed-length trajectory.
struct Step {
    StateId state;
    ActionId action;
    friend auto operator<=>(const Step&, const Step&) = default;
    friend bool operator==(const Step&, const Step&) = default;
};

using Trajectory = std::vector<Step>;

/// G(tau; s0) = sum_i gamma^i R(s_i, a_i).
inline double trajectory_return(const RewardFunction& reward, std::span<const Step> trajectory, double gamma) {
    if (trajectory.empty()) throw Error(ErrorKind::InvalidTask, "empty trajectory");
    double total = 0.0;
    double discount = 1.0;
    for (const Step& step : trajectory) {
        if (step.state >= reward.n_states() || step.action >= reward.n_actions())
            throw Error(ErrorKind::InvalidIndex, "trajectory step out of range");
        total += discount * reward(step.state, step.action);
        discount *= gamma;
    }
    return total;
}

/// w_tau(s, a) = sum over visits i of gamma^i, so that G(tau; s0) = w_tau . R.
inline std::vector<double> discounted_indicator(const Cmp& cmp, std::span<const Step> trajectory) {
    std::vector<double> w(cmp.n_pairs(), 0.0);
    double discount = 1.0;
    for (const Step& step : trajectory) {
        if (step.state >= cmp.n_states() || step.action >= cmp.n_actions())
            throw Error(ErrorKind::InvalidIndex, "trajectory step out of range");
        w[pair_index(cmp, step.state, step.action)] += discount;
        discount *= cmp.gamma();
    }
    return w;
}

} // namespace realize
