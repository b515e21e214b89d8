#pragma once

#include "realize/fixtures.hpp"
#include "realize/reward_design.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace realize::io {

using nlohmann::json;

/**
JSON schemas.

  environment  {"n_states", "n_actions", "gamma", "start_state", "terminal": [bool],
                "transition": [[[p]]]}                      indices s, a, s'
  task         {"type": "soap", "mode": "equal"|"range", "policies": [[a, ...], ...]}
               {"type": "po", "relations": [{"lhs": [a...], "rel": "<"|"="|">", "rhs": [a...]}]}
               {"type": "to", "horizon": N, "relations": [{"lhs": [[s, a], ...], "rel": ..., "rhs": ...}]}
  reward       {"reward": [[r(s, a) for a] for s]}         extra keys ignored
  outcome      {"status": "found"|"unrealizable", "epsilon", "reward"?, "diagnostics"}

"<" reads value(lhs) < value(rhs); ">" is stored as "<" with the sides swapped.
*/

namespace detail {

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorKind::Parse, what); }

inline const json& field(const json& j, const char* key) {
    if (!j.is_object()) fail("expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing field '") + key + "'");
    return *it;
}

template <class T>
T get(const json& j, const char* what) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        fail(std::string("bad ") + what + ": " + e.what());
    }
}

inline std::size_t get_index(const json& j, const char* what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(std::string(what) + " must be a non-negative integer");
    return j.get<std::size_t>();
}

} // namespace detail

inline json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        detail::fail(std::string("invalid JSON: ") + e.what());
    }
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::fail("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

inline void write_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

inline json to_json(const Cmp& cmp) {
    json transition = json::array();
    for (StateId s = 0; s < cmp.n_states(); ++s) {
        json per_action = json::array();
        for (ActionId a = 0; a < cmp.n_actions(); ++a) {
            auto row = cmp.row(s, a);
            per_action.push_back(std::vector<double>(row.begin(), row.end()));
        }
        transition.push_back(std::move(per_action));
    }
    json terminal = json::array();
    for (bool t : cmp.terminal_mask()) terminal.push_back(t);
    return {{"n_states", cmp.n_states()}, {"n_actions", cmp.n_actions()},   {"gamma", cmp.gamma()},
            {"start_state", cmp.start_state()}, {"terminal", std::move(terminal)}, {"transition", std::move(transition)}};
}

/// Parses and validates an environment.
inline Cmp cmp_from_json(const json& j, const Tolerances& tol = {}) {
    const std::size_t n = detail::get_index(detail::field(j, "n_states"), "n_states");
    const std::size_t m = detail::get_index(detail::field(j, "n_actions"), "n_actions");
    const double gamma = detail::get<double>(detail::field(j, "gamma"), "gamma");
    const StateId start = detail::get_index(detail::field(j, "start_state"), "start_state");
    std::vector<bool> terminal;
    if (j.contains("terminal")) terminal = detail::get<std::vector<bool>>(j["terminal"], "terminal");
    const auto nested = detail::get<std::vector<std::vector<std::vector<double>>>>(detail::field(j, "transition"), "transition");
    if (nested.size() != n) detail::fail("transition has " + std::to_string(nested.size()) + " states, expected " + std::to_string(n));
    std::vector<double> t;
    t.reserve(n * m * n);
    for (StateId s = 0; s < n; ++s) {
        if (nested[s].size() != m) detail::fail("transition[" + std::to_string(s) + "] has the wrong action count");
        for (ActionId a = 0; a < m; ++a) {
            if (nested[s][a].size() != n)
                detail::fail("transition[" + std::to_string(s) + "][" + std::to_string(a) + "] has the wrong length");
            t.insert(t.end(), nested[s][a].begin(), nested[s][a].end());
        }
    }
    Cmp cmp(n, m, std::move(t), gamma, start, std::move(terminal));
    validate_cmp(cmp, tol);
    return cmp;
}

inline std::string dump_cmp(const Cmp& cmp) { return to_json(cmp).dump(2); }

inline const std::vector<std::string>& builtin_environments() {
    static const std::vector<std::string> names{"xor", "steady", "grid", "nonclosed-x", "nonclosed-y"};
    return names;
}

inline Cmp builtin_cmp(const std::string& name) {
    if (name == "xor") return make_xor_cmp();
    if (name == "steady") return make_steady_state_cmp();
    if (name == "grid") return make_russell_norvig_grid().cmp;
    if (name == "nonclosed-x") return make_nonclosed_pair().first;
    if (name == "nonclosed-y") return make_nonclosed_pair().second;
    detail::fail("unknown built-in environment '" + name + "'");
}

inline constexpr std::string_view builtin_prefix = "builtin:";

inline bool is_builtin(const std::string& source) { return source.starts_with(builtin_prefix); }

/// `builtin:<name>` or a path to an environment file.
inline Cmp load_cmp(const std::string& source, const Tolerances& tol = {}) {
    if (is_builtin(source)) return builtin_cmp(source.substr(builtin_prefix.size()));
    return cmp_from_json(read_file(source), tol);
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

namespace detail {

inline json policy_json(const Policy& p) { return p.actions; }

inline Policy policy_from(const json& j) { return Policy{get<std::vector<ActionId>>(j, "policy")}; }

inline json trajectory_json(const Trajectory& tau) {
    json out = json::array();
    for (const Step& step : tau) out.push_back({step.state, step.action});
    return out;
}

inline Trajectory trajectory_from(const json& j) {
    Trajectory tau;
    for (const auto& pair : get<std::vector<std::array<std::size_t, 2>>>(j, "trajectory"))
        tau.push_back({pair[0], pair[1]});
    return tau;
}

inline const char* relation_symbol(Relation rel) { return rel == Relation::LessThan ? "<" : "="; }

/// Returns the relation and whether lhs and rhs must be swapped.
inline std::pair<Relation, bool> relation_from(const json& j) {
    const auto symbol = get<std::string>(j, "rel");
    if (symbol == "<") return {Relation::LessThan, false};
    if (symbol == ">") return {Relation::LessThan, true};
    if (symbol == "=") return {Relation::Equal, false};
    fail("relation must be \"<\", \"=\" or \">\", got \"" + symbol + "\"");
}

template <class Relations, class Encode>
json relations_json(const Relations& relations, Encode encode) {
    json out = json::array();
    for (const auto& r : relations)
        out.push_back({{"lhs", encode(r.lhs)}, {"rel", relation_symbol(r.rel)}, {"rhs", encode(r.rhs)}});
    return out;
}

inline SoapMode mode_from(const json& j) {
    const auto name = get<std::string>(j, "mode");
    if (name == "equal") return SoapMode::Equal;
    if (name == "range") return SoapMode::Range;
    fail("mode must be \"equal\" or \"range\", got \"" + name + "\"");
}

} // namespace detail

inline json to_json(const Task& task) {
    return std::visit(
        [](const auto& t) -> json {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Soap>) {
                json policies = json::array();
                for (const Policy& p : t.good) policies.push_back(detail::policy_json(p));
                return {{"type", "soap"}, {"mode", to_string(t.mode)}, {"policies", std::move(policies)}};
            } else if constexpr (std::is_same_v<T, PolicyOrder>) {
                return {{"type", "po"}, {"relations", detail::relations_json(t.relations, detail::policy_json)}};
            } else {
                return {{"type", "to"},
                        {"horizon", t.horizon},
                        {"relations", detail::relations_json(t.relations, detail::trajectory_json)}};
            }
        },
        task);
}

/// Parses a task. Shape checks against a CMP happen in validate_task().
inline Task task_from_json(const json& j) {
    const auto type = detail::get<std::string>(detail::field(j, "type"), "type");
    if (type == "soap") {
        Soap soap;
        soap.mode = j.contains("mode") ? detail::mode_from(j["mode"]) : SoapMode::Equal;
        for (const auto& p : detail::field(j, "policies")) soap.good.push_back(detail::policy_from(p));
        return soap;
    }
    if (type == "po") {
        PolicyOrder po;
        for (const auto& r : detail::field(j, "relations")) {
            auto [rel, swap] = detail::relation_from(detail::field(r, "rel"));
            Policy lhs = detail::policy_from(detail::field(r, "lhs")), rhs = detail::policy_from(detail::field(r, "rhs"));
            if (swap) std::swap(lhs, rhs);
            po.relations.push_back({std::move(lhs), rel, std::move(rhs)});
        }
        return po;
    }
    if (type == "to") {
        TrajectoryOrder to;
        to.horizon = detail::get_index(detail::field(j, "horizon"), "horizon");
        for (const auto& r : detail::field(j, "relations")) {
            auto [rel, swap] = detail::relation_from(detail::field(r, "rel"));
            Trajectory lhs = detail::trajectory_from(detail::field(r, "lhs"));
            Trajectory rhs = detail::trajectory_from(detail::field(r, "rhs"));
            if (swap) std::swap(lhs, rhs);
            to.relations.push_back({std::move(lhs), rel, std::move(rhs)});
        }
        return to;
    }
    detail::fail("task type must be \"soap\", \"po\" or \"to\", got \"" + type + "\"");
}

/// Built-in tasks, each paired with the environment it was written for.
struct BuiltinTask {
    std::string name;
    std::string environment;
    Task task;
};

inline std::vector<BuiltinTask> builtin_tasks() {
    const GridWorld grid = make_russell_norvig_grid();
    return {
        {"xor_soap", "xor", make_xor_soap()},
        {"xor_soap_range", "xor", make_xor_soap(SoapMode::Range)},
        {"xor_po", "xor", make_xor_policy_order()},
        {"xor_to", "xor", make_xor_trajectory_order()},
        {"steady_soap", "steady", make_steady_state_soap()},
        {"separation_equal", "xor", make_separation_soap(SoapMode::Equal)},
        {"separation_range", "xor", make_separation_soap(SoapMode::Range)},
        {"nonclosed_soap", "nonclosed-x", make_nonclosed_soap()},
        {"grid_soap", "grid", make_grid_cautious_soap(grid)},
    };
}

inline Task builtin_task(const std::string& name) {
    for (auto& t : builtin_tasks())
        if (t.name == name) return std::move(t.task);
    detail::fail("unknown built-in task '" + name + "'");
}

/// `builtin:<name>` or a path to a task file.
inline Task load_task(const std::string& source) {
    if (is_builtin(source)) return builtin_task(source.substr(builtin_prefix.size()));
    return task_from_json(read_file(source));
}

// ---------------------------------------------------------------------------
// Rewards and outcomes
// ---------------------------------------------------------------------------

inline json to_json(const RewardFunction& reward) {
    json rows = json::array();
    for (StateId s = 0; s < reward.n_states(); ++s) {
        json row = json::array();
        for (ActionId a = 0; a < reward.n_actions(); ++a) row.push_back(reward(s, a));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Accepts {"reward": [[...]]} or the bare nested array.
inline RewardFunction reward_from_json(const json& j) {
    const json& body = j.is_object() ? detail::field(j, "reward") : j;
    const auto rows = detail::get<std::vector<std::vector<double>>>(body, "reward");
    if (rows.empty() || rows.front().empty()) detail::fail("reward table is empty");
    std::vector<double> values;
    for (const auto& row : rows) {
        if (row.size() != rows.front().size()) detail::fail("reward rows differ in length");
        values.insert(values.end(), row.begin(), row.end());
    }
    return {rows.size(), rows.front().size(), std::move(values)};
}

inline RewardFunction load_reward(const std::string& path) { return reward_from_json(read_file(path)); }

inline json to_json(const DesignOutcome& outcome) {
    const auto& d = outcome.diagnostics;
    json diagnostics{{"n_variables", d.n_variables},       {"n_inequalities", d.n_inequalities},
                     {"n_equalities", d.n_equalities},     {"n_policies", d.n_policies},
                     {"iterations", d.iterations},         {"solve_seconds", d.solve_seconds}};
    diagnostics["lp_status"] = d.lp_status ? json(to_string(*d.lp_status)) : json(nullptr);
    json out{{"status", to_string(outcome.status)}, {"epsilon", outcome.epsilon}};
    if (outcome.reward) out["reward"] = to_json(*outcome.reward);
    out["diagnostics"] = std::move(diagnostics);
    return out;
}

inline json to_json(const PolicyWitness& w) {
    return {{"first", w.first.actions},   {"first_value", w.first_value}, {"second", w.second.actions},
            {"second_value", w.second_value}, {"reason", w.reason}};
}

inline json to_json(const TrajectoryWitness& w) {
    return {{"relation", w.relation}, {"lhs_value", w.lhs_value}, {"rhs_value", w.rhs_value}, {"reason", w.reason}};
}

template <class Witness>
json to_json(const Verdict<Witness>& verdict) {
    json out{{"status", verdict.realized ? "realized" : "violated"}};
    if (verdict.witness) out["witness"] = to_json(*verdict.witness);
    return out;
}

} // namespace realize::io
