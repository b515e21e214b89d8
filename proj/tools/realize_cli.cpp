// Command-line front end: design, verify, decide, sweep, learn, fixture.
//
// Exit codes: 0 found / realized, 3 unrealizable / violated, 2 usage or input
// error, 1 internal error.

#include "realize/realize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace {

using namespace realize;
using io::json;

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_usage = 2;
constexpr int exit_negative = 3;

constexpr const char* version = "0.1.0";

struct DesignFlags {
    std::vector<std::string> envs;
    std::string task;
    double rmax = 1.0;
    bool state_reward = false;
    bool zero_terminal_reward = false;
    std::string dump_lp;
};

DesignOptions make_options(const DesignFlags& f) {
    DesignOptions options;
    options.rmax = f.rmax;
    options.family = f.state_reward ? RewardFamily::State : RewardFamily::StateAction;
    options.zero_terminal_reward = f.zero_terminal_reward;
    return options;
}

std::vector<Cmp> load_envs(const std::vector<std::string>& sources) {
    std::vector<Cmp> cmps;
    for (const auto& s : sources) cmps.push_back(io::load_cmp(s));
    return cmps;
}

void warn_infeasible(const Cmp& cmp, const Task& task) {
    if (const auto* to = std::get_if<TrajectoryOrder>(&task)) {
        for (std::size_t i : infeasible_trajectories(cmp, *to))
            std::cerr << "warning: relation " << i << " uses a trajectory with zero probability in this environment\n";
    }
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

DesignOutcome run_design(const DesignFlags& f) {
    const auto cmps = load_envs(f.envs);
    const Task task = io::load_task(f.task);
    for (const Cmp& cmp : cmps) {
        validate_task(cmp, task);
        warn_infeasible(cmp, task);
    }
    DesignOptions options = make_options(f);
    std::ofstream dump;
    if (!f.dump_lp.empty()) {
        dump.open(f.dump_lp);
        if (!dump) throw Error(ErrorKind::InvalidConfig, "cannot write '" + f.dump_lp + "'");
        options.dump_lp = &dump;
    }
    return cmps.size() == 1 ? design(cmps.front(), task, options) : design_multi_env(std::span<const Cmp>(cmps), task, options);
}

int cmd_design(const DesignFlags& f, const std::string& out) {
    const DesignOutcome outcome = run_design(f);
    const json j = io::to_json(outcome);
    if (!out.empty()) io::write_file(out, j);
    print(j);
    return outcome.found() ? exit_ok : exit_negative;
}

int cmd_decide(const DesignFlags& f) {
    const DesignOutcome outcome = run_design(f);
    print(json{{"expressible", outcome.found()}});
    return outcome.found() ? exit_ok : exit_negative;
}

int cmd_verify(const std::string& env, const std::string& task_source, const std::string& reward_path,
               std::size_t samples, std::uint64_t seed) {
    const Cmp cmp = io::load_cmp(env);
    const Task task = io::load_task(task_source);
    validate_task(cmp, task);
    warn_infeasible(cmp, task);
    const RewardFunction reward = io::load_reward(reward_path);
    check_reward(cmp, reward);
    json verdict;
    bool realized = false;
    if (const auto* soap = std::get_if<Soap>(&task)) {
        if (policy_count(cmp) <= default_policy_cap) {
            const auto v = verify_soap(cmp, reward, *soap);
            verdict = io::to_json(v);
            realized = v.realized;
        } else {
            const auto v = verify_soap_sampled(cmp, reward, *soap, samples, seed);
            verdict = io::to_json(v);
            verdict["sampled"] = samples;
            realized = v.realized;
        }
    } else if (const auto* po = std::get_if<PolicyOrder>(&task)) {
        const auto v = verify_po(cmp, reward, *po);
        verdict = io::to_json(v);
        realized = v.realized;
    } else {
        const auto v = verify_to(cmp, reward, std::get<TrajectoryOrder>(task));
        verdict = io::to_json(v);
        realized = v.realized;
    }
    print(verdict);
    return realized ? exit_ok : exit_negative;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidConfig, "bad grid value '" + item + "'");
        }
    }
    return grid;
}

struct SweepFlags {
    std::string vary;
    std::string grid;
    std::size_t samples = 200;
    std::uint64_t seed = 0;
    std::string out;
    bool shared_action = false;
    std::string ci = "normal";
    unsigned threads = 1;
    std::size_t states = 4;
    std::size_t actions = 3;
    double gamma = 0.95;
    std::size_t soap_size = 2;
};

/// Fills every flag the command line left unset from a JSON object keyed by flag name.
void apply_sweep_config(const std::string& path, const CLI::App& cmd, SweepFlags& f) {
    const json config = io::read_file(path);
    if (!config.is_object()) throw Error(ErrorKind::InvalidConfig, "sweep config must be a JSON object");
    auto take = [&](const char* key, const char* flag, auto& field) {
        const auto it = config.find(key);
        if (it == config.end() || cmd.count(flag) > 0) return;
        field = io::detail::get<std::decay_t<decltype(field)>>(*it, key);
    };
    for (const auto& [key, value] : config.items()) {
        static const std::vector<std::string> known{"vary",    "grid",    "samples", "seed",      "ci",
                                                    "threads", "states",  "actions", "gamma",     "soap_size",
                                                    "spread_shared_action"};
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw Error(ErrorKind::InvalidConfig, "unknown sweep config key '" + key + "'");
    }
    take("vary", "--vary", f.vary);
    if (const auto it = config.find("grid"); it != config.end() && cmd.count("--grid") == 0) {
        if (it->is_array()) {
            f.grid.clear();
            for (const auto& v : *it) f.grid += (f.grid.empty() ? "" : ",") + v.dump();
        } else {
            f.grid = io::detail::get<std::string>(*it, "grid");
        }
    }
    take("samples", "--samples", f.samples);
    take("seed", "--seed", f.seed);
    take("ci", "--ci", f.ci);
    take("threads", "--threads", f.threads);
    take("states", "--states", f.states);
    take("actions", "--actions", f.actions);
    take("gamma", "--gamma", f.gamma);
    take("soap_size", "--soap-size", f.soap_size);
    take("spread_shared_action", "--spread-shared-action", f.shared_action);
    if (f.ci != "normal" && f.ci != "wilson") throw Error(ErrorKind::InvalidConfig, "ci must be normal or wilson");
    if (f.samples == 0) throw Error(ErrorKind::InvalidConfig, "samples must be positive");
}

int cmd_sweep(const SweepFlags& f) {
    if (f.vary.empty()) throw Error(ErrorKind::InvalidConfig, "sweep needs --vary or a config with \"vary\"");
    SweepSpec spec;
    spec.parameter = parse_sweep_parameter(f.vary);
    spec.grid = f.grid.empty() ? default_sweep_grid(spec.parameter) : parse_grid(f.grid);
    spec.samples = f.samples;
    spec.base.seed = f.seed;
    spec.base.n_states = f.states;
    spec.base.n_actions = f.actions;
    spec.base.gamma = f.gamma;
    spec.base.soap_size = f.soap_size;
    spec.base.spread_shared_action = f.shared_action;
    spec.ci = f.ci == "wilson" ? CiMethod::Wilson : CiMethod::Normal;
    spec.threads = f.threads;

    std::ofstream file;
    if (!f.out.empty()) {
        file.open(f.out);
        if (!file) throw Error(ErrorKind::InvalidConfig, "cannot write '" + f.out + "'");
    }
    std::ostream& out = f.out.empty() ? std::cout : file;
    const SweepResult result = run_expressivity_sweep(spec);
    write_sweep_csv(out, result);
    return exit_ok;
}

struct LearnFlags {
    std::string env = "builtin:grid";
    std::string task = "builtin:grid_soap";
    std::string reward = "builtin:designed";
    std::size_t episodes = 250;
    std::size_t steps = 10;
    std::size_t runs = 50;
    double epsilon = 0.2;
    double alpha = 0.1;
    std::uint64_t seed = 0;
    bool metric_rollout = false;
    unsigned threads = 1;
    std::string out;
};

int cmd_learn(const LearnFlags& f) {
    const Cmp cmp = io::load_cmp(f.env);
    const Task task = io::load_task(f.task);
    const auto* soap = std::get_if<Soap>(&task);
    if (!soap) throw Error(ErrorKind::InvalidTask, "learning is scored against a SOAP task");
    validate_soap(cmp, *soap);

    RewardFunction reward;
    if (f.reward == "builtin:goal") {
        if (f.env != "builtin:grid") throw Error(ErrorKind::InvalidConfig, "builtin:goal is defined for builtin:grid only");
        reward = make_grid_goal_reward(make_russell_norvig_grid());
    } else if (f.reward == "builtin:designed") {
        DesignOptions options;
        options.zero_terminal_reward = true;
        const DesignOutcome outcome = design_soap(cmp, *soap, options);
        if (!outcome.found()) {
            print(json{{"status", "unrealizable"}});
            return exit_negative;
        }
        reward = *outcome.reward;
    } else {
        reward = io::load_reward(f.reward);
    }
    check_reward(cmp, reward);

    LearningConfig config;
    config.episodes = f.episodes;
    config.steps_per_episode = f.steps;
    config.epsilon = f.epsilon;
    config.alpha = f.alpha;
    config.seed = f.seed;
    config.metric_rollout = f.metric_rollout;
    const LearningCurve curve = learning_curve({cmp, reward}, config, *soap, f.runs, f.threads);

    if (!f.out.empty()) {
        std::ofstream file(f.out);
        if (!file) throw Error(ErrorKind::InvalidConfig, "cannot write '" + f.out + "'");
        write_learning_csv(file, curve);
    } else {
        write_learning_csv(std::cout, curve);
        return exit_ok;
    }
    print(json{{"runs", f.runs}, {"episodes", f.episodes}, {"final_25_mean", curve.final_mean(25)}});
    return exit_ok;
}

int cmd_fixture(const std::string& name, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& file, const json& j) {
        const auto path = (std::filesystem::path(dir) / (file + ".json")).string();
        io::write_file(path, j);
        std::cout << path << '\n';
    };
    bool matched = false;
    for (const auto& env : io::builtin_environments()) {
        if (name == "all" || name == env) {
            std::string file = env;
            std::replace(file.begin(), file.end(), '-', '_');
            write(file + "_env", io::to_json(io::builtin_cmp(env)));
            matched = true;
        }
    }
    for (const auto& t : io::builtin_tasks()) {
        if (name == "all" || name == t.name) {
            write(t.name, io::to_json(t.task));
            matched = true;
        }
    }
    if (!matched) throw Error(ErrorKind::InvalidConfig, "unknown fixture '" + name + "'");
    return exit_ok;
}

bool is_input_error(ErrorKind kind) {
    return kind != ErrorKind::SingularSystem && kind != ErrorKind::MalformedProgram;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reward design for SOAP, policy-order and trajectory-order tasks"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "Print the version and the tolerance stack");

    DesignFlags design_flags;
    std::string design_out;
    auto add_design_flags = [&](CLI::App* cmd, bool multi_env) {
        auto* env = cmd->add_option("--env", design_flags.envs, "Environment file or builtin:<name>")->required();
        if (!multi_env) env->expected(1);
        cmd->add_option("--task", design_flags.task, "Task file or builtin:<name>")->required();
        cmd->add_option("--rmax", design_flags.rmax, "Reward bound")->check(CLI::PositiveNumber);
        cmd->add_flag("--state-reward", design_flags.state_reward, "Restrict to rewards of the state only");
        cmd->add_flag("--zero-terminal-reward", design_flags.zero_terminal_reward, "Pin terminal-state rewards to zero");
        cmd->add_option("--dump-lp", design_flags.dump_lp, "Write the assembled linear program to a file");
    };
    auto* design_cmd = app.add_subcommand("design", "Construct a reward realizing a task, or report unrealizable");
    add_design_flags(design_cmd, true);
    design_cmd->add_option("--out", design_out, "Also write the outcome JSON to a file");
    auto* decide_cmd = app.add_subcommand("decide", "Decide whether a task is expressible");
    add_design_flags(decide_cmd, true);

    std::string verify_env, verify_task_source, verify_reward;
    std::size_t verify_samples = 50'000;
    std::uint64_t verify_seed = 0;
    auto* verify_cmd = app.add_subcommand("verify", "Check a reward against a task");
    verify_cmd->add_option("--env", verify_env, "Environment file or builtin:<name>")->required();
    verify_cmd->add_option("--task", verify_task_source, "Task file or builtin:<name>")->required();
    verify_cmd->add_option("--reward", verify_reward, "Reward or design outcome JSON")->required();
    verify_cmd->add_option("--samples", verify_samples, "Random policies checked when the policy space is too large");
    verify_cmd->add_option("--seed", verify_seed, "Seed for sampled verification");

    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Estimate the fraction of expressible SOAPs");
    std::string sweep_config;
    sweep_cmd->add_option("--config", sweep_config, "JSON object keyed by flag name; explicit flags win");
    sweep_cmd->add_option("--vary", sweep.vary, "n_actions|n_states|gamma|soap_size|entropy|spread");
    sweep_cmd->add_option("--grid", sweep.grid, "Comma-separated values (default grid per parameter)");
    sweep_cmd->add_option("--samples", sweep.samples, "Samples per grid value")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sweep.seed, "Base seed");
    sweep_cmd->add_option("--out", sweep.out, "CSV path (stdout when omitted)");
    sweep_cmd->add_flag("--spread-shared-action", sweep.shared_action, "One replacement action per SOAP member");
    sweep_cmd->add_option("--ci", sweep.ci, "Confidence interval method")->check(CLI::IsMember({"normal", "wilson"}));
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads");
    sweep_cmd->add_option("--states", sweep.states, "Base state count");
    sweep_cmd->add_option("--actions", sweep.actions, "Base action count");
    sweep_cmd->add_option("--gamma", sweep.gamma, "Base discount");
    sweep_cmd->add_option("--soap-size", sweep.soap_size, "Base SOAP size");

    LearnFlags learn;
    auto* learn_cmd = app.add_subcommand("learn", "Q-learning curves scored against a SOAP");
    learn_cmd->add_option("--env", learn.env, "Environment file or builtin:<name>");
    learn_cmd->add_option("--task", learn.task, "SOAP used for scoring (and design)");
    learn_cmd->add_option("--reward", learn.reward, "Reward JSON, builtin:goal or builtin:designed");
    learn_cmd->add_option("--episodes", learn.episodes, "Episodes per run")->check(CLI::PositiveNumber);
    learn_cmd->add_option("--steps", learn.steps, "Steps per episode")->check(CLI::PositiveNumber);
    learn_cmd->add_option("--runs", learn.runs, "Independent runs")->check(CLI::PositiveNumber);
    learn_cmd->add_option("--epsilon", learn.epsilon, "Exploration rate")->check(CLI::Range(0.0, 1.0));
    learn_cmd->add_option("--alpha", learn.alpha, "Learning rate")->check(CLI::Range(0.0, 1.0));
    learn_cmd->add_option("--seed", learn.seed, "Base seed");
    learn_cmd->add_flag("--metric-rollout", learn.metric_rollout, "Score one sampled greedy rollout");
    learn_cmd->add_option("--threads", learn.threads, "Worker threads");
    learn_cmd->add_option("--out", learn.out, "CSV path (stdout when omitted)");

    std::string fixture_name, fixture_dir = "fixtures";
    auto* fixture_cmd = app.add_subcommand("fixture", "Write built-in environments and tasks as JSON");
    fixture_cmd->add_option("name", fixture_name, "Fixture name or 'all'")->required();
    fixture_cmd->add_option("--out-dir", fixture_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (show_version) {
            std::cout << "realize " << version << "\ntolerances " << describe(Tolerances{}) << '\n';
            return exit_ok;
        }
        if (*design_cmd) return cmd_design(design_flags, design_out);
        if (*decide_cmd) return cmd_decide(design_flags);
        if (*verify_cmd) return cmd_verify(verify_env, verify_task_source, verify_reward, verify_samples, verify_seed);
        if (*sweep_cmd) {
            if (!sweep_config.empty()) apply_sweep_config(sweep_config, *sweep_cmd, sweep);
            return cmd_sweep(sweep);
        }
        if (*learn_cmd) return cmd_learn(learn);
        if (*fixture_cmd) return cmd_fixture(fixture_name, fixture_dir);
        std::cerr << app.help();
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_input_error(e.kind()) ? exit_usage : exit_internal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}
