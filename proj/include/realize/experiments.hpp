#pragma once

#include "realize/fixtures.hpp"
#include "realize/q_learning.hpp"
#include "realize/reward_design.hpp"
#include "realize/samplers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace realize {

// ---------------------------------------------------------------------------
// Confidence intervals
// ---------------------------------------------------------------------------

enum class CiMethod { Normal, Wilson };

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

inline constexpr double z95 = 1.96;

/// p +- z sqrt(p (1 - p) / n), clipped to [0, 1].
inline Interval normal_interval(std::size_t successes, std::size_t n, double z = z95) {
    if (n == 0) return {0.0, 1.0};
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

inline Interval wilson_interval(std::size_t successes, std::size_t n, double z = z95) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline Interval proportion_interval(std::size_t successes, std::size_t n, CiMethod method) {
    return method == CiMethod::Wilson ? wilson_interval(successes, n) : normal_interval(successes, n);
}

/// Mean +- z s / sqrt(n) for a sample of reals; zero width for n < 2.
inline std::pair<double, Interval> mean_interval(std::span<const double> xs, double z = z95) {
    if (xs.empty()) return {0.0, {0.0, 0.0}};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, {mean, mean}};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    const double half = z * sd / std::sqrt(static_cast<double>(xs.size()));
    return {mean, {mean - half, mean + half}};
}

// ---------------------------------------------------------------------------
// Parallel loop
// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, n) on up to `threads` workers. Rethrows the first exception.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; !failed && (i = next++) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) pool.emplace_back(worker);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Expressivity sweeps
// ---------------------------------------------------------------------------

enum class SweepParameter { NActions, NStates, Gamma, SoapSize, Entropy, Spread };

inline const char* to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::NActions: return "n_actions";
    case SweepParameter::NStates: return "n_states";
    case SweepParameter::Gamma: return "gamma";
    case SweepParameter::SoapSize: return "soap_size";
    case SweepParameter::Entropy: return "entropy";
    case SweepParameter::Spread: return "spread";
    }
    return "?";
}

inline SweepParameter parse_sweep_parameter(const std::string& name) {
    for (auto p : {SweepParameter::NActions, SweepParameter::NStates, SweepParameter::Gamma, SweepParameter::SoapSize,
                   SweepParameter::Entropy, SweepParameter::Spread})
        if (name == to_string(p)) return p;
    throw Error(ErrorKind::InvalidConfig, "unknown sweep parameter '" + name + "'");
}

/// Grid used when none is given on the command line.
inline std::vector<double> default_sweep_grid(SweepParameter p) {
    switch (p) {
    case SweepParameter::NActions:
    case SweepParameter::NStates: return {2, 3, 4, 5, 6};
    case SweepParameter::Gamma: return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    case SweepParameter::SoapSize: return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    case SweepParameter::Entropy: return {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    case SweepParameter::Spread: return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    }
    return {};
}

struct SweepSpec {
    SweepParameter parameter = SweepParameter::Gamma;
    std::vector<double> grid;
    std::size_t samples = 200;
    /// Defaults: 4 states, 3 actions, gamma 0.95, SOAP size 2. `seed` is the base seed.
    SamplerConfig base{.soap_size = 2};
    DesignOptions design{};
    CiMethod ci = CiMethod::Normal;
    unsigned threads = 1;
};

inline void validate_spec(const SweepSpec& spec) {
    if (spec.grid.empty()) throw Error(ErrorKind::InvalidConfig, "sweep grid is empty");
    if (spec.samples == 0) throw Error(ErrorKind::InvalidConfig, "sweep needs at least one sample per point");
    validate_config(spec.base);
}

struct SweepPoint {
    SweepParameter parameter{};
    double value = 0.0;
    SoapMode mode = SoapMode::Equal;
    std::size_t n = 0;
    std::size_t found = 0;
    Interval ci;
    std::uint64_t seed = 0;

    double fraction() const { return n == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(n); }
};

/// Both modes judged on one sampled task.
struct SampleVerdict {
    bool equal = false;
    bool range = false;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    /// Per grid value, per sample index.
    std::vector<std::vector<SampleVerdict>> samples;
};

/// Sampler configuration of one sweep sample; the seed depends only on the base seed and the index.
inline SamplerConfig sweep_sample_config(const SweepSpec& spec, double value, std::size_t index) {
    SamplerConfig config = spec.base;
    config.seed = splitmix64(spec.base.seed ^ splitmix64(index));
    auto count = [&](double v) {
        if (!(v >= 1.0) || v != std::floor(v))
            throw Error(ErrorKind::InvalidConfig, std::string(to_string(spec.parameter)) + " must be a positive integer");
        return static_cast<std::size_t>(v);
    };
    switch (spec.parameter) {
    case SweepParameter::NActions: config.n_actions = count(value); break;
    case SweepParameter::NStates:
        config.n_states = count(value);
        config.dirichlet_alpha.reset();
        break;
    case SweepParameter::Gamma: config.gamma = value; break;
    case SweepParameter::SoapSize: config.soap_size = count(value); break;
    case SweepParameter::Entropy: config.entropy_target = value; break;
    case SweepParameter::Spread: config.spread_theta = value; break;
    }
    validate_config(config);
    return config;
}

/**
Samples one (CMP, SOAP) pair and decides it in both modes. SOAP sizes larger
than the policy space are clamped to the whole space.
*/
template <LpSolver Solver = SimplexSolver>
SampleVerdict judge_sweep_sample(SamplerConfig config, const DesignOptions& options, const Solver& solver = {}) {
    const Cmp cmp = config.entropy_target ? sample_cmp_with_entropy(config, *config.entropy_target) : sample_cmp(config);
    Soap soap;
    if (config.spread_theta) {
        soap = sample_soap_spread(config, *config.spread_theta);
    } else {
        const auto policies = enumerate_policies(cmp);
        if (config.soap_size) config.soap_size = std::min(*config.soap_size, policies.size());
        soap = sample_soap(config, policies);
    }
    SampleVerdict verdict;
    soap.mode = SoapMode::Equal;
    verdict.equal = design_soap(cmp, soap, options, solver).found();
    soap.mode = SoapMode::Range;
    verdict.range = design_soap(cmp, soap, options, solver).found();
    return verdict;
}

/**
Fraction of sampled SOAPs that some reward realizes, per grid value and
mode. Every grid value sees the same sample seeds, so CMPs are shared across
values wherever the varied parameter leaves their shape alone.
*/
template <LpSolver Solver = SimplexSolver>
SweepResult run_expressivity_sweep(const SweepSpec& spec, const Solver& solver = {}) {
    validate_spec(spec);
    SweepResult result;
    for (double value : spec.grid) {
        std::vector<SampleVerdict> verdicts(spec.samples);
        parallel_for(spec.samples, spec.threads, [&](std::size_t i) {
            verdicts[i] = judge_sweep_sample(sweep_sample_config(spec, value, i), spec.design, solver);
        });
        for (SoapMode mode : {SoapMode::Equal, SoapMode::Range}) {
            SweepPoint point{spec.parameter, value, mode, spec.samples, 0, {}, spec.base.seed};
            for (const auto& v : verdicts) point.found += (mode == SoapMode::Equal ? v.equal : v.range);
            point.ci = proportion_interval(point.found, point.n, spec.ci);
            result.points.push_back(point);
        }
        result.samples.push_back(std::move(verdicts));
    }
    return result;
}

inline std::string format_number(double x) {
    std::ostringstream out;
    out.precision(10);
    out << x;
    return out.str();
}

inline constexpr const char* sweep_csv_header = "param,value,mode,n,fraction,ci_low,ci_high,seed";

inline void write_sweep_row(std::ostream& out, const SweepPoint& p) {
    out << to_string(p.parameter) << ',' << format_number(p.value) << ',' << to_string(p.mode) << ',' << p.n << ','
        << format_number(p.fraction()) << ',' << format_number(p.ci.low) << ',' << format_number(p.ci.high) << ','
        << p.seed << '\n';
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << sweep_csv_header << '\n';
    for (const SweepPoint& p : result.points) write_sweep_row(out, p);
}

// ---------------------------------------------------------------------------
// Learning experiment
// ---------------------------------------------------------------------------

/// Per-episode mean and confidence band over runs.
struct LearningCurve {
    std::vector<std::vector<double>> runs; ///< runs x episodes
    std::vector<double> mean;
    std::vector<Interval> ci;

    /// Mean of the per-episode means over the last `k` episodes.
    double final_mean(std::size_t k) const {
        if (mean.empty()) return 0.0;
        k = std::min(k, mean.size());
        double total = 0.0;
        for (std::size_t e = mean.size() - k; e < mean.size(); ++e) total += mean[e];
        return total / static_cast<double>(k);
    }
};

/// Seed of run `r`, shared by every reward so both agents see matched streams.
inline std::uint64_t learning_run_seed(std::uint64_t base, std::size_t run) {
    return splitmix64(base ^ splitmix64(run + 1));
}

inline LearningCurve learning_curve(const Mdp& mdp, const LearningConfig& config, const Soap& soap, std::size_t runs,
                                    unsigned threads = 1) {
    if (runs == 0) throw Error(ErrorKind::InvalidConfig, "learning experiment needs at least one run");
    LearningCurve curve;
    curve.runs.resize(runs);
    parallel_for(runs, threads, [&](std::size_t r) {
        LearningConfig c = config;
        c.seed = learning_run_seed(config.seed, r);
        curve.runs[r] = q_learning_run(mdp, c, soap).metric;
    });
    std::vector<double> column(runs);
    for (std::size_t e = 0; e < config.episodes; ++e) {
        for (std::size_t r = 0; r < runs; ++r) column[r] = curve.runs[r][e];
        auto [m, ci] = mean_interval(column);
        curve.mean.push_back(m);
        curve.ci.push_back(ci);
    }
    return curve;
}

struct LearningComparison {
    DesignOutcome design;
    LearningCurve designed;
    LearningCurve goal;
};

/**
Q-learning on the grid under a reward designed for `soap` and under the
conventional goal reward, both scored against `soap`.
*/
template <LpSolver Solver = SimplexSolver>
LearningComparison run_learning_experiment(std::size_t runs, const LearningConfig& config, const GridWorld& world,
                                           const Soap& soap, DesignOptions options = {}, unsigned threads = 1,
                                           const Solver& solver = {}) {
    options.zero_terminal_reward = true;
    LearningComparison out;
    out.design = design_soap(world.cmp, soap, options, solver);
    if (!out.design.found())
        throw Error(ErrorKind::InvalidTask, "the SOAP is not realizable on this environment; nothing to learn");
    out.designed = learning_curve({world.cmp, *out.design.reward}, config, soap, runs, threads);
    out.goal = learning_curve({world.cmp, make_grid_goal_reward(world)}, config, soap, runs, threads);
    return out;
}

inline constexpr const char* learning_csv_header = "run,episode,metric";

inline void write_learning_csv(std::ostream& out, const LearningCurve& curve) {
    out << learning_csv_header << '\n';
    for (std::size_t r = 0; r < curve.runs.size(); ++r)
        for (std::size_t e = 0; e < curve.runs[r].size(); ++e)
            out << r << ',' << e << ',' << format_number(curve.runs[r][e]) << '\n';
}

} // namespace realize
