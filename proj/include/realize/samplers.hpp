#pragma once

#include "realize/task.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace realize {

/**
Random streams. Every sampler draws from std::mt19937_64 seeded with
splitmix64(seed, stream), so each (seed, sample index, purpose) triple has
its own independent substream and results do not depend on scheduling.
*/
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

/// Stream identifiers so different samplers never share draws.
enum class StreamPurpose : std::uint64_t { Transitions = 1, Soap = 2, Verification = 3, Learning = 4 };

inline std::uint64_t substream(std::uint64_t index, StreamPurpose purpose) {
    return index * 16 + static_cast<std::uint64_t>(purpose);
}

struct SamplerConfig {
    std::uint64_t seed = 0;
    std::size_t n_states = 4;
    std::size_t n_actions = 3;
    double gamma = 0.95;
    std::optional<double> dirichlet_alpha;  ///< defaults to 1 / n_states
    std::optional<double> entropy_target;   ///< bits
    std::optional<std::size_t> soap_size;
    std::optional<double> spread_theta;
    bool spread_shared_action = false;      ///< one replacement action per member instead of per flip
    SoapMode mode = SoapMode::Equal;

    double alpha() const { return dirichlet_alpha.value_or(1.0 / static_cast<double>(n_states)); }
};

inline void validate_config(const SamplerConfig& config) {
    if (config.n_states == 0 || config.n_actions == 0)
        throw Error(ErrorKind::InvalidConfig, "state and action counts must be positive");
    if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw Error(ErrorKind::InvalidDiscount, "gamma outside [0, 1)");
    if (!(config.alpha() > 0.0)) throw Error(ErrorKind::InvalidConfig, "Dirichlet alpha must be positive");
    if (config.spread_theta && !(*config.spread_theta >= 0.0 && *config.spread_theta <= 1.0))
        throw Error(ErrorKind::InvalidProbability, "spread theta outside [0, 1]");
    if (config.soap_size && *config.soap_size == 0) throw Error(ErrorKind::InvalidConfig, "SOAP size must be positive");
}

/// Each row T[s][a][.] ~ Dirichlet(alpha, ..., alpha), independently.
inline Cmp sample_cmp(const SamplerConfig& config) {
    validate_config(config);
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(StreamPurpose::Transitions));
    std::gamma_distribution<double> draw(config.alpha(), 1.0);
    const std::size_t n = config.n_states;
    std::vector<double> t(n * config.n_actions * n);
    for (std::size_t row = 0; row < n * config.n_actions; ++row) {
        double* p = &t[row * n];
        double total = 0.0;
        do {
            total = 0.0;
            for (std::size_t k = 0; k < n; ++k) total += (p[k] = draw(rng));
        } while (!(total > 0.0));
        for (std::size_t k = 0; k < n; ++k) p[k] /= total;
    }
    return {n, config.n_actions, std::move(t), config.gamma, 0};
}

/// Shannon entropy in bits.
inline double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

namespace detail {

/// Row with logit beta on `designated` and 0 elsewhere, softmax-normalised.
inline void softmax_row(double beta, std::size_t designated, std::span<double> row) {
    const double others = static_cast<double>(row.size() - 1);
    const double rest = std::exp(-beta); // e^0 / e^beta
    const double z = 1.0 + others * rest;
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = (k == designated ? 1.0 : rest) / z;
}

} // namespace detail

/**
Rows interpolate between deterministic and uniform: per (s, a) a designated
next state is drawn uniformly, and the row is a softmax putting logit beta
on it. beta is found by bisection so the row entropy equals the target.
*/
inline Cmp sample_cmp_with_entropy(const SamplerConfig& config, double target_bits) {
    validate_config(config);
    const std::size_t n = config.n_states;
    const double max_bits = std::log2(static_cast<double>(n));
    if (!(target_bits >= 0.0 && target_bits <= max_bits + 1e-12))
        throw Error(ErrorKind::EntropyOutOfRange,
                    "target " + std::to_string(target_bits) + " bits outside [0, " + std::to_string(max_bits) + "]");

    std::vector<double> row(n);
    auto row_entropy = [&](double beta) {
        detail::softmax_row(beta, 0, row);
        return entropy_bits(row);
    };
    // Entropy decreases monotonically in beta.
    double beta = 0.0;
    if (target_bits <= 0.0) {
        beta = std::numeric_limits<double>::infinity();
    } else if (target_bits < max_bits) {
        double lo = 0.0, hi = 1.0;
        while (row_entropy(hi) > target_bits) hi *= 2.0;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (row_entropy(mid) > target_bits ? lo : hi) = mid;
        }
        beta = 0.5 * (lo + hi);
    }

    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(StreamPurpose::Transitions));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> t(n * config.n_actions * n, 0.0);
    for (std::size_t r = 0; r < n * config.n_actions; ++r) {
        const std::size_t designated = pick(rng);
        std::span<double> out(&t[r * n], n);
        if (std::isinf(beta)) out[designated] = 1.0;
        else detail::softmax_row(beta, designated, out);
    }
    return {n, config.n_actions, std::move(t), config.gamma, 0};
}

/**
Samples `soap_size` distinct policies uniformly from `policies`, or first a
size uniformly in [1, |policies|] when no size is configured.
*/
inline Soap sample_soap(const SamplerConfig& config, std::span<const Policy> policies) {
    if (policies.empty()) throw Error(ErrorKind::InvalidConfig, "empty policy space");
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(StreamPurpose::Soap));
    std::size_t size = 0;
    if (config.soap_size) {
        size = *config.soap_size;
        if (size == 0 || size > policies.size())
            throw Error(ErrorKind::InvalidConfig, "SOAP size " + std::to_string(size) + " exceeds " +
                                                      std::to_string(policies.size()) + " policies");
    } else {
        size = std::uniform_int_distribution<std::size_t>(1, policies.size())(rng);
    }
    // Partial Fisher-Yates over indices.
    std::vector<std::size_t> index(policies.size());
    std::iota(index.begin(), index.end(), 0);
    Soap soap;
    soap.mode = config.mode;
    for (std::size_t k = 0; k < size; ++k) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(k, index.size() - 1)(rng);
        std::swap(index[k], index[j]);
        soap.good.push_back(policies[index[k]]);
    }
    return soap;
}

inline constexpr std::size_t spread_retry_cap = 100;

/**
Reference policy pi_1 drawn uniformly; each further member copies pi_1 and,
per state, with probability theta replaces the action by a uniformly drawn
one. Duplicates are redrawn up to spread_retry_cap times, after which the
SOAP is accepted smaller.
*/
inline Soap sample_soap_spread(const SamplerConfig& config, double theta) {
    validate_config(config);
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::InvalidProbability, "theta outside [0, 1]");
    if (!config.soap_size) throw Error(ErrorKind::InvalidConfig, "spread sampling needs a SOAP size");
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(StreamPurpose::Soap));
    std::uniform_int_distribution<ActionId> action(0, config.n_actions - 1);
    std::bernoulli_distribution coin(theta);

    Policy reference{std::vector<ActionId>(config.n_states)};
    for (auto& a : reference.actions) a = action(rng);
    std::set<Policy> members{reference};
    Soap soap;
    soap.mode = config.mode;
    soap.good.push_back(reference);
    for (std::size_t k = 1; k < *config.soap_size; ++k) {
        for (std::size_t attempt = 0; attempt < spread_retry_cap; ++attempt) {
            Policy candidate = reference;
            const ActionId shared = action(rng);
            for (auto& a : candidate.actions)
                if (coin(rng)) a = config.spread_shared_action ? shared : action(rng);
            if (members.insert(candidate).second) {
                soap.good.push_back(std::move(candidate));
                break;
            }
        }
    }
    return soap;
}

} // namespace realize
