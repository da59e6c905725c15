#pragma once

#include "evl/common.hpp"
#include "evl/rng.hpp"
#include "evl/value_fn.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace evl {

using Action = std::size_t;

/// A continuous-state, finite-action discounted cost MDP.
struct MdpModel {
    using CostFn = std::function<double(const State&, Action)>;
    using Sampler = std::function<State(const State&, Action, Rng&)>;
    /// E[f(X)] for X ~ Q(.|s, a), computed deterministically.
    using Expectation = std::function<double(const State&, Action, const std::function<double(const State&)>&)>;

    std::string name;
    std::size_t state_dim = 1;
    Bounds bounds;
    std::vector<std::string> actions;
    CostFn cost;
    Sampler sample_next;
    double gamma = 0.9;
    double c_max = 1.0;
    /// Present for models with a known transition density.
    Expectation expectation;
    /// Optional predicate marking absorbing terminal states (used by rollouts only).
    std::function<bool(const State&)> terminal;

    double v_max() const { return c_max / (1.0 - gamma); }
    std::size_t n_actions() const { return actions.size(); }
    /// gamma = 0 is accepted only when allow_zero_gamma is set (testing).
    void validate(bool allow_zero_gamma = false) const;
    bool contains(const State& s) const;
    State clamp(const State& s) const;
};

/// N sampled states with their empirical backup targets.
struct SampledBackup {
    std::vector<State> states;
    std::vector<double> targets;
    std::size_t m_per_backup = 1;

    std::size_t size() const { return states.size(); }
};

/// min_a { c(s,a) + gamma/m * sum_i v(X_i) }, fresh draws X_i ~ Q(.|s,a) per action.
/// Action a draws from Rng(derive_seed(key, {a})) where key = rng.next_u64().
double empirical_bellman_backup(const MdpModel& model, const ValueFn& v, const State& s,
                                std::size_t m, Rng& rng);

/// Per-action empirical Q-values with the same stream layout as empirical_bellman_backup.
std::vector<double> empirical_q_values(const MdpModel& model, const ValueFn& v, const State& s,
                                       std::size_t m, Rng& rng);

/// [T v](s) on each grid state. Uses the model's expectation when present; otherwise a
/// Monte Carlo fallback with fallback_m >= 1e5 draws. Throws UnsupportedOperation when
/// neither is available.
std::vector<double> exact_bellman_grid(const MdpModel& model, const ValueFn& v,
                                       const std::vector<State>& grid,
                                       std::optional<std::size_t> fallback_m = std::nullopt,
                                       std::uint64_t fallback_seed = 0);

using StateSampler = std::function<State(Rng&)>;

/// Uniform distribution on the given box.
StateSampler uniform_box_sampler(Bounds box);

/// Draws n states from mu and computes their targets in parallel. Per-state randomness is
/// pre-split from rng so the result does not depend on the number of threads.
SampledBackup sample_backups(const MdpModel& model, const ValueFn& v, const StateSampler& mu,
                             std::size_t n, std::size_t m, Rng& rng, std::size_t threads = 0);

/// argmin of the empirical Q-values; ties go to the lowest action index.
Action greedy_policy_action(const MdpModel& model, const ValueFn& v, const State& s,
                            std::size_t m_eval, Rng& rng);

/// argmin using the model's deterministic expectation.
Action greedy_policy_action_exact(const MdpModel& model, const ValueFn& v, const State& s);

}  // namespace evl
