#pragma once

#include "evl/mdp.hpp"

#include <functional>
#include <vector>

namespace evl::analysis {

using Policy = std::function<Action(const State&, Rng&)>;

/// Greedy policy of v: exact expectation when the model has one, else m_eval draws.
Policy greedy_policy(const MdpModel& model, const ValueFn& v, std::size_t m_eval = 10);

/// Uniformly random actions.
Policy random_policy(const MdpModel& model);

/// Smallest H with gamma^H <= fraction.
std::size_t horizon_for(double gamma, double fraction = 0.01);

/// Mean discounted cost over `rollouts` trajectories of length `horizon` from s.
/// Rollout r draws from substream {r} of rng's seed.
double rollout_value(const MdpModel& model, const Policy& policy, const State& s, std::size_t rollouts,
                     std::size_t horizon, const Rng& rng);

struct PolicyErrorReport {
    double relative_error = 0.0;
    /// gamma^horizon * v_max, the largest possible bias from truncating the rollouts.
    double truncation_bias = 0.0;
    std::vector<double> estimates;
    std::size_t skipped = 0;
};

/// sup over eval_states of |v*(s) - v^pi(s)| / |v*(s)| for pi greedy w.r.t. v, with v^pi
/// estimated by rollouts; states with |v*(s)| < 1e-6 are skipped.
PolicyErrorReport policy_relative_error(const MdpModel& model, const ValueFn& v, const ValueFn& oracle,
                                        const std::vector<State>& eval_states, std::size_t rollouts,
                                        std::size_t horizon, const Rng& rng, std::size_t m_eval = 10);

/// Steps survived before reaching a terminal state, capped at max_steps, one per episode.
std::vector<double> episode_lengths(const MdpModel& model, const Policy& policy, const StateSampler& start,
                                    std::size_t episodes, std::size_t max_steps, const Rng& rng);

double median(std::vector<double> values);

}  // namespace evl::analysis
