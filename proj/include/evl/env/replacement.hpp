#pragma once

#include "evl/mdp.hpp"
#include "evl/value_fn.hpp"

#include <vector>

namespace evl::env {

/// Optimal replacement: a machine's wear s grows by Exp(lambda) increments while kept;
/// keeping costs maint_coeff * s, replacing costs replace_cost and restarts from wear 0.
/// The state space is truncated at s_max, with the tail mass placed on s_max.
struct ReplacementParams {
    double gamma = 0.6;
    double lambda_rate = 0.5;
    double replace_cost = 30.0;
    double maint_coeff = 4.0;
    double s_max = 10.0;
    /// Gauss-Legendre panels (8 nodes each) for the model's expectation operator.
    std::size_t quadrature_panels = 16;

    void validate() const;
};

/// Action indices: a = 0 replaces, a = 1 keeps.
inline constexpr Action kReplace = 0;
inline constexpr Action kKeep = 1;

MdpModel replacement_model(const ReplacementParams& params = {});

/// Uniform grid value-iteration solution of the truncated replacement problem.
///
/// Expectations integrate the exponential density exactly against the piecewise-linear
/// interpolant of the node values, so one sweep costs O(n).
class ReplacementOracle {
public:
    ReplacementOracle(const ReplacementParams& params, std::size_t grid_n, double tol = 1e-10);

    const ReplacementParams& params() const { return params_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t sweeps() const { return sweeps_; }
    double spacing() const { return h_; }
    /// v* as a tabular-grid ValueFn with linear interpolation.
    ValueFn value_fn() const;
    /// Smallest grid node where the optimal action is replace.
    double threshold() const;
    std::vector<Action> policy() const { return policy_; }

    /// E[f(next) | node i, keep] for node values f (interpolated linearly), for all i.
    std::vector<double> keep_expectations(const std::vector<double>& f) const;
    /// One Bellman sweep of node values.
    std::vector<double> bellman(const std::vector<double>& f, std::vector<Action>* greedy = nullptr) const;
    /// Value of the stationary node policy, solved exactly for the interpolated model.
    std::vector<double> evaluate_policy(const std::vector<Action>& policy) const;
    /// Greedy node policy of v (evaluated at the nodes) and its value, interpolated to `states`.
    std::vector<double> greedy_policy_values(const ValueFn& v, const std::vector<State>& states) const;

private:
    ReplacementParams params_;
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<Action> policy_;
    double h_ = 0.0;
    double w_left_ = 0.0;
    double w_right_ = 0.0;
    double decay_ = 0.0;
    std::size_t sweeps_ = 0;
};

}  // namespace evl::env
