#pragma once

#include "evl/fitting.hpp"
#include "evl/mdp.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace evl {

enum class FitterKind { rpbf, rkhs, polynomial };

std::string to_string(FitterKind kind);
FitterKind fitter_kind_from_string(const std::string& name);

struct EvlConfig {
    std::size_t n_states = 100;
    std::size_t m_next = 5;
    /// Required for rpbf, rejected otherwise.
    std::optional<std::size_t> j_features;
    std::size_t k_iters = 20;
    FitterKind fitter = FitterKind::rpbf;
    RpbfFamily rpbf;
    RkhsSpec rkhs;
    int poly_degree = 4;
    /// State distribution mu; empty means uniform on the model's bounds.
    StateSampler mu;
    std::uint64_t seed = 0;
    /// Invoke the checkpoint callback every this many iterations (0 = never).
    std::size_t checkpoint_every = 0;
    /// Clamp every fitted iterate to [-v_max, v_max].
    bool clamp = true;
    /// Worker threads for backups (0 = thread_limit()).
    std::size_t threads = 0;
    BoxLsqOptions box;
    /// Accept gamma = 0 models (tests only).
    bool allow_zero_gamma = false;

    void validate(const MdpModel& model) const;
};

/// Reference quantities attached to a run. Everything is optional; absent entries leave
/// the corresponding trace columns empty.
struct TraceOracle {
    /// Held-out states for the Bellman residual and relative errors.
    std::vector<State> grid;
    /// v* on the grid.
    std::vector<double> v_star;
    /// Computes [T v](grid); defaults to exact_bellman_grid when the model has a density.
    std::function<std::vector<double>(const ValueFn&)> bellman;
    /// Value of the greedy policy of v on the grid.
    std::function<std::vector<double>(const ValueFn&)> policy_values;
};

struct IterationRecord {
    std::size_t k = 0;
    /// |v_{k} - v~| on the sampled states: mean absolute, root mean square, max.
    double fit_l1 = 0.0;
    double fit_l2 = 0.0;
    double fit_sup = 0.0;
    /// |v_k - T v_{k-1}| on the held-out grid.
    std::optional<double> bellman_sup;
    std::optional<double> bellman_l2;
    /// max over the grid of |v* - v_k| / |v*|.
    std::optional<double> rel_err_value;
    /// max over the grid of |v* - v^{pi_k}| / |v*| with pi_k greedy for v_k.
    std::optional<double> rel_err_policy;
    FitDiagnostics diagnostics;
    double wall_seconds = 0.0;
};

struct RunTrace {
    std::uint64_t seed = 0;
    std::vector<IterationRecord> records;
};

struct EvlResult {
    ValueFn value;
    RunTrace trace;
};

/// Raised when an iteration fails; carries the records of the iterations that completed.
class EvlError : public std::runtime_error {
public:
    EvlError(const std::string& message, RunTrace partial, std::size_t failed_iteration)
        : std::runtime_error(message), partial_(std::move(partial)), failed_iteration_(failed_iteration) {}

    const RunTrace& partial_trace() const { return partial_; }
    std::size_t failed_iteration() const { return failed_iteration_; }

private:
    RunTrace partial_;
    std::size_t failed_iteration_;
};

using CheckpointFn = std::function<void(std::size_t iteration, const ValueFn& v)>;

/// Runs K iterations of v_{k+1} = fit(empirical backup of v_k). Iteration k draws from
/// substreams {k, 0} (states and next states) and {k, 1} (features) of config.seed, so
/// runs are reproducible and independent of thread count.
EvlResult run_evl(const MdpModel& model, const EvlConfig& config, std::optional<ValueFn> v0 = std::nullopt,
                  const TraceOracle* oracle = nullptr, const CheckpointFn& on_checkpoint = {});

/// Pointwise evaluation with the clamp applied.
std::vector<double> evaluate_value_fn(const ValueFn& v, const std::vector<State>& states);

/// max over i with |ref_i| >= floor of |ref_i - x_i| / |ref_i|.
double max_relative_error(const std::vector<double>& ref, const std::vector<double>& x, double floor = 1e-6);

}  // namespace evl
