#pragma once

#include "evl/analysis/chain.hpp"

#include <optional>
#include <string>
#include <vector>

namespace evl::analysis {

/// How q is estimated from good/bad iteration labels across runs.
enum class QEstimator {
    /// Smallest per-iteration fraction of good runs: Pr{good at k} >= q for every k.
    min_over_k,
    /// Fraction of good iterations pooled over all runs and iterations.
    pooled,
};

std::string to_string(QEstimator e);
QEstimator q_estimator_from_string(const std::string& name);

/// good[r][k] = residuals[r][k] <= epsilon.
std::vector<std::vector<bool>> classify_iterations(const std::vector<std::vector<double>>& residuals, double epsilon);

/// Median of all residuals pooled across runs and iterations.
double median_residual(const std::vector<std::vector<double>>& residuals);

double estimate_q(const std::vector<std::vector<bool>>& good, QEstimator estimator);

/// Error-level process: X_0 = K*, then max(X - 1, 1) after a good iteration, K* after a bad one.
/// Returns one trajectory X_0..X_K per run.
std::vector<std::vector<std::uint64_t>> error_levels(const std::vector<std::vector<bool>>& good,
                                                     std::uint64_t k_star);

struct DominanceRow {
    std::uint64_t k = 0;
    std::uint64_t theta = 0;
    double px = 0.0;
    double py = 0.0;
    double std_error = 0.0;
    bool flag = false;
};

struct DominanceReport {
    DominatingChain chain;
    std::size_t runs = 0;
    std::optional<double> epsilon;
    std::vector<DominanceRow> rows;
    std::size_t violations = 0;
    /// Largest (px - py) / stderr over all rows.
    double max_z = 0.0;
};

/// Compares Pr{X_k >= theta} with Pr{Y_k >= theta} for every k and theta in 1..K*.
/// The standard error is sqrt(p(1 - p) / n) with p = max(px, py), floored at 1/n; a row is
/// flagged when px - py exceeds two standard errors. Fewer than 30 runs is refused.
DominanceReport dominance_check(const std::vector<std::vector<std::uint64_t>>& x_traj, const DominatingChain& chain);

struct DominanceOptions {
    std::uint64_t k_star = 5;
    /// Defaults to the pooled median residual.
    std::optional<double> epsilon;
    /// Overrides the estimate when set.
    std::optional<double> q;
    QEstimator estimator = QEstimator::min_over_k;
};

/// Thresholds residual trajectories, estimates q, builds X and runs dominance_check.
DominanceReport dominance_from_residuals(const std::vector<std::vector<double>>& residuals,
                                         const DominanceOptions& options);

}  // namespace evl::analysis
