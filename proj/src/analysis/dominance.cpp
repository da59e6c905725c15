#include "evl/analysis/dominance.hpp"

#include "evl/common.hpp"

#include <algorithm>
#include <cmath>

namespace evl::analysis {

std::string to_string(QEstimator e) { return e == QEstimator::min_over_k ? "min-k" : "pooled"; }

QEstimator q_estimator_from_string(const std::string& name) {
    if (name == "min-k") return QEstimator::min_over_k;
    if (name == "pooled") return QEstimator::pooled;
    throw ValidationError("unknown q estimator '" + name + "' (expected min-k or pooled)", "q_estimator");
}

std::vector<std::vector<bool>> classify_iterations(const std::vector<std::vector<double>>& residuals, double epsilon) {
    std::vector<std::vector<bool>> good;
    good.reserve(residuals.size());
    for (const auto& run : residuals) {
        std::vector<bool> g(run.size());
        for (std::size_t k = 0; k < run.size(); ++k) g[k] = run[k] <= epsilon;
        good.push_back(std::move(g));
    }
    return good;
}

double median_residual(const std::vector<std::vector<double>>& residuals) {
    std::vector<double> all;
    for (const auto& run : residuals) all.insert(all.end(), run.begin(), run.end());
    if (all.empty()) throw ValidationError("no residuals to take a median of");
    const std::size_t mid = all.size() / 2;
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid), all.end());
    double m = all[mid];
    if (all.size() % 2 == 0) {
        const double lower = *std::max_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

double estimate_q(const std::vector<std::vector<bool>>& good, QEstimator estimator) {
    if (good.empty() || good.front().empty()) throw ValidationError("no iterations to estimate q from");
    const std::size_t k_len = good.front().size();
    for (const auto& run : good)
        if (run.size() != k_len) throw ValidationError("runs have different iteration counts");
    if (estimator == QEstimator::pooled) {
        std::size_t total = 0;
        for (const auto& run : good) total += static_cast<std::size_t>(std::count(run.begin(), run.end(), true));
        return static_cast<double>(total) / static_cast<double>(good.size() * k_len);
    }
    double q = 1.0;
    for (std::size_t k = 0; k < k_len; ++k) {
        std::size_t count = 0;
        for (const auto& run : good) count += run[k] ? 1 : 0;
        q = std::min(q, static_cast<double>(count) / static_cast<double>(good.size()));
    }
    return q;
}

std::vector<std::vector<std::uint64_t>> error_levels(const std::vector<std::vector<bool>>& good,
                                                     std::uint64_t k_star) {
    if (k_star < 1) throw ValidationError("must be at least 1", "k_star");
    std::vector<std::vector<std::uint64_t>> out;
    out.reserve(good.size());
    for (const auto& run : good) {
        std::vector<std::uint64_t> x(run.size() + 1);
        x[0] = k_star;
        for (std::size_t k = 0; k < run.size(); ++k) x[k + 1] = run[k] ? std::max<std::uint64_t>(x[k] - 1, 1) : k_star;
        out.push_back(std::move(x));
    }
    return out;
}

DominanceReport dominance_check(const std::vector<std::vector<std::uint64_t>>& x_traj, const DominatingChain& chain) {
    chain.validate();
    if (x_traj.size() < 30)
        throw ValidationError("dominance check needs at least 30 runs, got " + std::to_string(x_traj.size()), "runs");
    const std::size_t len = x_traj.front().size();
    for (const auto& x : x_traj)
        if (x.size() != len) throw ValidationError("trajectories have different lengths");

    DominanceReport rep;
    rep.chain = chain;
    rep.runs = x_traj.size();
    const double n = static_cast<double>(x_traj.size());
    std::vector<double> y = chain_marginal(chain, 0);
    for (std::size_t k = 0; k < len; ++k) {
        // tail[theta] = Pr{Y_k >= theta}
        std::vector<double> tail(chain.k_star + 2, 0.0);
        for (std::uint64_t th = chain.k_star; th >= 1; --th) tail[th] = tail[th + 1] + y[th - 1];
        for (std::uint64_t th = 1; th <= chain.k_star; ++th) {
            std::size_t count = 0;
            for (const auto& x : x_traj) count += x[k] >= th ? 1 : 0;
            DominanceRow row;
            row.k = k;
            row.theta = th;
            row.px = static_cast<double>(count) / n;
            row.py = std::min(1.0, tail[th]);
            const double p = std::max(row.px, row.py);
            row.std_error = std::max(std::sqrt(p * (1.0 - p) / n), 1.0 / n);
            const double z = (row.px - row.py) / row.std_error;
            rep.max_z = k == 0 && th == 1 ? z : std::max(rep.max_z, z);
            row.flag = row.px - row.py > 2.0 * row.std_error;
            rep.violations += row.flag ? 1 : 0;
            rep.rows.push_back(row);
        }
        // Advance the exact law of Y by one step.
        std::vector<double> next(chain.k_star, 0.0);
        for (std::uint64_t i = 0; i < chain.k_star; ++i) {
            next[i > 0 ? i - 1 : 0] += chain.q * y[i];
            next[chain.k_star - 1] += (1.0 - chain.q) * y[i];
        }
        y.swap(next);
    }
    return rep;
}

DominanceReport dominance_from_residuals(const std::vector<std::vector<double>>& residuals,
                                         const DominanceOptions& options) {
    const double eps = options.epsilon ? *options.epsilon : median_residual(residuals);
    const auto good = classify_iterations(residuals, eps);
    DominatingChain chain;
    chain.k_star = options.k_star;
    chain.q = options.q ? *options.q : estimate_q(good, options.estimator);
    DominanceReport rep = dominance_check(error_levels(good, options.k_star), chain);
    rep.epsilon = eps;
    return rep;
}

}  // namespace evl::analysis
