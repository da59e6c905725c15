#pragma once

#include "evl/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace evl::analysis {

/// Chain on {1..K*}: from Y it moves to max(Y - 1, 1) with probability q, else jumps to K*.
struct DominatingChain {
    double q = 0.5;
    std::uint64_t k_star = 1;

    /// Requires q in [0, 1] (the endpoints are accepted for simulation) and K* >= 1.
    void validate() const;
    /// P(i, j) over states 1..K* stored at indices 0..K*-1.
    Eigen::MatrixXd transition_matrix() const;
    /// One transition from y.
    std::uint64_t step(std::uint64_t y, Rng& rng) const;
};

/// mu(1) = q^{K*-1}, mu(i) = (1 - q) q^{K*-i} for 1 < i < K*, mu(K*) = 1 - q.
std::vector<double> chain_steady_state(const DominatingChain& chain);

struct ChainSimulation {
    std::uint64_t steps = 0;
    /// Fraction of time steps 1..steps spent in each state.
    std::vector<double> occupancy;
    std::uint64_t final_state = 0;
    std::uint64_t visits_to_one = 0;
    /// First step at which state 1 was reached (0 if never).
    std::uint64_t first_hit_one = 0;
};

/// Simulates from Y_0 = K*.
ChainSimulation chain_simulate(const DominatingChain& chain, std::uint64_t steps, Rng& rng);

/// Distribution of Y_k started from Y_0 = K*, by exact propagation.
std::vector<double> chain_marginal(const DominatingChain& chain, std::uint64_t k);

/// Empirical distribution of Y_k over independent replicas started at K*; replica r uses
/// substream {r} of rng's seed, so the result does not depend on the thread count.
std::vector<double> chain_replicas(const DominatingChain& chain, std::uint64_t k, std::uint64_t replicas,
                                   const Rng& rng, std::size_t threads = 0);

/// ceil(ln(1 / (delta' (1 - q) q^{K*-1}))); needs 0 < q < 1 and delta' in (0, 1).
std::uint64_t chain_mixing_bound(const DominatingChain& chain, double delta_prime);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace evl::analysis
