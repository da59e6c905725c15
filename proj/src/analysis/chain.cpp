#include "evl/analysis/chain.hpp"

#include "evl/common.hpp"
#include "evl/parallel.hpp"

#include <cmath>

namespace evl::analysis {

void DominatingChain::validate() const {
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("must lie in [0, 1]", "q");
    if (k_star < 1) throw ValidationError("must be at least 1", "k_star");
}

Eigen::MatrixXd DominatingChain::transition_matrix() const {
    validate();
    const auto n = static_cast<Eigen::Index>(k_star);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        P(i, std::max<Eigen::Index>(i - 1, 0)) += q;
        P(i, n - 1) += 1.0 - q;
    }
    return P;
}

std::uint64_t DominatingChain::step(std::uint64_t y, Rng& rng) const {
    if (rng.uniform() < q) return y > 1 ? y - 1 : 1;
    return k_star;
}

std::vector<double> chain_steady_state(const DominatingChain& chain) {
    chain.validate();
    const std::uint64_t K = chain.k_star;
    if (K == 1) return {1.0};
    const double q = chain.q;
    std::vector<double> mu(K);
    mu[0] = std::pow(q, static_cast<double>(K - 1));
    for (std::uint64_t i = 2; i < K; ++i) mu[i - 1] = (1.0 - q) * std::pow(q, static_cast<double>(K - i));
    mu[K - 1] = 1.0 - q;
    return mu;
}

ChainSimulation chain_simulate(const DominatingChain& chain, std::uint64_t steps, Rng& rng) {
    chain.validate();
    ChainSimulation out;
    out.steps = steps;
    std::vector<std::uint64_t> counts(chain.k_star, 0);
    std::uint64_t y = chain.k_star;
    for (std::uint64_t t = 1; t <= steps; ++t) {
        y = chain.step(y, rng);
        ++counts[y - 1];
        if (y == 1) {
            ++out.visits_to_one;
            if (out.first_hit_one == 0) out.first_hit_one = t;
        }
    }
    out.final_state = y;
    out.occupancy.resize(chain.k_star);
    for (std::size_t i = 0; i < counts.size(); ++i)
        out.occupancy[i] = steps ? static_cast<double>(counts[i]) / static_cast<double>(steps) : 0.0;
    return out;
}

std::vector<double> chain_marginal(const DominatingChain& chain, std::uint64_t k) {
    chain.validate();
    const std::uint64_t K = chain.k_star;
    std::vector<double> p(K, 0.0), next(K);
    p[K - 1] = 1.0;
    for (std::uint64_t t = 0; t < k; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint64_t i = 0; i < K; ++i) {
            next[i > 0 ? i - 1 : 0] += chain.q * p[i];
            next[K - 1] += (1.0 - chain.q) * p[i];
        }
        p.swap(next);
    }
    return p;
}

std::vector<double> chain_replicas(const DominatingChain& chain, std::uint64_t k, std::uint64_t replicas,
                                   const Rng& rng, std::size_t threads) {
    chain.validate();
    if (replicas == 0) throw ValidationError("must be at least 1", "replicas");
    std::vector<std::uint64_t> finals(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        Rng local = rng.substream({r});
        std::uint64_t y = chain.k_star;
        for (std::uint64_t t = 0; t < k; ++t) y = chain.step(y, local);
        finals[r] = y;
    }, threads);
    std::vector<double> dist(chain.k_star, 0.0);
    for (auto y : finals) dist[y - 1] += 1.0;
    for (auto& d : dist) d /= static_cast<double>(replicas);
    return dist;
}

std::uint64_t chain_mixing_bound(const DominatingChain& chain, double delta_prime) {
    chain.validate();
    if (!(chain.q > 0.0 && chain.q < 1.0)) throw ValidationError("mixing bound needs 0 < q < 1", "q");
    if (!(delta_prime > 0.0 && delta_prime < 1.0)) throw ValidationError("must lie in (0, 1)", "delta_prime");
    const double mu_min = (1.0 - chain.q) * std::pow(chain.q, static_cast<double>(chain.k_star - 1));
    const double bound = std::log(1.0 / (delta_prime * mu_min));
    return bound <= 0.0 ? 0 : static_cast<std::uint64_t>(std::ceil(bound));
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("distributions differ in support size");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace evl::analysis
