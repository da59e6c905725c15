#include "evl/mdp.hpp"

#include "evl/parallel.hpp"

#include <cmath>

namespace evl {

void MdpModel::validate(bool allow_zero_gamma) const {
    if (state_dim == 0) throw ValidationError("state_dim must be positive", "state_dim");
    if (bounds.size() != state_dim) throw ValidationError("bounds must have one interval per dimension", "bounds");
    for (const auto& b : bounds)
        if (!(b.hi >= b.lo)) throw ValidationError("state bound with hi < lo", "bounds");
    if (actions.empty()) throw ValidationError("at least one action is required", "actions");
    if (!cost || !sample_next) throw ValidationError("cost and next-state sampler are required");
    const bool gamma_ok = allow_zero_gamma ? (gamma >= 0.0 && gamma < 1.0) : (gamma > 0.0 && gamma < 1.0);
    if (!gamma_ok) throw ValidationError("gamma must lie in (0, 1)", "gamma");
    if (!(c_max > 0.0) || !std::isfinite(c_max)) throw ValidationError("c_max must be positive", "c_max");
}

bool MdpModel::contains(const State& s) const {
    if (static_cast<std::size_t>(s.size()) != state_dim) return false;
    for (std::size_t i = 0; i < state_dim; ++i)
        if (!bounds[i].contains(s[static_cast<Eigen::Index>(i)])) return false;
    return true;
}

State MdpModel::clamp(const State& s) const {
    State out = s;
    for (std::size_t i = 0; i < state_dim; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out[k] = bounds[i].clamp(s[k]);
    }
    return out;
}

namespace {

double checked_cost(const MdpModel& model, const State& s, Action a) {
    const double c = model.cost(s, a);
    if (!std::isfinite(c) || std::abs(c) > model.c_max * (1.0 + 1e-12))
        throw NumericError("cost " + std::to_string(c) + " exceeds c_max at state " + format_state(s) +
                           " action " + model.actions[a]);
    return c;
}

}  // namespace

std::vector<double> empirical_q_values(const MdpModel& model, const ValueFn& v, const State& s,
                                       std::size_t m, Rng& rng) {
    if (m == 0) throw ValidationError("m must be at least 1", "m");
    const std::uint64_t key = rng.next_u64();
    std::vector<double> q(model.n_actions());
    for (Action a = 0; a < model.n_actions(); ++a) {
        Rng stream(derive_seed(key, {a}));
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += v(model.sample_next(s, a, stream));
        q[a] = checked_cost(model, s, a) + model.gamma * sum / static_cast<double>(m);
        if (!std::isfinite(q[a])) throw NumericError("non-finite backup at state " + format_state(s));
    }
    return q;
}

double empirical_bellman_backup(const MdpModel& model, const ValueFn& v, const State& s,
                                std::size_t m, Rng& rng) {
    const auto q = empirical_q_values(model, v, s, m, rng);
    double best = q[0];
    for (std::size_t a = 1; a < q.size(); ++a) best = std::min(best, q[a]);
    return best;
}

std::vector<double> exact_bellman_grid(const MdpModel& model, const ValueFn& v,
                                       const std::vector<State>& grid,
                                       std::optional<std::size_t> fallback_m, std::uint64_t fallback_seed) {
    if (!model.expectation) {
        if (!fallback_m) throw UnsupportedOperation("model '" + model.name + "' exposes no transition density and no Monte Carlo fallback was declared");
        if (*fallback_m < 100000) throw ValidationError("Monte Carlo fallback needs at least 1e5 draws", "fallback_m");
    }
    const auto fn = [&v](const State& x) { return v(x); };
    std::vector<double> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const State& s = grid[i];
        double best = 0.0;
        if (model.expectation) {
            for (Action a = 0; a < model.n_actions(); ++a) {
                const double q = checked_cost(model, s, a) + model.gamma * model.expectation(s, a, fn);
                if (a == 0 || q < best) best = q;
            }
        } else {
            Rng rng(derive_seed(fallback_seed, {i}));
            best = empirical_bellman_backup(model, v, s, *fallback_m, rng);
        }
        out[i] = best;
    });
    return out;
}

StateSampler uniform_box_sampler(Bounds box) {
    return [box = std::move(box)](Rng& rng) {
        State s(static_cast<Eigen::Index>(box.size()));
        for (std::size_t i = 0; i < box.size(); ++i) s[static_cast<Eigen::Index>(i)] = rng.uniform(box[i].lo, box[i].hi);
        return s;
    };
}

SampledBackup sample_backups(const MdpModel& model, const ValueFn& v, const StateSampler& mu,
                             std::size_t n, std::size_t m, Rng& rng, std::size_t threads) {
    if (n == 0) throw ValidationError("n must be at least 1", "n_states");
    if (m == 0) throw ValidationError("m must be at least 1", "m_next");
    SampledBackup out;
    out.m_per_backup = m;
    out.states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.states.push_back(mu(rng));
    std::vector<std::uint64_t> keys(n);
    for (auto& k : keys) k = rng.next_u64();
    out.targets.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        Rng local(keys[i]);
        out.targets[i] = empirical_bellman_backup(model, v, out.states[i], m, local);
    }, threads);
    return out;
}

Action greedy_policy_action(const MdpModel& model, const ValueFn& v, const State& s,
                            std::size_t m_eval, Rng& rng) {
    const auto q = empirical_q_values(model, v, s, m_eval, rng);
    Action best = 0;
    for (Action a = 1; a < q.size(); ++a)
        if (q[a] < q[best]) best = a;
    return best;
}

Action greedy_policy_action_exact(const MdpModel& model, const ValueFn& v, const State& s) {
    if (!model.expectation) throw UnsupportedOperation("model '" + model.name + "' exposes no transition density");
    const auto fn = [&v](const State& x) { return v(x); };
    Action best = 0;
    double best_q = 0.0;
    for (Action a = 0; a < model.n_actions(); ++a) {
        const double q = checked_cost(model, s, a) + model.gamma * model.expectation(s, a, fn);
        if (a == 0 || q < best_q) {
            best = a;
            best_q = q;
        }
    }
    return best;
}

}  // namespace evl
