#include "evl/analysis/policy_eval.hpp"

#include "evl/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace evl::analysis {

Policy greedy_policy(const MdpModel& model, const ValueFn& v, std::size_t m_eval) {
    if (model.expectation)
        return [model, v](const State& s, Rng&) { return greedy_policy_action_exact(model, v, s); };
    return [model, v, m_eval](const State& s, Rng& rng) { return greedy_policy_action(model, v, s, m_eval, rng); };
}

Policy random_policy(const MdpModel& model) {
    const std::size_t n = model.n_actions();
    return [n](const State&, Rng& rng) { return static_cast<Action>(rng.index(n)); };
}

std::size_t horizon_for(double gamma, double fraction) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("must lie in (0, 1)", "fraction");
    return static_cast<std::size_t>(std::ceil(std::log(fraction) / std::log(gamma)));
}

double rollout_value(const MdpModel& model, const Policy& policy, const State& s, std::size_t rollouts,
                     std::size_t horizon, const Rng& rng) {
    if (rollouts == 0) throw ValidationError("must be at least 1", "rollouts");
    std::vector<double> totals(rollouts, 0.0);
    parallel_for(rollouts, [&](std::size_t r) {
        Rng local = rng.substream({r});
        State x = s;
        double discount = 1.0, total = 0.0;
        for (std::size_t t = 0; t < horizon; ++t) {
            const Action a = policy(x, local);
            total += discount * model.cost(x, a);
            x = model.sample_next(x, a, local);
            discount *= model.gamma;
        }
        totals[r] = total;
    });
    double sum = 0.0;
    for (double t : totals) sum += t;
    return sum / static_cast<double>(rollouts);
}

PolicyErrorReport policy_relative_error(const MdpModel& model, const ValueFn& v, const ValueFn& oracle,
                                        const std::vector<State>& eval_states, std::size_t rollouts,
                                        std::size_t horizon, const Rng& rng, std::size_t m_eval) {
    if (eval_states.empty()) throw ValidationError("evaluation grid is empty", "eval_states");
    const Policy pi = greedy_policy(model, v, m_eval);
    PolicyErrorReport rep;
    rep.truncation_bias = std::pow(model.gamma, static_cast<double>(horizon)) * model.v_max();
    rep.estimates.resize(eval_states.size());
    for (std::size_t i = 0; i < eval_states.size(); ++i) {
        const double vp = rollout_value(model, pi, eval_states[i], rollouts, horizon, rng.substream({i}));
        rep.estimates[i] = vp;
        const double ref = oracle(eval_states[i]);
        if (std::abs(ref) < 1e-6) {
            ++rep.skipped;
            continue;
        }
        rep.relative_error = std::max(rep.relative_error, std::abs(ref - vp) / std::abs(ref));
    }
    return rep;
}

std::vector<double> episode_lengths(const MdpModel& model, const Policy& policy, const StateSampler& start,
                                    std::size_t episodes, std::size_t max_steps, const Rng& rng) {
    if (!model.terminal) throw UnsupportedOperation("model '" + model.name + "' has no terminal predicate");
    std::vector<double> lengths(episodes, 0.0);
    parallel_for(episodes, [&](std::size_t e) {
        Rng local = rng.substream({e});
        State x = start(local);
        std::size_t t = 0;
        while (t < max_steps) {
            x = model.sample_next(x, policy(x, local), local);
            if (model.terminal(x)) break;
            ++t;
        }
        lengths[e] = static_cast<double>(t);
    });
    return lengths;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace evl::analysis
