#include "evl/engine.hpp"

#include <chrono>
#include <cmath>

namespace evl {

std::string to_string(FitterKind kind) {
    switch (kind) {
        case FitterKind::rpbf: return "rpbf";
        case FitterKind::rkhs: return "rkhs";
        case FitterKind::polynomial: return "polynomial";
    }
    return "unknown";
}

FitterKind fitter_kind_from_string(const std::string& name) {
    if (name == "rpbf") return FitterKind::rpbf;
    if (name == "rkhs") return FitterKind::rkhs;
    if (name == "polynomial") return FitterKind::polynomial;
    throw ValidationError("unknown fitter '" + name + "' (expected rpbf, rkhs or polynomial)", "fitter");
}

void EvlConfig::validate(const MdpModel& model) const {
    model.validate(allow_zero_gamma);
    if (n_states < 1) throw ValidationError("must be at least 1", "n_states");
    if (m_next < 1) throw ValidationError("must be at least 1", "m_next");
    if (k_iters < 1) throw ValidationError("must be at least 1", "k_iters");
    switch (fitter) {
        case FitterKind::rpbf:
            if (!j_features || *j_features < 1) throw ValidationError("rpbf requires j_features >= 1", "j_features");
            rpbf.validate(model.state_dim);
            break;
        case FitterKind::rkhs:
            if (j_features) throw ValidationError("j_features is meaningless for the rkhs fitter", "j_features");
            rkhs.validate();
            break;
        case FitterKind::polynomial:
            if (j_features) throw ValidationError("j_features is meaningless for the polynomial fitter", "j_features");
            if (poly_degree < 0) throw ValidationError("must be nonnegative", "degree");
            break;
    }
}

std::vector<double> evaluate_value_fn(const ValueFn& v, const std::vector<State>& states) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(v(s));
    return out;
}

double max_relative_error(const std::vector<double>& ref, const std::vector<double>& x, double floor) {
    if (ref.size() != x.size()) throw ValidationError("relative error: length mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (std::abs(ref[i]) < floor) continue;
        worst = std::max(worst, std::abs(ref[i] - x[i]) / std::abs(ref[i]));
    }
    return worst;
}

namespace {

void record_oracle(const MdpModel& model, const TraceOracle& oracle, const ValueFn& prev, const ValueFn& next,
                   IterationRecord& rec) {
    if (oracle.grid.empty()) return;
    const std::vector<double> vals = evaluate_value_fn(next, oracle.grid);
    std::vector<double> tv;
    if (oracle.bellman) tv = oracle.bellman(prev);
    else if (model.expectation) tv = exact_bellman_grid(model, prev, oracle.grid);
    if (!tv.empty()) {
        double sup = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double d = std::abs(vals[i] - tv[i]);
            sup = std::max(sup, d);
            sq += d * d;
        }
        rec.bellman_sup = sup;
        rec.bellman_l2 = std::sqrt(sq / static_cast<double>(vals.size()));
    }
    if (!oracle.v_star.empty()) {
        rec.rel_err_value = max_relative_error(oracle.v_star, vals);
        if (oracle.policy_values) rec.rel_err_policy = max_relative_error(oracle.v_star, oracle.policy_values(next));
    }
}

}  // namespace

EvlResult run_evl(const MdpModel& model, const EvlConfig& config, std::optional<ValueFn> v0,
                  const TraceOracle* oracle, const CheckpointFn& on_checkpoint) {
    config.validate(model);
    const StateSampler mu = config.mu ? config.mu : uniform_box_sampler(model.bounds);
    const std::optional<double> clamp = config.clamp ? std::optional<double>(model.v_max()) : std::nullopt;
    ValueFn v = v0 ? *v0 : ValueFn::zero();

    RunTrace trace;
    trace.seed = config.seed;
    trace.records.reserve(config.k_iters);
    const Rng root(config.seed);

    for (std::size_t k = 1; k <= config.k_iters; ++k) {
        const auto start = std::chrono::steady_clock::now();
        try {
            Rng sample_rng = root.substream({k, 0});
            const SampledBackup data = sample_backups(model, v, mu, config.n_states, config.m_next, sample_rng, config.threads);

            std::optional<FitResult> fit;
            switch (config.fitter) {
                case FitterKind::rpbf: {
                    Rng theta_rng = root.substream({k, 1});
                    auto params = sample_rpbf_basis(config.rpbf, model.state_dim, *config.j_features, theta_rng);
                    fit = fit_rpbf(config.rpbf, std::move(params), data, clamp, config.box);
                    break;
                }
                case FitterKind::rkhs: fit = fit_rkhs(config.rkhs, data, clamp); break;
                case FitterKind::polynomial: fit = fit_polynomial(config.poly_degree, data, clamp); break;
            }

            IterationRecord rec;
            rec.k = k;
            rec.diagnostics = fit->diagnostics;
            double l1 = 0.0, sq = 0.0, sup = 0.0;
            for (std::size_t n = 0; n < data.size(); ++n) {
                const double d = std::abs(fit->fn(data.states[n]) - data.targets[n]);
                l1 += d;
                sq += d * d;
                sup = std::max(sup, d);
            }
            const auto nn = static_cast<double>(data.size());
            rec.fit_l1 = l1 / nn;
            rec.fit_l2 = std::sqrt(sq / nn);
            rec.fit_sup = sup;
            if (oracle) record_oracle(model, *oracle, v, fit->fn, rec);

            v = std::move(fit->fn);
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            trace.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw EvlError("iteration " + std::to_string(k) + " failed: " + e.what(), trace, k);
        }
        if (on_checkpoint && config.checkpoint_every > 0 &&
            (k % config.checkpoint_every == 0 || k == config.k_iters))
            on_checkpoint(k, v);
    }
    return {std::move(v), std::move(trace)};
}

}  // namespace evl
