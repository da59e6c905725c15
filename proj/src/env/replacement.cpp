#include "evl/env/replacement.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace evl::env {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

}  // namespace

void ReplacementParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
    if (!(lambda_rate > 0.0)) throw ValidationError("must be positive", "lambda_rate");
    if (!(replace_cost > 0.0)) throw ValidationError("must be positive", "replace_cost");
    if (!(maint_coeff > 0.0)) throw ValidationError("must be positive", "maint_coeff");
    if (!(s_max > 0.0)) throw ValidationError("must be positive", "s_max");
    if (quadrature_panels < 1) throw ValidationError("must be at least 1", "quadrature_panels");
}

MdpModel replacement_model(const ReplacementParams& p) {
    p.validate();
    MdpModel m;
    m.name = "replacement";
    m.state_dim = 1;
    m.bounds = {Interval{0.0, p.s_max}};
    m.actions = {"replace", "keep"};
    m.gamma = p.gamma;
    m.c_max = std::max(p.replace_cost, p.maint_coeff * p.s_max);
    m.cost = [p](const State& s, Action a) {
        return a == kReplace ? p.replace_cost : p.maint_coeff * s[0];
    };
    m.sample_next = [p](const State& s, Action a, Rng& rng) {
        const double base = a == kReplace ? 0.0 : s[0];
        State next(1);
        next[0] = std::min(base + rng.exponential(p.lambda_rate), p.s_max);
        return next;
    };
    m.expectation = [p](const State& s, Action a, const std::function<double(const State&)>& f) {
        const double base = a == kReplace ? 0.0 : std::clamp(s[0], 0.0, p.s_max);
        const double span = p.s_max - base;
        State x(1);
        x[0] = p.s_max;
        double acc = std::exp(-p.lambda_rate * span) * f(x);
        if (span <= 0.0) return acc;
        const double width = span / static_cast<double>(p.quadrature_panels);
        for (std::size_t k = 0; k < p.quadrature_panels; ++k) {
            const double mid = (static_cast<double>(k) + 0.5) * width;
            for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                const double u = mid + 0.5 * width * kGlNodes[q];
                x[0] = base + u;
                acc += 0.5 * width * kGlWeights[q] * p.lambda_rate * std::exp(-p.lambda_rate * u) * f(x);
            }
        }
        return acc;
    };
    return m;
}

ReplacementOracle::ReplacementOracle(const ReplacementParams& params, std::size_t grid_n, double tol)
    : params_(params) {
    params_.validate();
    if (grid_n < 100) throw ValidationError("oracle grid needs at least 100 nodes", "grid_n");
    if (!(tol > 0.0)) throw ValidationError("must be positive", "tol");
    nodes_.resize(grid_n);
    h_ = params_.s_max / static_cast<double>(grid_n - 1);
    for (std::size_t i = 0; i < grid_n; ++i) nodes_[i] = h_ * static_cast<double>(i);
    nodes_.back() = params_.s_max;

    // Exact integrals of lambda e^{-lambda u} against the two hat functions on [0, h].
    const double lam = params_.lambda_rate;
    decay_ = std::exp(-lam * h_);
    const double e0 = -std::expm1(-lam * h_);
    const double e1 = (e0 - lam * h_ * decay_) / lam;
    w_right_ = e1 / h_;
    w_left_ = e0 - w_right_;

    const double stop = tol * (1.0 - params_.gamma) / params_.gamma;
    std::vector<double> v(grid_n, 0.0);
    for (sweeps_ = 1; sweeps_ <= 10000; ++sweeps_) {
        std::vector<double> next = bellman(v, &policy_);
        double change = 0.0;
        for (std::size_t i = 0; i < grid_n; ++i) change = std::max(change, std::abs(next[i] - v[i]));
        v = std::move(next);
        if (change <= stop) break;
    }
    if (sweeps_ > 10000) throw NumericError("replacement oracle did not converge within 10000 sweeps");
    values_ = std::move(v);
    bellman(values_, &policy_);
}

std::vector<double> ReplacementOracle::keep_expectations(const std::vector<double>& f) const {
    const std::size_t n = nodes_.size();
    if (f.size() != n) throw ValidationError("node vector length mismatch");
    std::vector<double> e(n);
    e[n - 1] = f[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) e[i] = w_left_ * f[i] + w_right_ * f[i + 1] + decay_ * e[i + 1];
    return e;
}

std::vector<double> ReplacementOracle::bellman(const std::vector<double>& f, std::vector<Action>* greedy) const {
    const std::vector<double> e = keep_expectations(f);
    const double g = params_.gamma;
    const double replace_q = params_.replace_cost + g * e[0];
    std::vector<double> out(nodes_.size());
    if (greedy) greedy->assign(nodes_.size(), kKeep);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const double keep_q = params_.maint_coeff * nodes_[i] + g * e[i];
        // Replace has the lower index and wins ties.
        if (replace_q <= keep_q) {
            out[i] = replace_q;
            if (greedy) (*greedy)[i] = kReplace;
        } else {
            out[i] = keep_q;
        }
    }
    return out;
}

std::vector<double> ReplacementOracle::evaluate_policy(const std::vector<Action>& policy) const {
    const std::size_t n = nodes_.size();
    if (policy.size() != n) throw ValidationError("policy length mismatch");
    const double g = params_.gamma;
    // Every value is affine in z = E[V(next) | replace]; carry V_i = a_i + b_i z and the
    // keep expectation E_i = ea_i + eb_i z backwards from the last node.
    std::vector<double> va(n), vb(n);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        double ra = 0.0, rb = 0.0;
        double wl = 1.0;  // weight of V_i in E_i; the last node carries all remaining mass
        if (i + 1 < n) {
            ra = w_right_ * va[i + 1] + decay_ * ea;
            rb = w_right_ * vb[i + 1] + decay_ * eb;
            wl = w_left_;
        }
        if (policy[i] == kKeep) {
            const double denom = 1.0 - g * wl;
            va[i] = (params_.maint_coeff * nodes_[i] + g * ra) / denom;
            vb[i] = g * rb / denom;
        } else {
            va[i] = params_.replace_cost;
            vb[i] = g;
        }
        ea = wl * va[i] + ra;
        eb = wl * vb[i] + rb;
    }
    const double z = ea / (1.0 - eb);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = va[i] + vb[i] * z;
    return v;
}

std::vector<double> ReplacementOracle::greedy_policy_values(const ValueFn& v, const std::vector<State>& states) const {
    std::vector<double> f(nodes_.size());
    State x(1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        x[0] = nodes_[i];
        f[i] = v(x);
    }
    std::vector<Action> pi;
    bellman(f, &pi);
    const std::vector<double> pv = evaluate_policy(pi);
    const ValueFn vp(GridBasis{0.0, params_.s_max, nodes_.size()},
                     Eigen::Map<const Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size())));
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(vp(s));
    return out;
}

ValueFn ReplacementOracle::value_fn() const {
    return ValueFn(GridBasis{0.0, params_.s_max, nodes_.size()},
                   Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size())));
}

double ReplacementOracle::threshold() const {
    for (std::size_t i = 0; i < policy_.size(); ++i)
        if (policy_[i] == kReplace) return nodes_[i];
    return params_.s_max;
}

}  // namespace evl::env
