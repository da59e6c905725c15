#include "evl/env/cartpole.hpp"

#include <cmath>

namespace evl::env {

void CartPoleParams::validate() const {
    for (const auto& [name, value] : {std::pair{"m_c", m_c}, {"m_p", m_p}, {"l", l}, {"g", g}, {"tau", tau},
                                      {"force_mag", force_mag}, {"fail_x", fail_x}, {"fail_theta", fail_theta},
                                      {"max_x_dot", max_x_dot}, {"max_theta_dot", max_theta_dot}})
        if (!(value > 0.0)) throw ValidationError("must be positive", name);
    if (!(noise_frac >= 0.0 && noise_frac <= 1.0)) throw ValidationError("must lie in [0, 1]", "noise_frac");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
}

CartPoleAccel cartpole_accelerations(const CartPoleParams& p, const State& s, double force) {
    const double theta = s[2], theta_dot = s[3];
    const double total = p.m_c + p.m_p;
    const double ct = std::cos(theta), st = std::sin(theta);
    CartPoleAccel a;
    a.theta_ddot = (p.g * st + ct * ((-force - p.m_p * p.l * theta_dot * theta_dot * st) / total)) /
                   (p.l * (4.0 / 3.0 - p.m_p * ct * ct / total));
    a.x_ddot = (force + p.m_p * p.l * (theta_dot * theta_dot * st - a.theta_ddot * ct)) / total;
    return a;
}

State cartpole_euler_step(const CartPoleParams& p, const State& s, double force) {
    const CartPoleAccel a = cartpole_accelerations(p, s, force);
    State next(4);
    next[0] = s[0] + p.tau * s[1];
    next[1] = s[1] + p.tau * a.x_ddot;
    next[2] = s[2] + p.tau * s[3];
    next[3] = s[3] + p.tau * a.theta_ddot;
    return next;
}

bool cartpole_failed(const CartPoleParams& p, const State& s) {
    return std::abs(s[0]) > p.fail_x || std::abs(s[2]) > p.fail_theta;
}

MdpModel cartpole_model(const CartPoleParams& p) {
    p.validate();
    MdpModel m;
    m.name = "cartpole";
    m.state_dim = 4;
    // The position and angle bounds leave room for states just past failure.
    m.bounds = {Interval{-2.0 * p.fail_x, 2.0 * p.fail_x}, Interval{-p.max_x_dot, p.max_x_dot},
                Interval{-2.0 * p.fail_theta, 2.0 * p.fail_theta}, Interval{-p.max_theta_dot, p.max_theta_dot}};
    m.actions = {"left", "right"};
    m.gamma = p.gamma;
    m.c_max = 1.0;
    m.cost = [p](const State& s, Action) { return cartpole_failed(p, s) ? 1.0 : 0.0; };
    m.terminal = [p](const State& s) { return cartpole_failed(p, s); };
    const Bounds bounds = m.bounds;
    m.sample_next = [p, bounds](const State& s, Action a, Rng& rng) {
        if (cartpole_failed(p, s)) return State(s);
        const double sign = a == kPushRight ? 1.0 : -1.0;
        const double force = sign * p.force_mag * (1.0 + rng.uniform(-p.noise_frac, p.noise_frac));
        State next = cartpole_euler_step(p, s, force);
        for (std::size_t i = 0; i < 4; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            next[k] = bounds[i].clamp(next[k]);
        }
        return next;
    };
    return m;
}

}  // namespace evl::env
