#include "evl/env/acrobot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evl::env {

void AcrobotParams::validate() const {
    for (const auto& [name, value] :
         {std::pair{"link_length_1", link_length_1}, {"link_length_2", link_length_2}, {"link_mass_1", link_mass_1},
          {"link_mass_2", link_mass_2}, {"link_com_1", link_com_1}, {"link_com_2", link_com_2},
          {"link_moi", link_moi}, {"g", g}, {"max_vel_1", max_vel_1}, {"max_vel_2", max_vel_2}, {"dt", dt}})
        if (!(value > 0.0)) throw ValidationError("must be positive", name);
    if (substeps < 1) throw ValidationError("must be at least 1", "substeps");
    if (!(torque_noise >= 0.0)) throw ValidationError("must be nonnegative", "torque_noise");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
}

AcrobotCoords acrobot_derivative(const AcrobotParams& p, const AcrobotCoords& c, double torque) {
    const double m1 = p.link_mass_1, m2 = p.link_mass_2;
    const double l1 = p.link_length_1, lc1 = p.link_com_1, lc2 = p.link_com_2;
    const double i1 = p.link_moi, i2 = p.link_moi;
    const auto [t1, t2, d_t1, d_t2] = c;
    const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
    const double phi2 = m2 * lc2 * p.g * std::cos(t1 + t2 - std::numbers::pi / 2.0);
    const double phi1 = -m2 * l1 * lc2 * d_t2 * d_t2 * std::sin(t2) - 2.0 * m2 * l1 * lc2 * d_t2 * d_t1 * std::sin(t2) +
                        (m1 * lc1 + m2 * l1) * p.g * std::cos(t1 - std::numbers::pi / 2.0) + phi2;
    const double dd_t2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * d_t1 * d_t1 * std::sin(t2) - phi2) /
                         (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    const double dd_t1 = -(d2 * dd_t2 + phi1) / d1;
    return {d_t1, d_t2, dd_t1, dd_t2};
}

AcrobotCoords acrobot_integrate(const AcrobotParams& p, const AcrobotCoords& c, double torque) {
    const double h = p.dt / static_cast<double>(p.substeps);
    auto axpy = [](const AcrobotCoords& x, double a, const AcrobotCoords& y) {
        AcrobotCoords out;
        for (std::size_t i = 0; i < 4; ++i) out[i] = x[i] + a * y[i];
        return out;
    };
    AcrobotCoords y = c;
    for (std::size_t step = 0; step < p.substeps; ++step) {
        const AcrobotCoords k1 = acrobot_derivative(p, y, torque);
        const AcrobotCoords k2 = acrobot_derivative(p, axpy(y, 0.5 * h, k1), torque);
        const AcrobotCoords k3 = acrobot_derivative(p, axpy(y, 0.5 * h, k2), torque);
        const AcrobotCoords k4 = acrobot_derivative(p, axpy(y, h, k3), torque);
        for (std::size_t i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

double acrobot_energy(const AcrobotParams& p, const AcrobotCoords& c) {
    const double m1 = p.link_mass_1, m2 = p.link_mass_2;
    const double l1 = p.link_length_1, lc1 = p.link_com_1, lc2 = p.link_com_2;
    const double i1 = p.link_moi, i2 = p.link_moi;
    const auto [t1, t2, d_t1, d_t2] = c;
    // Mass matrix entries of the two-link pendulum.
    const double m11 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
    const double m12 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
    const double m22 = m2 * lc2 * lc2 + i2;
    const double kinetic = 0.5 * (m11 * d_t1 * d_t1 + 2.0 * m12 * d_t1 * d_t2 + m22 * d_t2 * d_t2);
    const double y1 = -lc1 * std::cos(t1);
    const double y2 = -l1 * std::cos(t1) - lc2 * std::cos(t1 + t2);
    return kinetic + p.g * (m1 * y1 + m2 * y2);
}

State acrobot_observation(const AcrobotCoords& c) {
    State obs(6);
    obs << std::cos(c[0]), std::sin(c[0]), std::cos(c[1]), std::sin(c[1]), c[2], c[3];
    return obs;
}

AcrobotCoords acrobot_coords(const State& obs) {
    return {std::atan2(obs[1], obs[0]), std::atan2(obs[3], obs[2]), obs[4], obs[5]};
}

bool acrobot_goal(const AcrobotParams& p, const State& obs) {
    // -cos t1 - cos(t1 + t2) with cos(t1 + t2) = cos t1 cos t2 - sin t1 sin t2, scaled by link lengths.
    const double height = -p.link_length_1 * obs[0] - p.link_length_2 * (obs[0] * obs[2] - obs[1] * obs[3]);
    return height > p.link_length_1;
}

MdpModel acrobot_model(const AcrobotParams& p) {
    p.validate();
    MdpModel m;
    m.name = "acrobot";
    m.state_dim = 6;
    m.bounds = {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0},
                Interval{-1.0, 1.0}, Interval{-p.max_vel_1, p.max_vel_1}, Interval{-p.max_vel_2, p.max_vel_2}};
    m.actions = {"torque-", "torque0", "torque+"};
    m.gamma = p.gamma;
    m.c_max = 1.0;
    // Reward 1 at the goal, negated; the goal is absorbing.
    m.cost = [p](const State& s, Action) { return acrobot_goal(p, s) ? -1.0 : 0.0; };
    m.terminal = [p](const State& s) { return acrobot_goal(p, s); };
    m.sample_next = [p](const State& s, Action a, Rng& rng) {
        if (acrobot_goal(p, s)) return State(s);
        double torque = p.torques[a];
        if (p.torque_noise > 0.0) torque += rng.uniform(-p.torque_noise, p.torque_noise);
        AcrobotCoords c = acrobot_integrate(p, acrobot_coords(s), torque);
        c[2] = std::clamp(c[2], -p.max_vel_1, p.max_vel_1);
        c[3] = std::clamp(c[3], -p.max_vel_2, p.max_vel_2);
        return acrobot_observation(c);
    };
    return m;
}

}  // namespace evl::env
