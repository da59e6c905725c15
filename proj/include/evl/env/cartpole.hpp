#pragma once

#include "evl/mdp.hpp"

namespace evl::env {

/// Inverted pendulum on a cart. State (x, x_dot, theta, theta_dot); actions push left or
/// right with force_mag scaled by (1 + U[-noise_frac, noise_frac]). Cost 1 in failure
/// states, which are absorbing.
struct CartPoleParams {
    double m_c = 1.0;
    double m_p = 0.1;
    /// Pole half-length.
    double l = 0.5;
    double g = 9.8;
    double tau = 0.02;
    double force_mag = 10.0;
    double noise_frac = 0.5;
    double fail_x = 2.4;
    double fail_theta = 12.0 * 3.14159265358979323846 / 180.0;
    double gamma = 0.95;
    /// Declared velocity bounds; sampled next states are clipped to them.
    double max_x_dot = 10.0;
    double max_theta_dot = 10.0;

    void validate() const;
};

inline constexpr Action kPushLeft = 0;
inline constexpr Action kPushRight = 1;

struct CartPoleAccel {
    double x_ddot = 0.0;
    double theta_ddot = 0.0;
};

/// Pole and cart accelerations under applied force f.
CartPoleAccel cartpole_accelerations(const CartPoleParams& p, const State& s, double force);
/// One Euler step under force f without clipping.
State cartpole_euler_step(const CartPoleParams& p, const State& s, double force);
bool cartpole_failed(const CartPoleParams& p, const State& s);

MdpModel cartpole_model(const CartPoleParams& params = {});

}  // namespace evl::env
