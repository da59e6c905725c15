#pragma once

#include "evl/mdp.hpp"

#include <array>

namespace evl::env {

/// Two-link pendulum actuated at the second joint. Angles are measured from hanging
/// straight down; the observation is (cos t1, sin t1, cos t2, sin t2, t1_dot, t2_dot).
struct AcrobotParams {
    double link_length_1 = 1.0;
    double link_length_2 = 1.0;
    double link_mass_1 = 1.0;
    double link_mass_2 = 1.0;
    double link_com_1 = 0.5;
    double link_com_2 = 0.5;
    double link_moi = 1.0;
    double g = 9.8;
    double max_vel_1 = 4.0 * 3.14159265358979323846;
    double max_vel_2 = 9.0 * 3.14159265358979323846;
    double dt = 0.2;
    /// RK4 substeps per transition.
    std::size_t substeps = 4;
    std::array<double, 3> torques = {-1.0, 0.0, 1.0};
    /// Torque perturbation U[-noise, noise] added to the chosen action.
    double torque_noise = 0.2;
    double gamma = 0.99;

    void validate() const;
};

/// Internal coordinates (t1, t2, t1_dot, t2_dot).
using AcrobotCoords = std::array<double, 4>;

/// Time derivative of the coordinates under the given torque.
AcrobotCoords acrobot_derivative(const AcrobotParams& p, const AcrobotCoords& c, double torque);
/// Integrates over p.dt with p.substeps RK4 steps; no angle wrapping or velocity clipping.
AcrobotCoords acrobot_integrate(const AcrobotParams& p, const AcrobotCoords& c, double torque);
/// Mechanical energy (kinetic plus potential, zero height at the pivot).
double acrobot_energy(const AcrobotParams& p, const AcrobotCoords& c);

State acrobot_observation(const AcrobotCoords& c);
AcrobotCoords acrobot_coords(const State& obs);
/// Free end at least one link length above the pivot.
bool acrobot_goal(const AcrobotParams& p, const State& obs);

MdpModel acrobot_model(const AcrobotParams& params = {});

}  // namespace evl::env
