#include "evl/features.hpp"

#include <cmath>
#include <numbers>

namespace evl {

std::string to_string(FeatureKind kind) { return kind == FeatureKind::fourier ? "fourier" : "sign"; }

FeatureKind feature_kind_from_string(const std::string& name) {
    if (name == "fourier") return FeatureKind::fourier;
    if (name == "sign") return FeatureKind::sign;
    throw ValidationError("unknown feature family '" + name + "' (expected fourier or sign)");
}

double RpbfFamily::feature(const State& s, const FeatureParam& theta) const {
    double z = theta.offset;
    if (input_scale.size() == 0) {
        z += theta.omega.dot(s);
    } else {
        z += theta.omega.dot(input_scale.cwiseProduct(s));
    }
    if (kind == FeatureKind::fourier) return std::cos(z);
    return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
}

FeatureParam RpbfFamily::sample(std::size_t state_dim, Rng& rng) const {
    FeatureParam theta;
    theta.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state_dim));
    if (kind == FeatureKind::fourier) {
        const double sd = std::sqrt(omega_variance);
        for (Eigen::Index i = 0; i < theta.omega.size(); ++i) theta.omega[i] = rng.normal(0.0, sd);
        theta.offset = rng.uniform(-std::numbers::pi, std::numbers::pi);
    } else {
        const auto k = static_cast<Eigen::Index>(rng.index(state_dim));
        theta.omega[k] = 1.0;
        theta.offset = -rng.uniform(-threshold_range, threshold_range);
    }
    return theta;
}

void RpbfFamily::validate(std::size_t state_dim) const {
    if (kind == FeatureKind::fourier && !(omega_variance > 0.0))
        throw ValidationError("omega_variance must be positive", "omega_variance");
    if (kind == FeatureKind::sign && !(threshold_range > 0.0))
        throw ValidationError("threshold_range must be positive", "threshold_range");
    if (!(c_bound > 0.0)) throw ValidationError("c_bound must be positive", "c_bound");
    if (input_scale.size() != 0 && static_cast<std::size_t>(input_scale.size()) != state_dim)
        throw ValidationError("input_scale length must equal the state dimension", "input_scale");
}

std::string to_string(KernelKind kind) { return kind == KernelKind::gaussian ? "gaussian" : "laplacian"; }

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "gaussian") return KernelKind::gaussian;
    if (name == "laplacian") return KernelKind::laplacian;
    throw ValidationError("unknown kernel '" + name + "' (expected gaussian or laplacian)");
}

double Kernel::operator()(const State& x, const State& y) const {
    if (kind == KernelKind::gaussian) return std::exp(-0.5 * param * (x - y).squaredNorm());
    return std::exp(-param * (x - y).lpNorm<1>());
}

void RkhsSpec::validate() const {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive", "lambda");
    if (!(kernel.param > 0.0)) throw ValidationError("kernel parameter must be positive", "kernel");
}

}  // namespace evl
