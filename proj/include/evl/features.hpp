#pragma once

#include "evl/common.hpp"
#include "evl/rng.hpp"

#include <string>
#include <vector>

namespace evl {

enum class FeatureKind { fourier, sign };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

/// One random parameter draw theta for a ridge feature
/// phi(s; theta) = act(<omega, scale .* s> + offset).
/// Fourier: act = cos, theta = (omega, b). Sign: act = sign, omega = e_k, offset = -t.
struct FeatureParam {
    Eigen::VectorXd omega;
    double offset = 0.0;
};

/// A family of bounded random features together with its sampling law nu
/// and the weight box constant C (weights satisfy |alpha_j| <= C / J).
struct RpbfFamily {
    FeatureKind kind = FeatureKind::fourier;
    /// Fourier: omega ~ Normal(0, omega_variance * I).
    double omega_variance = 1.0;
    /// Sign: t ~ Uniform[-threshold_range, threshold_range].
    double threshold_range = 1.0;
    /// Per-coordinate multiplier applied to the state before the projection; empty means
    /// all ones and a zero entry removes that coordinate from the features.
    Eigen::VectorXd input_scale;
    double c_bound = 1000.0;

    double feature(const State& s, const FeatureParam& theta) const;
    FeatureParam sample(std::size_t state_dim, Rng& rng) const;
    void validate(std::size_t state_dim) const;
};

enum class KernelKind { gaussian, laplacian };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Gaussian: exp(-0.5 * inv_sigma2 * |x - y|^2). Laplacian: exp(-rate * |x - y|_1).
struct Kernel {
    KernelKind kind = KernelKind::gaussian;
    double param = 1.0;

    double operator()(const State& x, const State& y) const;
    /// sup_s sqrt(K(s, s)); both built-in kernels have K(s, s) = 1.
    double kappa() const { return 1.0; }
};

struct RkhsSpec {
    Kernel kernel;
    double lambda = 1e-2;

    void validate() const;
};

}  // namespace evl
