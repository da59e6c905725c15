#pragma once

#include "evl/box_lsq.hpp"
#include "evl/features.hpp"
#include "evl/mdp.hpp"
#include "evl/value_fn.hpp"

#include <optional>
#include <vector>

namespace evl {

struct FitDiagnostics {
    std::size_t iterations = 0;
    /// Box-LS projected-gradient residual (rpbf only).
    double kkt_residual = 0.0;
    /// |A x - b| / |b| of the linear system solved (rkhs, polynomial).
    double relative_residual = 0.0;
    double condition_estimate = 0.0;
    std::size_t active_constraints = 0;
    bool ridge_fallback = false;
};

struct FitResult {
    ValueFn fn;
    FitDiagnostics diagnostics;
};

/// j iid draws theta_1..theta_j from the family's sampling law.
std::vector<FeatureParam> sample_rpbf_basis(const RpbfFamily& family, std::size_t state_dim, std::size_t j,
                                            Rng& rng);

/// N x J matrix Phi(n, j) = phi(s_n; theta_j).
Eigen::MatrixXd feature_matrix(const RpbfFamily& family, const std::vector<FeatureParam>& params,
                               const std::vector<State>& states);

/// N x N Gram matrix; throws NumericError naming the pair on a non-finite entry.
Eigen::MatrixXd kernel_gram(const Kernel& kernel, const std::vector<State>& states);

/// Box-constrained least squares with |alpha_j| <= c_bound / J.
FitResult fit_rpbf(const RpbfFamily& family, std::vector<FeatureParam> params, const SampledBackup& data,
                   std::optional<double> clamp, const BoxLsqOptions& options = {});

/// Solves (K + lambda N I) alpha = v~ by Cholesky; centers are the sampled states.
FitResult fit_rkhs(const RkhsSpec& spec, const SampledBackup& data, std::optional<double> clamp);

/// Least squares on monomials up to total degree, on states rescaled to [-1, 1] by the data
/// range. Falls back to a 1e-8 ridge when the design is rank deficient.
FitResult fit_polynomial(int degree, const SampledBackup& data, std::optional<double> clamp);

}  // namespace evl
