#include "evl/fitting.hpp"

#include <cmath>
#include <limits>

namespace evl {

namespace {

void check_data(const SampledBackup& data) {
    if (data.states.empty()) throw ValidationError("fit requires at least one sample");
    if (data.states.size() != data.targets.size()) throw ValidationError("states and targets differ in length");
    for (std::size_t i = 0; i < data.targets.size(); ++i)
        if (!std::isfinite(data.targets[i]))
            throw NumericError("non-finite target at state " + format_state(data.states[i]));
}

Eigen::VectorXd target_vector(const SampledBackup& data) {
    return Eigen::Map<const Eigen::VectorXd>(data.targets.data(), static_cast<Eigen::Index>(data.targets.size()));
}

}  // namespace

std::vector<FeatureParam> sample_rpbf_basis(const RpbfFamily& family, std::size_t state_dim, std::size_t j,
                                            Rng& rng) {
    if (j == 0) throw ValidationError("J must be at least 1", "j_features");
    family.validate(state_dim);
    std::vector<FeatureParam> params;
    params.reserve(j);
    for (std::size_t i = 0; i < j; ++i) params.push_back(family.sample(state_dim, rng));
    return params;
}

Eigen::MatrixXd feature_matrix(const RpbfFamily& family, const std::vector<FeatureParam>& params,
                               const std::vector<State>& states) {
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(params.size()));
    for (std::size_t n = 0; n < states.size(); ++n)
        for (std::size_t j = 0; j < params.size(); ++j)
            phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = family.feature(states[n], params[j]);
    return phi;
}

Eigen::MatrixXd kernel_gram(const Kernel& kernel, const std::vector<State>& states) {
    const auto n = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double k = kernel(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
            if (!std::isfinite(k))
                throw NumericError("non-finite kernel value at (" + std::to_string(i) + ", " + std::to_string(j) +
                                   ") for states " + format_state(states[static_cast<std::size_t>(i)]) + " and " +
                                   format_state(states[static_cast<std::size_t>(j)]));
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

FitResult fit_rpbf(const RpbfFamily& family, std::vector<FeatureParam> params, const SampledBackup& data,
                   std::optional<double> clamp, const BoxLsqOptions& options) {
    check_data(data);
    if (params.empty()) throw ValidationError("J must be at least 1", "j_features");
    const Eigen::MatrixXd phi = feature_matrix(family, params, data.states);
    const double bound = family.c_bound / static_cast<double>(params.size());
    const BoxLsqResult sol = box_lsq(phi, target_vector(data), bound, options);

    FitDiagnostics diag;
    diag.iterations = sol.iterations;
    diag.kkt_residual = sol.kkt_residual;
    diag.condition_estimate = sol.condition;
    diag.active_constraints = sol.active_constraints;
    const double bnorm = target_vector(data).norm();
    diag.relative_residual = bnorm > 0.0 ? std::sqrt(sol.objective * static_cast<double>(data.size())) / bnorm : 0.0;
    return {ValueFn(RpbfBasis{family, std::move(params)}, sol.x, clamp), diag};
}

FitResult fit_rkhs(const RkhsSpec& spec, const SampledBackup& data, std::optional<double> clamp) {
    check_data(data);
    spec.validate();
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd A = kernel_gram(spec.kernel, data.states);
    A.diagonal().array() += spec.lambda * static_cast<double>(n);
    const Eigen::VectorXd b = target_vector(data);
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw NumericError("Cholesky factorization of the regularized Gram matrix failed");
    const Eigen::VectorXd alpha = llt.solve(b);
    if (!alpha.allFinite()) throw NumericError("non-finite RKHS weights");

    FitDiagnostics diag;
    const double bnorm = b.norm();
    diag.relative_residual = bnorm > 0.0 ? (A * alpha - b).norm() / bnorm : (A * alpha).norm();
    const double rcond = llt.rcond();
    diag.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    return {ValueFn(RkhsBasis{spec.kernel, data.states}, alpha, clamp), diag};
}

FitResult fit_polynomial(int degree, const SampledBackup& data, std::optional<double> clamp) {
    check_data(data);
    if (degree < 0) throw ValidationError("degree must be nonnegative", "degree");
    const auto dim = static_cast<Eigen::Index>(data.states.front().size());

    PolynomialBasis basis;
    basis.degree = degree;
    basis.exponents = monomial_exponents(static_cast<std::size_t>(dim), degree);
    Eigen::VectorXd lo = data.states.front(), hi = data.states.front();
    for (const auto& s : data.states) {
        lo = lo.cwiseMin(s);
        hi = hi.cwiseMax(s);
    }
    basis.center = 0.5 * (lo + hi);
    basis.scale = Eigen::VectorXd::Ones(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        if (hi[i] > lo[i]) basis.scale[i] = 2.0 / (hi[i] - lo[i]);

    const auto n = static_cast<Eigen::Index>(data.size());
    const auto terms = static_cast<Eigen::Index>(basis.exponents.size());
    Eigen::MatrixXd X(n, terms);
    {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(terms);
        for (Eigen::Index t = 0; t < terms; ++t) {
            unit.setZero();
            unit[t] = 1.0;
            const ValueFn mono(basis, unit);
            for (Eigen::Index r = 0; r < n; ++r) X(r, t) = mono.raw(data.states[static_cast<std::size_t>(r)]);
        }
    }
    const Eigen::VectorXd b = target_vector(data);

    FitDiagnostics diag;
    Eigen::VectorXd w;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() == terms) {
        w = qr.solve(b);
    } else {
        const double inv_n = 1.0 / static_cast<double>(n);
        Eigen::MatrixXd G = inv_n * (X.transpose() * X);
        G.diagonal().array() += 1e-8;
        w = G.ldlt().solve(inv_n * (X.transpose() * b));
        diag.ridge_fallback = true;
    }
    if (!w.allFinite()) throw NumericError("non-finite polynomial coefficients");
    const double bnorm = b.norm();
    diag.relative_residual = bnorm > 0.0 ? (X * w - b).norm() / bnorm : (X * w).norm();
    const double rd = std::abs(qr.maxPivot());
    diag.condition_estimate = qr.rank() == terms && qr.matrixQR().diagonal().cwiseAbs().minCoeff() > 0.0
                                  ? rd / qr.matrixQR().diagonal().cwiseAbs().minCoeff()
                                  : std::numeric_limits<double>::infinity();
    return {ValueFn(std::move(basis), w, clamp), diag};
}

}  // namespace evl
