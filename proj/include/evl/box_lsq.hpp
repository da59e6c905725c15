#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace evl {

struct BoxLsqOptions {
    /// Stop when the projected-gradient residual max_i |x_i - P(x_i - g_i)| falls below tol.
    double tol = 1e-8;
    std::size_t max_iterations = 100000;
    /// Finish with a primal active-set solve on the free coordinates.
    bool polish = true;
};

struct BoxLsqResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t active_constraints = 0;
    /// lambda_max / lambda_min of the Gram matrix; infinity when singular.
    double condition = 0.0;
};

/// minimize (1/N) |A x - b|^2 subject to |x_i| <= bound.
BoxLsqResult box_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double bound,
                     const BoxLsqOptions& options = {});

/// Same problem in Gram form: f(x) = x'Gx - 2h'x + c with G = A'A/N, h = A'b/N, c = b'b/N.
BoxLsqResult box_lsq_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double c, double bound,
                          const BoxLsqOptions& options = {});

/// Projected-gradient optimality residual of x for the Gram-form problem.
double box_lsq_kkt_residual(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double bound,
                            const Eigen::VectorXd& x);

}  // namespace evl
