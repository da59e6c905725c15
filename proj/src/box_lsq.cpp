#include "evl/box_lsq.hpp"

#include "evl/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace evl {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, double bound) { return x.cwiseMax(-bound).cwiseMin(bound); }

double objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double c, const Eigen::VectorXd& x) {
    return x.dot(G * x) - 2.0 * h.dot(x) + c;
}

// Primal active-set method on the box, warm-started from a feasible x.
Eigen::VectorXd active_set_polish(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double bound,
                                  Eigen::VectorXd x) {
    const Eigen::Index n = x.size();
    // state: 0 free, +1 at upper, -1 at lower
    std::vector<int> state(static_cast<std::size_t>(n), 0);
    const Eigen::VectorXd g0 = 2.0 * (G * x - h);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (x[i] >= bound && g0[i] <= 0.0) state[static_cast<std::size_t>(i)] = 1;
        else if (x[i] <= -bound && g0[i] >= 0.0) state[static_cast<std::size_t>(i)] = -1;
    }
    for (int round = 0; round < 4 * static_cast<int>(n) + 8; ++round) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int st = state[static_cast<std::size_t>(i)];
            if (st == 0) free.push_back(i);
            else x[i] = st * bound;
        }
        Eigen::VectorXd target = x;
        if (!free.empty()) {
            const auto nf = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd Gff(nf, nf);
            Eigen::VectorXd rhs(nf);
            for (Eigen::Index r = 0; r < nf; ++r) {
                rhs[r] = h[free[static_cast<std::size_t>(r)]];
                for (Eigen::Index i = 0; i < n; ++i)
                    if (state[static_cast<std::size_t>(i)] != 0) rhs[r] -= G(free[static_cast<std::size_t>(r)], i) * x[i];
                for (Eigen::Index q = 0; q < nf; ++q)
                    Gff(r, q) = G(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(q)]);
            }
            const Eigen::VectorXd y = Gff.completeOrthogonalDecomposition().solve(rhs);
            if (!y.allFinite()) return x;
            for (Eigen::Index r = 0; r < nf; ++r) target[free[static_cast<std::size_t>(r)]] = y[r];
        }
        // Step toward the subspace minimizer, stopping at the first bound hit.
        double step = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index i : free) {
            const double d = target[i] - x[i];
            if (d > 0.0 && target[i] > bound) {
                const double t = (bound - x[i]) / d;
                if (t < step) { step = t; blocking = i; }
            } else if (d < 0.0 && target[i] < -bound) {
                const double t = (-bound - x[i]) / d;
                if (t < step) { step = t; blocking = i; }
            }
        }
        x += step * (target - x);
        x = project(x, bound);
        if (blocking >= 0) {
            state[static_cast<std::size_t>(blocking)] = target[blocking] > 0.0 ? 1 : -1;
            continue;
        }
        // Subspace optimum reached; release one constraint whose multiplier has the wrong sign.
        const Eigen::VectorXd g = 2.0 * (G * x - h);
        Eigen::Index release = -1;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int st = state[static_cast<std::size_t>(i)];
            // At the upper bound optimality needs g <= 0, at the lower bound g >= 0.
            const double violation = st == 1 ? g[i] : (st == -1 ? -g[i] : 0.0);
            if (violation > worst) { worst = violation; release = i; }
        }
        if (release < 0) break;
        state[static_cast<std::size_t>(release)] = 0;
    }
    return x;
}

}  // namespace

double box_lsq_kkt_residual(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double bound,
                            const Eigen::VectorXd& x) {
    const Eigen::VectorXd g = 2.0 * (G * x - h);
    return (x - project(x - g, bound)).lpNorm<Eigen::Infinity>();
}

BoxLsqResult box_lsq_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double c, double bound,
                          const BoxLsqOptions& options) {
    if (G.rows() != G.cols() || G.rows() != h.size() || G.rows() == 0)
        throw ValidationError("box_lsq: dimension mismatch");
    if (!(bound > 0.0)) throw ValidationError("box_lsq: bound must be positive");
    if (!G.allFinite() || !h.allFinite()) throw NumericError("box_lsq: non-finite problem data");

    BoxLsqResult out;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    const double lmin = eig.eigenvalues().minCoeff();
    out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();

    const Eigen::Index n = h.size();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (lmax == 0.0) {
        out.x = x;
    } else {
        // Accelerated projected gradient, step 1/L with L = 2 lambda_max, function-value restart.
        const double step = 1.0 / (2.0 * lmax);
        Eigen::VectorXd y = x;
        Eigen::VectorXd x_prev = x;
        double t = 1.0;
        double f_prev = objective(G, h, c, x);
        std::size_t it = 0;
        for (; it < options.max_iterations; ++it) {
            const Eigen::VectorXd grad = 2.0 * (G * y - h);
            x_prev = x;
            x = project(y - step * grad, bound);
            const double f = objective(G, h, c, x);
            if (f > f_prev) {
                t = 1.0;
                y = x;
            } else {
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                y = x + ((t - 1.0) / t_next) * (x - x_prev);
                t = t_next;
            }
            f_prev = f;
            if ((it & 15) == 15 && box_lsq_kkt_residual(G, h, bound, x) <= options.tol) {
                ++it;
                break;
            }
        }
        out.iterations = it;
        out.x = x;
        if (options.polish) {
            Eigen::VectorXd polished = active_set_polish(G, h, bound, x);
            if (polished.allFinite() && objective(G, h, c, polished) <= objective(G, h, c, x) + 1e-15 * (1.0 + std::abs(c)))
                out.x = polished;
        }
    }
    out.x = project(out.x, bound);
    out.objective = objective(G, h, c, out.x);
    out.kkt_residual = box_lsq_kkt_residual(G, h, bound, out.x);
    out.converged = out.kkt_residual <= options.tol;
    out.active_constraints = static_cast<std::size_t>((out.x.cwiseAbs().array() >= bound).count());
    return out;
}

BoxLsqResult box_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double bound,
                     const BoxLsqOptions& options) {
    if (A.rows() != b.size() || A.rows() == 0) throw ValidationError("box_lsq: dimension mismatch");
    const double inv_n = 1.0 / static_cast<double>(A.rows());
    const Eigen::MatrixXd G = inv_n * (A.transpose() * A);
    const Eigen::VectorXd h = inv_n * (A.transpose() * b);
    BoxLsqResult out = box_lsq_gram(G, h, inv_n * b.squaredNorm(), bound, options);
    // Report the objective from the residual directly; the Gram form loses digits when it is small.
    out.objective = inv_n * (A * out.x - b).squaredNorm();
    return out;
}

}  // namespace evl
