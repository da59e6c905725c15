#pragma once

#include "evl/common.hpp"
#include "evl/features.hpp"

#include <json.hpp>

#include <optional>
#include <variant>
#include <vector>

namespace evl {

enum class ValueKind { constant, rpbf, rkhs, polynomial, tabular_grid };

std::string to_string(ValueKind kind);

struct ConstantBasis {};

struct RpbfBasis {
    RpbfFamily family;
    std::vector<FeatureParam> params;
};

struct RkhsBasis {
    Kernel kernel;
    std::vector<State> centers;
};

/// Monomials of the affinely rescaled state (s - center) .* scale, total degree <= degree.
struct PolynomialBasis {
    int degree = 0;
    std::vector<std::vector<int>> exponents;
    State center;
    State scale;
};

/// Piecewise-linear interpolation on a uniform one-dimensional grid; weights are node values.
struct GridBasis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t nodes = 2;

    double node(std::size_t i) const {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nodes - 1);
    }
};

using Basis = std::variant<ConstantBasis, RpbfBasis, RkhsBasis, PolynomialBasis, GridBasis>;

/// All multi-indices over `dim` variables with total degree <= degree, in graded order.
std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int degree);

/// A fitted value function: basis descriptor plus weights, optionally clamped to
/// [-clamp, clamp]. Immutable after construction and safe to share across threads.
class ValueFn {
public:
    ValueFn(Basis basis, Eigen::VectorXd weights, std::optional<double> clamp = std::nullopt);

    static ValueFn constant(double c, std::optional<double> clamp = std::nullopt);
    static ValueFn zero() { return constant(0.0); }

    /// Value at s with the clamp applied; throws NumericError on a non-finite result.
    double operator()(const State& s) const;
    /// Basis expansion without clamping or finiteness checks.
    double raw(const State& s) const;

    ValueKind kind() const;
    const Basis& basis() const { return basis_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const std::optional<double>& clamp() const { return clamp_; }
    std::size_t basis_size() const;

private:
    Basis basis_;
    Eigen::VectorXd weights_;
    std::optional<double> clamp_;
};

nlohmann::json to_json(const ValueFn& v);
ValueFn value_fn_from_json(const nlohmann::json& j);

}  // namespace evl
