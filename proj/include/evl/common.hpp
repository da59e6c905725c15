#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace evl {

/// A point of the continuous state space, a subset of R^d.
using State = Eigen::VectorXd;

/// Closed interval [lo, hi] bounding one state coordinate.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

using Bounds = std::vector<Interval>;

/// Raised when a value function or kernel produces a non-finite number.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation needs a capability the model does not expose.
class UnsupportedOperation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or input; `field` carries a JSON-pointer style path when known.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& message, std::string field = {})
        : std::invalid_argument(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

std::string format_state(const State& s);

}  // namespace evl
