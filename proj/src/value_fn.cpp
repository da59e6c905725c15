#include "evl/value_fn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace evl {

using nlohmann::json;

std::string format_state(const State& s) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ']';
    return os.str();
}

std::string to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::constant: return "constant";
        case ValueKind::rpbf: return "rpbf";
        case ValueKind::rkhs: return "rkhs";
        case ValueKind::polynomial: return "polynomial";
        case ValueKind::tabular_grid: return "tabular-grid";
    }
    return "unknown";
}

std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(dim, 0);
    // Enumerate by total degree; within a degree, lexicographically.
    for (int total = 0; total <= degree; ++total) {
        std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int remaining) {
            if (pos + 1 == dim) {
                current[pos] = remaining;
                out.push_back(current);
                return;
            }
            for (int e = remaining; e >= 0; --e) {
                current[pos] = e;
                rec(pos + 1, remaining - e);
            }
        };
        if (dim == 0) {
            if (total == 0) out.emplace_back();
        } else {
            rec(0, total);
        }
    }
    return out;
}

namespace {

std::size_t basis_cardinality(const Basis& basis) {
    return std::visit(
        [](const auto& b) -> std::size_t {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, ConstantBasis>) return 1;
            else if constexpr (std::is_same_v<B, RpbfBasis>) return b.params.size();
            else if constexpr (std::is_same_v<B, RkhsBasis>) return b.centers.size();
            else if constexpr (std::is_same_v<B, PolynomialBasis>) return b.exponents.size();
            else return b.nodes;
        },
        basis);
}

}  // namespace

ValueFn::ValueFn(Basis basis, Eigen::VectorXd weights, std::optional<double> clamp)
    : basis_(std::move(basis)), weights_(std::move(weights)), clamp_(clamp) {
    if (static_cast<std::size_t>(weights_.size()) != basis_cardinality(basis_))
        throw ValidationError("weights length does not match basis cardinality");
    if (const auto* g = std::get_if<GridBasis>(&basis_); g && (g->nodes < 2 || !(g->hi > g->lo)))
        throw ValidationError("grid basis needs at least two nodes on a nonempty interval");
    if (clamp_ && !(*clamp_ >= 0.0)) throw ValidationError("clamp must be nonnegative");
}

ValueFn ValueFn::constant(double c, std::optional<double> clamp) {
    return ValueFn(ConstantBasis{}, Eigen::VectorXd::Constant(1, c), clamp);
}

ValueKind ValueFn::kind() const { return static_cast<ValueKind>(basis_.index()); }

std::size_t ValueFn::basis_size() const { return basis_cardinality(basis_); }

double ValueFn::raw(const State& s) const {
    return std::visit(
        [&](const auto& b) -> double {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, ConstantBasis>) {
                return weights_[0];
            } else if constexpr (std::is_same_v<B, RpbfBasis>) {
                double acc = 0.0;
                for (std::size_t j = 0; j < b.params.size(); ++j)
                    acc += weights_[static_cast<Eigen::Index>(j)] * b.family.feature(s, b.params[j]);
                return acc;
            } else if constexpr (std::is_same_v<B, RkhsBasis>) {
                double acc = 0.0;
                for (std::size_t n = 0; n < b.centers.size(); ++n)
                    acc += weights_[static_cast<Eigen::Index>(n)] * b.kernel(b.centers[n], s);
                return acc;
            } else if constexpr (std::is_same_v<B, PolynomialBasis>) {
                const Eigen::VectorXd z = (s - b.center).cwiseProduct(b.scale);
                double acc = 0.0;
                for (std::size_t t = 0; t < b.exponents.size(); ++t) {
                    double term = weights_[static_cast<Eigen::Index>(t)];
                    for (std::size_t i = 0; i < b.exponents[t].size(); ++i)
                        for (int e = 0; e < b.exponents[t][i]; ++e) term *= z[static_cast<Eigen::Index>(i)];
                    acc += term;
                }
                return acc;
            } else {
                const double x = std::clamp(s[0], b.lo, b.hi);
                const double pos = (x - b.lo) / (b.hi - b.lo) * static_cast<double>(b.nodes - 1);
                auto i = static_cast<std::size_t>(pos);
                if (i >= b.nodes - 1) i = b.nodes - 2;
                const double frac = pos - static_cast<double>(i);
                const auto ii = static_cast<Eigen::Index>(i);
                return (1.0 - frac) * weights_[ii] + frac * weights_[ii + 1];
            }
        },
        basis_);
}

double ValueFn::operator()(const State& s) const {
    double v = raw(s);
    if (!std::isfinite(v))
        throw NumericError("non-finite value-function evaluation at state " + format_state(s));
    if (clamp_) v = std::clamp(v, -*clamp_, *clamp_);
    return v;
}

// ---- JSON -----------------------------------------------------------------

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vec_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json family_to_json(const RpbfFamily& f) {
    json j{{"feature", to_string(f.kind)}, {"c_bound", f.c_bound}};
    if (f.kind == FeatureKind::fourier) j["omega_variance"] = f.omega_variance;
    else j["threshold_range"] = f.threshold_range;
    if (f.input_scale.size() != 0) j["input_scale"] = vec_to_json(f.input_scale);
    return j;
}

RpbfFamily family_from_json(const json& j) {
    RpbfFamily f;
    f.kind = feature_kind_from_string(j.at("feature").get<std::string>());
    f.c_bound = j.at("c_bound").get<double>();
    if (j.contains("omega_variance")) f.omega_variance = j["omega_variance"].get<double>();
    if (j.contains("threshold_range")) f.threshold_range = j["threshold_range"].get<double>();
    if (j.contains("input_scale")) f.input_scale = vec_from_json(j["input_scale"]);
    return f;
}

}  // namespace

json to_json(const ValueFn& v) {
    json basis = std::visit(
        [](const auto& b) -> json {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, ConstantBasis>) {
                return json::object();
            } else if constexpr (std::is_same_v<B, RpbfBasis>) {
                json params = json::array();
                for (const auto& p : b.params) params.push_back({{"omega", vec_to_json(p.omega)}, {"offset", p.offset}});
                return {{"family", family_to_json(b.family)}, {"params", params}};
            } else if constexpr (std::is_same_v<B, RkhsBasis>) {
                json centers = json::array();
                for (const auto& c : b.centers) centers.push_back(vec_to_json(c));
                return {{"kernel", to_string(b.kernel.kind)}, {"kernel_param", b.kernel.param}, {"centers", centers}};
            } else if constexpr (std::is_same_v<B, PolynomialBasis>) {
                return {{"degree", b.degree},
                        {"exponents", b.exponents},
                        {"center", vec_to_json(b.center)},
                        {"scale", vec_to_json(b.scale)}};
            } else {
                return {{"lo", b.lo}, {"hi", b.hi}, {"nodes", b.nodes}};
            }
        },
        v.basis());
    return {{"kind", to_string(v.kind())},
            {"basis", basis},
            {"weights", vec_to_json(v.weights())},
            {"clamp", v.clamp() ? json(*v.clamp()) : json(nullptr)}};
}

ValueFn value_fn_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const json& b = j.at("basis");
    Basis basis;
    if (kind == "constant") {
        basis = ConstantBasis{};
    } else if (kind == "rpbf") {
        RpbfBasis rb;
        rb.family = family_from_json(b.at("family"));
        for (const auto& p : b.at("params")) rb.params.push_back({vec_from_json(p.at("omega")), p.at("offset").get<double>()});
        basis = std::move(rb);
    } else if (kind == "rkhs") {
        RkhsBasis rb;
        rb.kernel = {kernel_kind_from_string(b.at("kernel").get<std::string>()), b.at("kernel_param").get<double>()};
        for (const auto& c : b.at("centers")) rb.centers.push_back(vec_from_json(c));
        basis = std::move(rb);
    } else if (kind == "polynomial") {
        PolynomialBasis pb;
        pb.degree = b.at("degree").get<int>();
        pb.exponents = b.at("exponents").get<std::vector<std::vector<int>>>();
        pb.center = vec_from_json(b.at("center"));
        pb.scale = vec_from_json(b.at("scale"));
        basis = std::move(pb);
    } else if (kind == "tabular-grid") {
        basis = GridBasis{b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("nodes").get<std::size_t>()};
    } else {
        throw ValidationError("unknown value-function kind '" + kind + "'", "kind");
    }
    std::optional<double> clamp;
    if (j.contains("clamp") && !j["clamp"].is_null()) clamp = j["clamp"].get<double>();
    return ValueFn(std::move(basis), vec_from_json(j.at("weights")), clamp);
}

}  // namespace evl
