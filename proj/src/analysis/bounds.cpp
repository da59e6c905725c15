#include "evl/analysis/bounds.hpp"

#include "evl/common.hpp"

#include <cmath>
#include <limits>

namespace evl::analysis {

void ComplexityInputs::validate() const {
    if (!(epsilon > 0.0)) throw ValidationError("must be positive", "epsilon");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("must lie in (0, 1)", "delta");
    if (!(v_max > 0.0)) throw ValidationError("must be positive", "v_max");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
    if (!(c_rho_mu > 0.0)) throw ValidationError("must be positive", "c_rho_mu");
    if (!(c_const > 0.0)) throw ValidationError("must be positive", "c_const");
    if (n_actions < 1) throw ValidationError("must be at least 1", "n_actions");
    if (!(c_k > 0.0)) throw ValidationError("must be positive", "c_k");
    if (!(kappa > 0.0)) throw ValidationError("must be positive", "kappa");
}

std::string to_string(Norm norm) { return norm == Norm::l1 ? "l1" : "l2"; }

Norm norm_from_string(const std::string& name) {
    if (name == "l1") return Norm::l1;
    if (name == "l2") return Norm::l2;
    throw ValidationError("unknown norm '" + name + "' (expected l1 or l2)", "norm");
}

std::string to_string(FormulaVariant variant) { return variant == FormulaVariant::display ? "display" : "appendix"; }

FormulaVariant formula_variant_from_string(const std::string& name) {
    if (name == "display") return FormulaVariant::display;
    if (name == "appendix") return FormulaVariant::appendix;
    throw ValidationError("unknown formula variant '" + name + "' (expected display or appendix)", "variant");
}

std::uint64_t ceil_to_u64(double x) {
    constexpr double limit = 18446744073709551615.0;
    if (std::isnan(x) || x >= limit) return std::numeric_limits<std::uint64_t>::max();
    if (x <= 0.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(x));
}

double error_bound_lp(double p, double eps, std::uint64_t k, double gamma, double c_rho_mu, double v_max) {
    if (!(p >= 1.0)) throw ValidationError("p must be at least 1", "p");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
    const double kd = static_cast<double>(k);
    const double geometric = (1.0 - std::pow(gamma, kd + 1.0)) / (1.0 - gamma);
    return 2.0 * std::pow(geometric, (p - 1.0) / p) *
           (std::pow(c_rho_mu, 1.0 / p) * eps + std::pow(gamma, kd / p) * 2.0 * v_max);
}

double error_bound_sup(double eps, std::uint64_t k, double gamma, double v_max) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("must lie in (0, 1)", "gamma");
    return eps / (1.0 - gamma) + std::pow(gamma, static_cast<double>(k)) * 2.0 * v_max;
}

double mu_star(double p, std::uint64_t k_star) {
    if (k_star < 1) throw ValidationError("K* must be at least 1", "k_star");
    return (1.0 - p) * std::pow(p, static_cast<double>(k_star - 1));
}

double delta_prime(double delta, std::uint64_t k_star) {
    if (k_star <= 1)
        throw ValidationError("K* = " + std::to_string(k_star) +
                                  " leaves delta' undefined; use a smaller epsilon or a larger v_max",
                              "k_star");
    return -std::expm1(std::log1p(-delta / 2.0) / static_cast<double>(k_star - 1));
}

namespace {

std::uint64_t k_star_from(double numerator_arg, double v_scale, double gamma) {
    const double k = (std::log(numerator_arg) - std::log(v_scale)) / std::log(gamma);
    if (!(k > 0.0)) return 0;
    return ceil_to_u64(k);
}

}  // namespace

std::uint64_t k_star_rpbf(const ComplexityInputs& in, Norm norm) {
    in.validate();
    if (norm == Norm::l1) return k_star_from(in.c_rho_mu * in.epsilon, 2.0 * in.v_max, in.gamma);
    return 2 * k_star_from(std::sqrt(in.c_rho_mu) * in.epsilon, 2.0 * in.v_max, in.gamma);
}

std::uint64_t k_star_rkhs(const ComplexityInputs& in) {
    in.validate();
    return k_star_from(in.epsilon, 4.0 * in.v_max, in.gamma);
}

RpbfComplexity complexity_rpbf(const ComplexityInputs& in, Norm norm, FormulaVariant variant) {
    in.validate();
    RpbfComplexity out;
    out.norm = norm;
    out.variant = variant;
    out.k_star = k_star_rpbf(in, norm);
    out.delta_prime = delta_prime(in.delta, out.k_star);
    out.v_bar = in.v_max / in.epsilon;
    out.mu_star = mu_star(in.delta, out.k_star);

    const double dp = out.delta_prime;
    const double vb = out.v_bar;
    const double e = std::exp(1.0);

    const double root = 5.0 * in.c_const / in.epsilon * (1.0 + std::sqrt(2.0 * std::log(5.0 / dp)));
    out.j = root * root;
    // The displayed N uses the ceiled J as the exponent.
    const double jd = std::ceil(out.j);

    // log[40 e (J + 1) / d * base^J] is expanded to keep base^J from overflowing.
    const double delta_in_log = variant == FormulaVariant::display ? in.delta : dp;
    double v_power = 0.0, base = 0.0;
    if (norm == Norm::l1) {
        v_power = vb * vb;
        base = 10.0 * e * vb;
    } else {
        v_power = vb * vb * vb * vb;
        base = variant == FormulaVariant::display ? 10.0 * e * vb * vb : 10.0 * e * vb;
    }
    const double log_term = std::log(40.0 * e * (jd + 1.0) / delta_in_log) + jd * std::log(base);
    out.n = 128.0 * 25.0 * v_power * log_term;

    // (v_bar^2 / 2) log[10 N |A| / delta']; identical to v_max^2 / (2 eps^2) log[...].
    const double nd = std::ceil(out.n);
    out.m = std::max(1.0, 0.5 * vb * vb * (std::log(10.0) + std::log(nd) + std::log(static_cast<double>(in.n_actions)) - std::log(dp)));

    out.k_min = std::log(4.0 / (in.delta * out.mu_star));
    return out;
}

RkhsComplexity complexity_rkhs(const ComplexityInputs& in, FormulaVariant variant) {
    in.validate();
    RkhsComplexity out;
    out.variant = variant;
    out.k_star = k_star_rkhs(in);
    out.delta_prime = delta_prime(in.delta, out.k_star);
    out.mu_star = mu_star(in.delta, out.k_star);

    const double scale = in.epsilon * (1.0 - in.gamma);
    const double lg = std::log(4.0 / out.delta_prime);
    out.n = std::pow(4.0 * in.c_k * in.kappa / scale, 6.0) * lg * lg;

    const double a = static_cast<double>(in.n_actions);
    const double span = 8.0 * in.v_max - scale;
    double m = 0.0;
    if (variant == FormulaVariant::display) {
        m = 160.0 * in.v_max * in.v_max / (scale * scale) *
            std::log(2.0 * a * in.gamma * span / (scale * (2.0 - in.gamma)));
    } else {
        m = 32.0 * in.v_max * in.v_max / (scale * scale) *
            std::log(a * in.gamma * span / (2.0 * (2.0 - in.gamma) * scale));
    }
    out.m = std::isfinite(m) ? std::max(1.0, m) : 1.0;
    out.k_min = std::log(4.0 / (in.delta * out.mu_star));
    return out;
}

}  // namespace evl::analysis
