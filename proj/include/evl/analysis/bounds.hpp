#pragma once

#include <cstdint>
#include <string>

namespace evl::analysis {

/// Inputs shared by the sample-complexity calculators. C_rho_mu and C_K are user supplied;
/// every output is conditional on them.
struct ComplexityInputs {
    double epsilon = 0.1;
    double delta = 0.05;
    double v_max = 1.0;
    double gamma = 0.5;
    double c_rho_mu = 1.0;
    /// C of the RPBF class (|alpha_j| <= C / J).
    double c_const = 1.0;
    std::uint64_t n_actions = 2;
    double c_k = 1.0;
    double kappa = 1.0;

    void validate() const;
};

enum class Norm { l1, l2 };

std::string to_string(Norm norm);
Norm norm_from_string(const std::string& name);

/// Which printed form of the N and M expressions to evaluate. `display` follows the
/// headline sample-size statements; `appendix` follows the one-step derivations they come from.
enum class FormulaVariant { display, appendix };

std::string to_string(FormulaVariant variant);
FormulaVariant formula_variant_from_string(const std::string& name);

/// Raw (unrounded) sample sizes alongside their ceilings. The real-valued fields are
/// reported because some of them overflow any integer type.
struct RpbfComplexity {
    Norm norm = Norm::l1;
    FormulaVariant variant = FormulaVariant::display;
    double j = 0.0;
    double n = 0.0;
    double m = 0.0;
    std::uint64_t k_star = 0;
    double k_min = 0.0;
    double delta_prime = 0.0;
    double v_bar = 0.0;
    double mu_star = 0.0;
};

struct RkhsComplexity {
    FormulaVariant variant = FormulaVariant::display;
    double n = 0.0;
    double m = 0.0;
    std::uint64_t k_star = 0;
    double k_min = 0.0;
    double delta_prime = 0.0;
    double mu_star = 0.0;
};

/// 2 ((1 - g^{K+1}) / (1 - g))^{(p-1)/p} [C^{1/p} eps + g^{K/p} 2 v_max].
double error_bound_lp(double p, double eps, std::uint64_t k, double gamma, double c_rho_mu, double v_max);

/// eps / (1 - g) + g^K 2 v_max.
double error_bound_sup(double eps, std::uint64_t k, double gamma, double v_max);

/// (1 - p) p^{K - 1}.
double mu_star(double p, std::uint64_t k_star);

/// 1 - (1 - delta / 2)^{1 / (K* - 1)}; K* <= 1 is rejected.
double delta_prime(double delta, std::uint64_t k_star);

/// K* for the RPBF bounds: l1 uses C eps, l2 uses sqrt(C) eps and doubles the ceiling.
std::uint64_t k_star_rpbf(const ComplexityInputs& in, Norm norm);
/// K* for the RKHS bound: ceil((ln eps - ln 4 v_max) / ln g).
std::uint64_t k_star_rkhs(const ComplexityInputs& in);

RpbfComplexity complexity_rpbf(const ComplexityInputs& in, Norm norm,
                               FormulaVariant variant = FormulaVariant::display);
RkhsComplexity complexity_rkhs(const ComplexityInputs& in, FormulaVariant variant = FormulaVariant::display);

/// ceil(x) saturated to the uint64 range; NaN and +inf map to the maximum.
std::uint64_t ceil_to_u64(double x);

}  // namespace evl::analysis
