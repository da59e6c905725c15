#include "evl/analysis/bounds.hpp"
#include "evl/analysis/chain.hpp"
#include "evl/analysis/dominance.hpp"
#include "evl/analysis/policy_eval.hpp"
#include "evl/env/cartpole.hpp"
#include "evl/env/replacement.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace evl;
using namespace evl::analysis;

namespace {

State s1(double x) {
    State s(1);
    s << x;
    return s;
}

ComplexityInputs random_inputs(Rng& rng) {
    ComplexityInputs in;
    in.epsilon = std::exp(rng.uniform(std::log(0.01), std::log(0.5)));
    in.delta = rng.uniform(0.01, 0.5);
    in.v_max = rng.uniform(1.0, 100.0);
    in.gamma = rng.uniform(0.3, 0.95);
    in.c_rho_mu = rng.uniform(1.0, 5.0);
    in.c_const = rng.uniform(0.5, 5.0);
    in.n_actions = 2 + rng.index(4);
    in.c_k = rng.uniform(0.5, 3.0);
    in.kappa = rng.uniform(0.5, 2.0);
    return in;
}

}  // namespace

TEST_SUITE("bounds") {
    TEST_CASE("error propagation bounds") {
        CHECK(error_bound_lp(1.0, 0.1, 4, 0.5, 3.0, 1.0) == doctest::Approx(2.0 * (3.0 * 0.1 + 0.0625 * 2.0)));
        CHECK(error_bound_lp(2.0, 0.1, 4, 0.5, 1.0, 1.0) == doctest::Approx(2.0 * std::sqrt(1.9375) * 0.6));
        CHECK(error_bound_lp(2.0, 0.1, 4, 0.5, 1.0, 1.0) == doctest::Approx(1.6703).epsilon(1e-4));
        double prev = 1e300;
        for (std::uint64_t k = 1; k < 60; ++k) {
            const double b = error_bound_lp(1.5, 0.0, k, 0.7, 2.0, 5.0);
            CHECK(b < prev);
            prev = b;
        }
        CHECK(error_bound_sup(0.1, 4, 0.5, 1.0) == doctest::Approx(0.325));
        CHECK(error_bound_sup(0.0, 3, 0.5, 1.0) == doctest::Approx(0.25));
        CHECK(error_bound_sup(0.1, 0, 0.5, 1.0) == doctest::Approx(0.2 + 2.0));
        CHECK_THROWS_AS(error_bound_lp(0.5, 0.1, 1, 0.5, 1.0, 1.0), ValidationError);
    }

    TEST_CASE("worked K* examples") {
        ComplexityInputs in;
        in.gamma = 0.6;
        in.epsilon = 0.1;
        in.v_max = 75.0;
        in.c_rho_mu = 1.0;
        const double k1 = (std::log(0.1) - std::log(150.0)) / std::log(0.6);
        CHECK(k1 == doctest::Approx(14.315).epsilon(1e-4));
        CHECK(k_star_rpbf(in, Norm::l1) == 15);
        CHECK(complexity_rpbf(in, Norm::l1).k_star == 15);
        CHECK(k_star_rpbf(in, Norm::l2) == 2 * 15);

        ComplexityInputs r;
        r.epsilon = 0.1;
        r.v_max = 1.0;
        r.gamma = 0.5;
        CHECK(k_star_rkhs(r) == 6);
        CHECK(complexity_rkhs(r).k_star == 6);
    }

    TEST_CASE("derived quantities match independent evaluation") {
        CHECK(delta_prime(0.05, 15) == doctest::Approx(1.0 - std::pow(1.0 - 0.025, 1.0 / 14.0)).epsilon(1e-14));
        CHECK(mu_star(0.3, 4) == doctest::Approx(0.7 * 0.027));
        CHECK_THROWS_AS(delta_prime(0.05, 1), ValidationError);

        // Small inputs so every power can be evaluated directly in long double.
        ComplexityInputs in;
        in.epsilon = 0.5;
        in.delta = 0.1;
        in.v_max = 1.0;
        in.gamma = 0.5;
        in.c_const = 0.01;
        const auto c = complexity_rpbf(in, Norm::l1, FormulaVariant::appendix);
        const long double dp = 1.0L - std::pow(1.0L - 0.05L, 1.0L / (c.k_star - 1));
        const long double root = 5.0L * 0.01L / 0.5L * (1.0L + std::sqrt(2.0L * std::log(5.0L / dp)));
        CHECK(c.j == doctest::Approx(static_cast<double>(root * root)).epsilon(1e-12));
        const long double jd = std::ceil(root * root), vb = 2.0L, e = std::exp(1.0L);
        const long double n = 128.0L * 25.0L * vb * vb *
                              std::log(40.0L * e * (jd + 1.0L) / dp * std::pow(10.0L * e * vb, jd));
        CHECK(c.n == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
        const long double m = 1.0L / (2.0L * 0.25L) * std::log(10.0L * std::ceil(n) * 2.0L / dp);
        CHECK(c.m == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
        CHECK(c.k_min == doctest::Approx(std::log(4.0 / (0.1 * mu_star(0.1, c.k_star)))));
    }

    TEST_CASE("K* = 1 asks for a smaller epsilon") {
        ComplexityInputs in;
        in.epsilon = 100.0;
        in.v_max = 75.0;
        in.gamma = 0.6;
        try {
            complexity_rpbf(in, Norm::l1);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
        }
    }

    TEST_CASE("halving epsilon at least quadruples J; N_inf scales as eps^-6") {
        Rng rng(3);
        for (int i = 0; i < 50; ++i) {
            const auto in = random_inputs(rng);
            auto half = in;
            half.epsilon /= 2.0;
            for (auto v : {FormulaVariant::display, FormulaVariant::appendix})
                CHECK(complexity_rpbf(half, Norm::l1, v).j >= 4.0 * complexity_rpbf(in, Norm::l1, v).j);
        }
        // gamma = 0.1: K_inf* is 2 for both eps = 0.1 and eps = 0.05, so only the eps^-6 factor changes N.
        ComplexityInputs in;
        in.gamma = 0.1;
        in.v_max = 1.0;
        in.epsilon = 0.1;
        auto half = in;
        half.epsilon = 0.05;
        REQUIRE(k_star_rkhs(in) == 2);
        REQUIRE(k_star_rkhs(half) == 2);
        CHECK(complexity_rkhs(half).n / complexity_rkhs(in).n == doctest::Approx(64.0).epsilon(1e-12));
        auto big_kappa = in;
        big_kappa.kappa = 1.5;
        CHECK(complexity_rkhs(big_kappa).n > complexity_rkhs(in).n);
    }

    TEST_CASE("delta towards one drives J, N, M to their minima monotonically") {
        ComplexityInputs in;
        in.epsilon = 0.1;
        in.v_max = 10.0;
        in.gamma = 0.6;
        RpbfComplexity prev = complexity_rpbf(in, Norm::l1);
        for (double d = 0.1; d < 0.999; d += 0.05) {
            in.delta = d;
            const auto c = complexity_rpbf(in, Norm::l1, FormulaVariant::appendix);
            CHECK(c.j <= prev.j);
            CHECK(c.n <= prev.n);
            CHECK(c.m <= prev.m);
            prev = c;
        }
    }

    TEST_CASE("calculator monotonicity over random inputs") {
        Rng rng(2024);
        for (int i = 0; i < 100; ++i) {
            const auto in = random_inputs(rng);
            auto eps = in;
            eps.epsilon *= 0.7;
            auto del = in;
            del.delta *= 0.7;
            for (auto norm : {Norm::l1, Norm::l2})
                for (auto v : {FormulaVariant::display, FormulaVariant::appendix}) {
                    const auto a = complexity_rpbf(in, norm, v), b = complexity_rpbf(eps, norm, v),
                               c = complexity_rpbf(del, norm, v);
                    CHECK(b.j > a.j);
                    CHECK(b.n > a.n);
                    CHECK(b.m > a.m);
                    CHECK(b.k_star >= a.k_star);
                    CHECK(c.j > a.j);
                    CHECK(c.n > a.n);
                    CHECK(c.m > a.m);
                }
            for (auto v : {FormulaVariant::display, FormulaVariant::appendix}) {
                const auto a = complexity_rkhs(in, v), b = complexity_rkhs(eps, v), c = complexity_rkhs(del, v);
                CHECK(b.n > a.n);
                CHECK(b.m >= a.m);
                CHECK(b.k_star >= a.k_star);
                CHECK(c.n > a.n);
            }
        }
    }

    TEST_CASE("ceil_to_u64 saturates") {
        CHECK(ceil_to_u64(2.1) == 3);
        CHECK(ceil_to_u64(1e300) == std::numeric_limits<std::uint64_t>::max());
        CHECK(ceil_to_u64(std::nan("")) == std::numeric_limits<std::uint64_t>::max());
        CHECK(ceil_to_u64(-3.0) == 0);
    }
}

TEST_SUITE("chain") {
    TEST_CASE("closed-form steady state") {
        const auto mu = chain_steady_state({0.5, 3});
        CHECK(mu[0] == 0.25);
        CHECK(mu[1] == 0.25);
        CHECK(mu[2] == 0.5);
        CHECK(chain_steady_state({0.3, 1}) == std::vector<double>{1.0});
        for (double q : {0.1, 0.5, 0.9, 0.99})
            for (std::size_t k : {1u, 2u, 3u, 5u, 12u}) {
                const auto m = chain_steady_state({q, k});
                double sum = 0.0;
                for (double x : m) sum += x;
                CHECK(std::abs(sum - 1.0) <= 1e-12);
                const auto mp = oracle::row_times(m, oracle::chain_matrix(q, k));
                for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(mp[i] - m[i]) <= 1e-12);
                const Eigen::MatrixXd p = DominatingChain{q, k}.transition_matrix();
                const auto indep = oracle::chain_matrix(q, k);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) CHECK(p(i, j) == doctest::Approx(indep[i][j]));
            }
    }

    TEST_CASE("degenerate chains") {
        Rng rng(1);
        auto sim = chain_simulate({1.0, 5}, 100, rng);
        CHECK(sim.first_hit_one == 4);
        CHECK(sim.final_state == 1);
        CHECK(sim.occupancy[0] == doctest::Approx(97.0 / 100.0));
        sim = chain_simulate({0.0, 5}, 100, rng);
        CHECK(sim.occupancy[4] == 1.0);
        CHECK(sim.visits_to_one == 0);
        CHECK_THROWS_AS(DominatingChain({1.5, 3}).validate(), ValidationError);
        CHECK_THROWS_AS(DominatingChain({0.5, 0}).validate(), ValidationError);
    }

    TEST_CASE("simulated occupancy approaches the steady state") {
        Rng rng(7);
        const DominatingChain c{0.9, 5};
        const auto sim = chain_simulate(c, 1000000, rng);
        CHECK(total_variation(sim.occupancy, chain_steady_state(c)) <= 0.005);
    }

    TEST_CASE("exact marginal equals repeated multiplication") {
        for (double q : {0.3, 0.8})
            for (std::size_t k : {1u, 4u}) {
                std::vector<double> d(k, 0.0);
                d[k - 1] = 1.0;
                const auto p = oracle::chain_matrix(q, k);
                for (std::uint64_t step = 0; step <= 12; ++step) {
                    const auto m = chain_marginal({q, k}, step);
                    for (std::size_t i = 0; i < k; ++i) CHECK(m[i] == doctest::Approx(d[i]).epsilon(1e-13));
                    d = oracle::row_times(d, p);
                }
            }
    }

    TEST_CASE("mixing bound example, monotonicity and Monte Carlo check") {
        const DominatingChain c{0.5, 3};
        CHECK(chain_mixing_bound(c, 0.1) == 5);
        std::uint64_t prev = ~0ull;
        for (double d : {0.01, 0.05, 0.1, 0.3, 0.6}) {
            const auto b = chain_mixing_bound(c, d);
            CHECK(b <= prev);
            prev = b;
        }
        CHECK_THROWS_AS(chain_mixing_bound({1.0, 3}, 0.1), ValidationError);
        CHECK_THROWS_AS(chain_mixing_bound({0.0, 3}, 0.1), ValidationError);
        const Rng rng(11);
        const auto emp = chain_replicas(c, 5, 100000, rng);
        CHECK(std::abs(emp[0] - chain_steady_state(c)[0]) <= 0.2);
        CHECK(chain_replicas(c, 5, 5000, rng, 1) == chain_replicas(c, 5, 5000, rng, 3));
    }
}

TEST_SUITE("dominance") {
    TEST_CASE("classification, median, q estimators and error levels") {
        const std::vector<std::vector<double>> res = {{0.5, 2.0, 0.1}, {3.0, 0.2, 0.3}};
        const auto good = classify_iterations(res, 0.5);
        CHECK(good[0] == std::vector<bool>{true, false, true});
        CHECK(good[1] == std::vector<bool>{false, true, true});
        CHECK(median_residual(res) == doctest::Approx(0.4));
        CHECK(estimate_q(good, QEstimator::pooled) == doctest::Approx(4.0 / 6.0));
        CHECK(estimate_q(good, QEstimator::min_over_k) == doctest::Approx(0.5));
        const auto x = error_levels(good, 3);
        CHECK(x[0] == std::vector<std::uint64_t>{3, 2, 3, 2});
        CHECK(x[1] == std::vector<std::uint64_t>{3, 3, 2, 1});
    }

    TEST_CASE("q = 1 for both processes gives equality") {
        const std::vector<std::vector<double>> res(40, std::vector<double>(8, 0.0));
        DominanceOptions opt;
        opt.epsilon = 1.0;
        const auto rep = dominance_from_residuals(res, opt);
        CHECK(rep.chain.q == 1.0);
        CHECK(rep.violations == 0);
        for (const auto& r : rep.rows) CHECK(r.px == r.py);
    }

    TEST_CASE("a process stuck at 1 is dominated by any chain") {
        const std::vector<std::vector<std::uint64_t>> x(50, std::vector<std::uint64_t>(10, 1));
        for (double q : {0.0, 0.5, 1.0}) CHECK(dominance_check(x, {q, 4}).violations == 0);
    }

    TEST_CASE("synthetic processes with good-probability at least q are not flagged") {
        Rng rng(5);
        for (double p_good : {0.75, 0.9, 0.99}) {
            std::vector<std::vector<bool>> good(300, std::vector<bool>(15));
            for (auto& run : good)
                for (std::size_t k = 0; k < run.size(); ++k) run[k] = rng.bernoulli(p_good);
            const auto x = error_levels(good, 5);
            CHECK(dominance_check(x, {0.6, 5}).violations == 0);
        }
    }

    TEST_CASE("a process worse than the chain is flagged") {
        const std::vector<std::vector<std::uint64_t>> x(100, std::vector<std::uint64_t>(10, 5));
        const auto rep = dominance_check(x, {1.0, 5});
        CHECK(rep.violations > 0);
        CHECK(rep.max_z > 2.0);
    }

    TEST_CASE("fewer than 30 runs is refused") {
        const std::vector<std::vector<std::uint64_t>> x(29, std::vector<std::uint64_t>(3, 1));
        CHECK_THROWS_AS(dominance_check(x, {0.5, 3}), ValidationError);
    }
}

TEST_SUITE("policy_eval") {
    TEST_CASE("horizon and truncation") {
        const auto h = horizon_for(0.6, 0.01);
        CHECK(std::pow(0.6, double(h)) <= 0.01);
        CHECK(std::pow(0.6, double(h - 1)) > 0.01);
    }

    TEST_CASE("oracle policy has small relative error; zero policy does not") {
        const env::ReplacementParams p;
        const auto model = env::replacement_model(p);
        const env::ReplacementOracle o(p, 2000);
        std::vector<State> grid;
        for (int i = 0; i <= 10; ++i) grid.push_back(s1(1.0 * i));
        const Rng rng(9);
        const auto good = policy_relative_error(model, o.value_fn(), o.value_fn(), grid, 1000, 50, rng);
        CHECK(good.relative_error <= 0.03);
        CHECK(good.truncation_bias == doctest::Approx(std::pow(0.6, 50) * 100.0));
        CHECK(good.estimates.size() == grid.size());
        const auto bad = policy_relative_error(model, ValueFn::zero(), o.value_fn(), grid, 200, 50, rng);
        CHECK(bad.relative_error > 0.0);
        CHECK_THROWS_AS(policy_relative_error(model, ValueFn::zero(), o.value_fn(), {}, 10, 10, rng), ValidationError);
    }

    TEST_CASE("greedy argmin is invariant under adding a constant") {
        const env::ReplacementParams p;
        const auto model = env::replacement_model(p);
        const env::ReplacementOracle o(p, 300);
        const ValueFn v = o.value_fn();
        const ValueFn v7(v.basis(), Eigen::VectorXd(v.weights().array() + 7.0));
        Rng pick(3);
        for (int i = 0; i < 200; ++i) {
            const auto s = s1(pick.uniform(0.0, 10.0));
            const std::uint64_t seed = pick.next_u64();
            Rng r1(seed), r2(seed);
            CHECK(greedy_policy_action(model, v, s, 4, r1) == greedy_policy_action(model, v7, s, 4, r2));
            CHECK(greedy_policy_action_exact(model, v, s) == greedy_policy_action_exact(model, v7, s));
        }
    }

    TEST_CASE("episode lengths on cart-pole under the random policy") {
        const auto model = env::cartpole_model();
        const auto start = uniform_box_sampler(Bounds(4, Interval{-0.05, 0.05}));
        const auto lens = episode_lengths(model, random_policy(model), start, 200, 1000, Rng(4));
        CHECK(lens.size() == 200);
        const double med = median(lens);
        CHECK(med > 8.0);
        CHECK(med < 40.0);
        CHECK_THROWS_AS(episode_lengths(env::replacement_model(), random_policy(model), start, 1, 1, Rng(1)),
                        UnsupportedOperation);
    }
}
