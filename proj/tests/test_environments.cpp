#include "evl/env/acrobot.hpp"
#include "evl/env/cartpole.hpp"
#include "evl/env/replacement.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace evl;

namespace {

State s1(double x) {
    State s(1);
    s << x;
    return s;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_SUITE("environments") {
    TEST_CASE("replacement model basics") {
        const env::ReplacementParams p;
        const auto m = env::replacement_model(p);
        CHECK(m.v_max() == m.c_max / (1.0 - m.gamma));
        CHECK(m.v_max() == doctest::Approx(100.0));
        CHECK(m.n_actions() == 2);
        CHECK(m.cost(s1(5.0), env::kKeep) == 20.0);
        CHECK(m.cost(s1(5.0), env::kReplace) == 30.0);
    }

    TEST_CASE("replace restarts independently of the current state") {
        const auto m = env::replacement_model();
        Rng r1(1), r2(2);
        std::vector<double> a, b;
        for (int i = 0; i < 100000; ++i) {
            a.push_back(m.sample_next(s1(1.0), env::kReplace, r1)[0]);
            b.push_back(m.sample_next(s1(9.0), env::kReplace, r2)[0]);
        }
        CHECK(ks_statistic(a, b) <= 0.02);
    }

    TEST_CASE("keep never decreases wear; increments are exponential") {
        const env::ReplacementParams p;
        const auto m = env::replacement_model(p);
        Rng rng(3);
        for (int i = 0; i < 10000; ++i) {
            const double s = rng.uniform(0.0, 10.0);
            const double y = m.sample_next(s1(s), env::kKeep, rng)[0];
            CHECK_UNARY(y >= s);
            CHECK_UNARY(y <= p.s_max);
        }
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) sum += m.sample_next(s1(0.0), env::kKeep, rng)[0];
        // E[min(X, s_max)] for X ~ Exp(lambda) is (1 - exp(-lambda s_max)) / lambda.
        const double truncated = -std::expm1(-p.lambda_rate * p.s_max) / p.lambda_rate;
        CHECK(std::abs(sum / n - truncated) <= 0.02);
        CHECK(std::abs(sum / n - 1.0 / p.lambda_rate) <= 0.02);
    }

    TEST_CASE("model expectation integrates the truncated density") {
        const env::ReplacementParams p;
        const auto m = env::replacement_model(p);
        const auto id = [](const State& s) { return s[0]; };
        const auto one = [](const State&) { return 1.0; };
        for (double s : {0.0, 2.5, 7.0, 10.0}) {
            CHECK(m.expectation(s1(s), env::kKeep, one) == doctest::Approx(1.0).epsilon(1e-13));
            // E[min(s + X, s_max)] = s + (1 - exp(-lambda (s_max - s))) / lambda.
            const double mean = s - std::expm1(-p.lambda_rate * (p.s_max - s)) / p.lambda_rate;
            CHECK(m.expectation(s1(s), env::kKeep, id) == doctest::Approx(mean).epsilon(1e-12));
        }
    }

    TEST_CASE("oracle shape, bounds and self-convergence") {
        const env::ReplacementParams p;
        const env::ReplacementOracle o2(p, 2000), o4(p, 4000);
        const auto& v = o2.values();
        for (std::size_t i = 1; i < v.size(); ++i) CHECK_UNARY(v[i] >= v[i - 1] - 1e-12);
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK_UNARY(v[i] <= p.replace_cost + v[0] + 1e-9);
            CHECK_UNARY(v[i] <= 100.0);
        }
        double diff = 0.0;
        const ValueFn f4 = o4.value_fn();
        for (std::size_t i = 0; i < v.size(); ++i) diff = std::max(diff, std::abs(v[i] - f4(s1(o2.nodes()[i]))));
        CHECK(diff <= 2e-3);
        CHECK(o2.threshold() == doctest::Approx(o4.threshold()).epsilon(0.002));
        CHECK(o2.sweeps() < 10000);
    }

    TEST_CASE("oracle policy evaluation matches value iteration for the optimal policy") {
        const env::ReplacementParams p;
        const env::ReplacementOracle o(p, 500);
        const auto pv = o.evaluate_policy(o.policy());
        for (std::size_t i = 0; i < pv.size(); ++i) CHECK(pv[i] == doctest::Approx(o.values()[i]).epsilon(1e-8));
        // Always replacing costs 30 per step forever.
        const auto always = o.evaluate_policy(std::vector<Action>(500, env::kReplace));
        for (double x : always) CHECK(x == doctest::Approx(30.0 / (1.0 - p.gamma)).epsilon(1e-9));
    }

    TEST_CASE("cart-pole equilibrium and instability") {
        env::CartPoleParams p;
        p.noise_frac = 0.0;
        const State rest = State::Zero(4);
        const auto a = env::cartpole_accelerations(p, rest, 0.0);
        CHECK(a.theta_ddot == 0.0);
        CHECK(a.x_ddot == 0.0);
        for (double th : {-0.05, -0.01, 0.01, 0.05}) {
            State s = State::Zero(4);
            s[2] = th;
            CHECK(std::signbit(env::cartpole_accelerations(p, s, 0.0).theta_ddot) == std::signbit(th));
        }
    }

    TEST_CASE("noisy push spans the image of the force interval") {
        const env::CartPoleParams p;
        const auto m = env::cartpole_model(p);
        State s(4);
        s << 0.1, 0.2, 0.03, -0.1;
        const double lo = env::cartpole_accelerations(p, s, 5.0).x_ddot;
        const double hi = env::cartpole_accelerations(p, s, 15.0).x_ddot;
        Rng rng(8);
        double mn = 1e300, mx = -1e300;
        for (int i = 0; i < 100000; ++i) {
            const double xdd = (m.sample_next(s, env::kPushRight, rng)[1] - s[1]) / p.tau;
            mn = std::min(mn, xdd);
            mx = std::max(mx, xdd);
        }
        CHECK(std::abs(mn - lo) <= 0.01 * std::abs(lo));
        CHECK(std::abs(mx - hi) <= 0.01 * std::abs(hi));
        CHECK(mn >= lo - 1e-9);
        CHECK(mx <= hi + 1e-9);
    }

    TEST_CASE("cart-pole failure is absorbing and costs one") {
        const env::CartPoleParams p;
        const auto m = env::cartpole_model(p);
        State s = State::Zero(4);
        s[2] = 0.3;
        REQUIRE(m.terminal(s));
        CHECK(m.cost(s, env::kPushLeft) == 1.0);
        Rng rng(1);
        CHECK(m.sample_next(s, env::kPushLeft, rng) == s);
        CHECK(m.cost(State::Zero(4), env::kPushLeft) == 0.0);
        Rng a(5), b(5);
        State x = State::Zero(4), y = State::Zero(4);
        for (int i = 0; i < 50; ++i) {
            x = m.sample_next(x, i % 2, a);
            y = m.sample_next(y, i % 2, b);
        }
        CHECK(x == y);
        CHECK(m.contains(x));
    }

    TEST_CASE("acrobot rest is an equilibrium") {
        env::AcrobotParams p;
        p.torque_noise = 0.0;
        const auto m = env::acrobot_model(p);
        State s = env::acrobot_observation({0.0, 0.0, 0.0, 0.0});
        Rng rng(1);
        for (int i = 0; i < 50; ++i) s = m.sample_next(s, 1, rng);
        // Gravity terms involve cos(-pi/2), which rounds to about 6e-17 rather than zero.
        CHECK(std::abs(s[4]) <= 1e-12);
        CHECK(std::abs(s[5]) <= 1e-12);
        CHECK(std::abs(s[0] - 1.0) <= 1e-12);
    }

    TEST_CASE("acrobot energy is conserved without torque") {
        const env::AcrobotParams p;
        env::AcrobotCoords c{1.0, 0.5, 0.0, 0.0};
        const double e0 = env::acrobot_energy(p, c);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            c = env::acrobot_integrate(p, c, 0.0);
            worst = std::max(worst, std::abs(env::acrobot_energy(p, c) - e0) / std::abs(e0));
        }
        CHECK(worst <= 1e-4);
        // Torque does work, so the same check must fail when it is applied.
        env::AcrobotCoords d{1.0, 0.5, 0.0, 0.0};
        for (int i = 0; i < 20; ++i) d = env::acrobot_integrate(p, d, 1.0);
        CHECK(std::abs(env::acrobot_energy(p, d) - e0) / std::abs(e0) > 1e-3);
    }

    TEST_CASE("acrobot observations stay on the circle; goal and cost") {
        const env::AcrobotParams p;
        const auto m = env::acrobot_model(p);
        Rng rng(4);
        State s = env::acrobot_observation({0.1, -0.1, 0.0, 0.0});
        for (int i = 0; i < 500; ++i) {
            s = m.sample_next(s, rng.index(3), rng);
            CHECK(std::abs(s[0] * s[0] + s[1] * s[1] - 1.0) <= 1e-12);
            CHECK(std::abs(s[2] * s[2] + s[3] * s[3] - 1.0) <= 1e-12);
            CHECK(std::abs(s[4]) <= p.max_vel_1);
            CHECK(std::abs(s[5]) <= p.max_vel_2);
        }
        const State up = env::acrobot_observation({M_PI, 0.0, 0.0, 0.0});
        CHECK(env::acrobot_goal(p, up));
        CHECK(m.terminal(up));
        CHECK(m.cost(up, 0) == -1.0);
        CHECK(m.cost(env::acrobot_observation({0.0, 0.0, 0.0, 0.0}), 0) == 0.0);
        const auto back = env::acrobot_coords(env::acrobot_observation({0.3, -1.2, 2.0, -3.0}));
        CHECK(back[0] == doctest::Approx(0.3));
        CHECK(back[1] == doctest::Approx(-1.2));
    }
}
