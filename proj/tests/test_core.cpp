#include "evl/features.hpp"
#include "evl/io/csv.hpp"
#include "evl/io/hash.hpp"
#include "evl/rng.hpp"
#include "evl/value_fn.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace evl;

namespace {

State s1(double x) {
    State s(1);
    s << x;
    return s;
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("rng streams are reproducible and independent of prior draws") {
        Rng a(42), b(42);
        for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
        const Rng root(7);
        Rng used(7);
        for (int i = 0; i < 10; ++i) used.next_u64();
        Rng x = root.substream({3, 1});
        Rng y = used.substream({3, 1});
        CHECK(x.next_u64() == y.next_u64());
        CHECK(root.substream({3, 0}).seed() != root.substream({3, 1}).seed());
        CHECK(root.substream({0, 1}).seed() != root.substream({1, 0}).seed());
    }

    TEST_CASE("rng distributions have the right moments") {
        Rng rng(1);
        const int n = 200000;
        double su = 0, sn = 0, sn2 = 0, se = 0;
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform();
            CHECK_UNARY(u >= 0.0);
            CHECK_UNARY(u < 1.0);
            su += u;
            const double z = rng.normal();
            sn += z;
            sn2 += z * z;
            se += rng.exponential(0.5);
        }
        CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
        CHECK(std::abs(sn / n) < 0.01);
        CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
        CHECK(se / n == doctest::Approx(2.0).epsilon(0.02));
        for (int i = 0; i < 1000; ++i) CHECK(rng.index(7) < 7);
    }

    TEST_CASE("fourier features are bounded and offsets are uniform on [-pi, pi]") {
        RpbfFamily fam;
        fam.omega_variance = 0.01;
        Rng rng(5);
        double mean_b = 0.0;
        const int j = 10000;
        for (int i = 0; i < j; ++i) {
            const auto th = fam.sample(2, rng);
            CHECK_UNARY(std::abs(th.offset) <= M_PI);
            mean_b += th.offset;
            State s(2);
            s << rng.uniform(-50, 50), rng.uniform(-50, 50);
            CHECK_UNARY(std::abs(fam.feature(s, th)) <= 1.0);
        }
        CHECK(std::abs(mean_b / j) < 0.05);
    }

    TEST_CASE("sign features threshold one coordinate") {
        RpbfFamily fam;
        fam.kind = FeatureKind::sign;
        fam.threshold_range = 2.0;
        Rng rng(9);
        for (int i = 0; i < 200; ++i) {
            const auto th = fam.sample(3, rng);
            CHECK((th.omega.array() != 0.0).count() == 1);
            State s = State::Random(3) * 5.0;
            CHECK(std::abs(fam.feature(s, th)) == doctest::Approx(1.0));
        }
    }

    TEST_CASE("input_scale zero removes a coordinate") {
        RpbfFamily fam;
        fam.input_scale = Eigen::Vector2d(0.0, 1.0);
        Rng rng(3);
        const auto th = fam.sample(2, rng);
        State a(2), b(2);
        a << -7.0, 0.3;
        b << 11.0, 0.3;
        CHECK(fam.feature(a, th) == fam.feature(b, th));
    }

    TEST_CASE("kernels are symmetric with PSD Gram matrices") {
        Rng rng(11);
        for (auto kind : {KernelKind::gaussian, KernelKind::laplacian}) {
            const Kernel k{kind, 0.7};
            std::vector<State> pts;
            for (int i = 0; i < 40; ++i) pts.push_back(State::Random(2) * 3.0);
            Eigen::MatrixXd g(40, 40);
            for (int i = 0; i < 40; ++i)
                for (int j = 0; j < 40; ++j) {
                    g(i, j) = k(pts[i], pts[j]);
                    CHECK(std::abs(k(pts[i], pts[j]) - k(pts[j], pts[i])) <= 1e-12);
                }
            CHECK(k(pts[0], pts[0]) == 1.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            CHECK(es.eigenvalues().minCoeff() >= -1e-8);
        }
        // Gaussian convention: param is 1/sigma^2 and the exponent is -|x-y|^2 / (2 sigma^2).
        const Kernel gk{KernelKind::gaussian, 0.01};
        CHECK(gk(s1(0.0), s1(10.0)) == doctest::Approx(std::exp(-0.5)));
    }

    TEST_CASE("value functions evaluate by definition") {
        CHECK(ValueFn::constant(3.5)(s1(1.0)) == 3.5);

        const Kernel k{KernelKind::gaussian, 0.5};
        const ValueFn rk(RkhsBasis{k, {s1(2.0)}}, Eigen::VectorXd::Constant(1, 1.7));
        CHECK(rk(s1(2.0)) == doctest::Approx(1.7 * k(s1(2.0), s1(2.0))).epsilon(1e-15));

        RpbfFamily fam;
        Rng rng(2);
        std::vector<FeatureParam> ps;
        for (int i = 0; i < 6; ++i) ps.push_back(fam.sample(1, rng));
        Eigen::VectorXd w = Eigen::VectorXd::Random(6);
        const ValueFn rp(RpbfBasis{fam, ps}, w);
        for (double x : {-1.0, 0.0, 0.3, 4.0}) {
            double direct = 0.0;
            for (int j = 0; j < 6; ++j) direct += w[j] * std::cos(ps[j].omega.dot(s1(x)) + ps[j].offset);
            CHECK(std::abs(rp(s1(x)) - direct) <= 1e-12);
        }
        CHECK(rp.basis_size() == 6);
        CHECK(rp.kind() == ValueKind::rpbf);
    }

    TEST_CASE("clamp bounds every evaluation") {
        const ValueFn v = ValueFn::constant(250.0, 100.0);
        CHECK(v(s1(0.0)) == 100.0);
        CHECK(v.raw(s1(0.0)) == 250.0);
        const ValueFn nv = ValueFn::constant(-250.0, 100.0);
        CHECK(nv(s1(0.0)) == -100.0);
    }

    TEST_CASE("non-finite evaluation raises a numeric error naming the state") {
        const ValueFn v = ValueFn::constant(std::nan(""));
        try {
            v(s1(1.25));
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("1.25") != std::string::npos);
        }
    }

    TEST_CASE("weights must match the basis") {
        CHECK_THROWS_AS(ValueFn(GridBasis{0.0, 1.0, 5}, Eigen::VectorXd::Zero(4)), ValidationError);
    }

    TEST_CASE("grid interpolation is piecewise linear") {
        Eigen::VectorXd w(3);
        w << 0.0, 10.0, 4.0;
        const ValueFn g(GridBasis{0.0, 2.0, 3}, w);
        CHECK(g(s1(0.5)) == doctest::Approx(5.0));
        CHECK(g(s1(1.5)) == doctest::Approx(7.0));
        CHECK(g(s1(2.0)) == doctest::Approx(4.0));
        CHECK(g(s1(5.0)) == doctest::Approx(4.0));
    }

    TEST_CASE("monomial exponents enumerate total degree") {
        // C(d + p, p) monomials.
        CHECK(monomial_exponents(1, 4).size() == 5);
        CHECK(monomial_exponents(2, 3).size() == 10);
        CHECK(monomial_exponents(4, 2).size() == 15);
        for (const auto& e : monomial_exponents(3, 3)) {
            int total = 0;
            for (int x : e) total += x;
            CHECK(total <= 3);
        }
    }

    TEST_CASE("value function JSON round trip preserves every evaluation exactly") {
        RpbfFamily fam;
        fam.input_scale = Eigen::Vector2d(0.5, 2.0);
        Rng rng(13);
        std::vector<FeatureParam> ps;
        for (int i = 0; i < 4; ++i) ps.push_back(fam.sample(2, rng));
        Eigen::VectorXd w = Eigen::VectorXd::Random(4);
        std::vector<ValueFn> fns = {
            ValueFn(RpbfBasis{fam, ps}, w, 7.0),
            ValueFn(RkhsBasis{Kernel{KernelKind::laplacian, 0.3}, {State::Random(2), State::Random(2)}},
                    Eigen::Vector2d(0.1, -3.0)),
            ValueFn(PolynomialBasis{2, monomial_exponents(2, 2), State::Zero(2), State::Ones(2)},
                    Eigen::VectorXd::Random(6)),
            ValueFn::constant(-2.0, 5.0),
        };
        for (const auto& f : fns) {
            const ValueFn g = value_fn_from_json(nlohmann::json::parse(to_json(f).dump()));
            CHECK(g.kind() == f.kind());
            for (int i = 0; i < 20; ++i) {
                const State s = State::Random(2) * 3.0;
                CHECK(g(s) == f(s));
            }
        }
    }

    TEST_CASE("content hashes match known digests") {
        // git hash-object of "hello\n".
        CHECK(io::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
        CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("csv doubles round trip exactly") {
        Rng rng(4);
        for (int i = 0; i < 1000; ++i) {
            const double x = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
            CHECK(std::stod(io::format_double(x)) == x);
        }
        io::CsvWriter w({"a", "b"});
        w.row({"1", ""});
        const auto rows = io::parse_csv(w.str());
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].size() == 2);
        CHECK(rows[1][1].empty());
        CHECK_THROWS(w.row({"1"}));
    }
}
