#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "convsep/errors.hpp"
#include "convsep/kernel.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace convsep;

namespace {

RealVector vec(std::initializer_list<double> v) {
    RealVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("sigma_eval values and derivative") {
    const SigmaValue zero = sigma_eval(0.0);
    CHECK(zero.value == 0.0);
    CHECK(zero.derivative == doctest::Approx(1.1283791670955126).epsilon(1e-15));

    const SigmaValue big = sigma_eval(10.0);
    CHECK(std::abs(big.value - 1.0) < 1e-12);
    CHECK(big.derivative < 1e-40);

    for (double x : {-2.5, -0.7, 0.3, 1.9}) {
        CHECK(sigma_eval(-x).value == -sigma_eval(x).value);
        CHECK(sigma_eval(x).derivative == doctest::Approx(2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x)));
    }
}

TEST_CASE("erf agrees with the series oracle to 10 digits") {
    CHECK(std::abs(sigma_eval(0.5).value - oracle::erf_series(0.5)) < 1e-14);
    for (double x = -3.0; x <= 3.0; x += 0.125) {
        const double ref = oracle::erf_series(x);
        CHECK(std::abs(sigma_eval(x).value - ref) <= 1e-15 + 1e-10 * std::abs(ref));
        CHECK(std::abs(sigma_eval(x).value - ref) < 1e-15);
    }
}

TEST_CASE("v_sigma closed-form examples") {
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(v_sigma(vec({s, 0}), vec({s, 0})) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(v_sigma(vec({1, 0}), vec({0, 1})) == 0.0);
    CHECK_THROWS_AS(v_sigma(vec({1, 0}), vec({1, 0, 0})), ContractError);
}

TEST_CASE("v_sigma matches Monte Carlo for u=(1,0), v=(1,1)") {
    const RealVector u = vec({1, 0});
    const RealVector v = vec({1, 1});
    const KernelEstimate est =
        mc_expect([&](const RealVector& x) { return std::erf(u.dot(x)) * std::erf(v.dot(x)); }, 2, 1000000, 7);
    CHECK(oracle::within_se(v_sigma(u, v), est.value, est.std_error));
    CHECK(v_sigma(u, v) == doctest::Approx(0.3457).epsilon(1e-3));
}

TEST_CASE("v_sigma symmetry, sign and range") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const int d = 1 + i % 6;
        const RealVector u = 3.0 * gaussian_vector(d, rng);
        const RealVector v = 3.0 * gaussian_vector(d, rng);
        const double k = v_sigma(u, v);
        CHECK(k == v_sigma(v, u));
        CHECK(k > -1.0);
        CHECK(k < 1.0);
        const double dot = u.dot(v);
        if (dot > 0) CHECK(k > 0.0);
        if (dot < 0) CHECK(k < 0.0);
    }
}

TEST_CASE("v_sigma(u,u) increases with the norm") {
    const RealVector dir = vec({0.6, 0.8});
    double prev = 0.0;
    for (double r = 0.05; r < 50.0; r *= 1.3) {
        const double k = v_sigma(r * dir, r * dir);
        CHECK(k > prev);
        CHECK(k < 1.0);
        prev = k;
    }
}

TEST_CASE("v_sigma stays finite at large equal arguments") {
    const RealVector u = vec({1e7, -3e7, 2e7});
    const double k = v_sigma(u, u);
    CHECK(std::isfinite(k));
    CHECK(k <= 1.0);
    CHECK(k > 0.999);
}

TEST_CASE("small-kernel bound for nearly orthogonal or short vectors") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int tested = 0;
    int linear_bound_broken = 0;
    for (int i = 0; i < 4000; ++i) {
        const int d = 2 + i % 5;
        const RealVector u = (0.5 + 5.0 * unit(rng)) * random_direction(d, rng);
        RealVector w = (0.01 + 5.0 * unit(rng)) * random_direction(d, rng);
        const double c = unit(rng);
        const double cosang = std::abs(w.dot(u)) / (w.norm() * u.norm());
        const bool short_w = w.norm() <= c / std::sqrt(2.0);
        if (cosang < c || short_w) {
            const double v = std::abs(v_sigma(w, u));
            CHECK(v < 2.0 * std::asin(c) / std::numbers::pi + 1e-15);
            CHECK(v <= c);
            if (v >= 2.0 * c / std::numbers::pi) ++linear_bound_broken;
            ++tested;
        }
    }
    CHECK(tested > 1000);
    // The sharper 2c/pi form does not hold: asin(c) exceeds c on (0, 1].
    CHECK(linear_bound_broken > 0);
}

TEST_CASE("phi_map examples") {
    CHECK(phi_map(vec({0, 0})).norm() == 0.0);
    const RealVector p = phi_map(vec({1, 0}));
    CHECK(p[0] == doctest::Approx(0.60653).epsilon(1e-5));
    CHECK(p[1] == 0.0);
    const RealVector a = 5.0 * vec({0.6, 0.8});
    CHECK(phi_map(a).norm() == doctest::Approx(5.0 * std::exp(-12.5)).epsilon(1e-12));
    CHECK(phi_map(a).norm() == doctest::Approx(1.86e-5).epsilon(1e-2));
}

TEST_CASE("phi_map norm peaks at |a| = 1") {
    double best = 0.0;
    double best_r = 0.0;
    for (double r = 0.0; r <= 4.0; r += 0.001) {
        const double n = phi_map(vec({r, 0.0})).norm();
        if (n > best) {
            best = n;
            best_r = r;
        }
        CHECK(n <= std::exp(-0.5) + 1e-15);
    }
    CHECK(best_r == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(best == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("phi_map output is parallel to its input") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const RealVector a = 2.0 * gaussian_vector(4, rng);
        const RealVector p = phi_map(a);
        CHECK((p - p.dot(a) / a.squaredNorm() * a).norm() < 1e-14);
        CHECK(p.dot(a) >= 0.0);
    }
}

TEST_CASE("cos_gaussian_mean examples") {
    CHECK(cos_gaussian_mean(RealVector::Zero(3)) == 1.0);
    CHECK(cos_gaussian_mean(vec({1, 1})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(cos_gaussian_mean(vec({1, 1})) == doctest::Approx(0.36788).epsilon(1e-5));

    std::mt19937_64 rng(21);
    const RealVector z = 0.4 * gaussian_vector(10, rng);
    const KernelEstimate est = mc_expect([&](const RealVector& x) { return std::cos(z.dot(x)); }, 10, 1000000, 22);
    CHECK(oracle::within_se(cos_gaussian_mean(z), est.value, est.std_error));

    double prev = 2.0;
    for (double r = 0.0; r < 5.0; r += 0.1) {
        const double m = cos_gaussian_mean(vec({r, 0}));
        CHECK(m < prev);
        CHECK(m > 0.0);
        prev = m;
    }
}

TEST_CASE("gauss_hermite rule structure") {
    for (int order : {2, 8, 64, 128, 257, 400}) {
        const QuadratureRule& rule = gauss_hermite(order);
        REQUIRE(rule.order == order);
        double total = 0.0;
        for (int i = 0; i < order; ++i) {
            total += rule.weights[i];
            // Extreme tail weights underflow to zero past order ~300.
            CHECK(rule.weights[i] >= 0.0);
            if (order <= 128) CHECK(rule.weights[i] > 0.0);
            if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
            CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[order - 1 - i]).epsilon(1e-12));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    }
    CHECK_THROWS_AS(gauss_hermite(1), ContractError);
}

TEST_CASE("quadrature reproduces Gaussian moments") {
    const QuadratureRule& rule = gauss_hermite();
    CHECK(expect_quadrature([](double y) { return y * y; }, rule) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(expect_quadrature([](double y) { return std::pow(y, 4); }, rule) == doctest::Approx(3.0).epsilon(1e-13));
    // Exact up to degree 2n - 1: E[y^(2m)] = (2m - 1)!!
    const QuadratureRule& small = gauss_hermite(6);
    double dfact = 1.0;
    for (int m = 1; m <= 5; ++m) {
        dfact *= 2 * m - 1;
        CHECK(expect_quadrature([m](double y) { return std::pow(y, 2 * m); }, small) ==
              doctest::Approx(dfact).epsilon(1e-12));
    }
    CHECK(std::abs(expect_quadrature([](double y) { return std::pow(y, 11); }, small)) < 1e-9);
    CHECK(expect_quadrature([](double a, double b) { return a * a * b * b; }, rule) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quadrature converges under order doubling for erf integrands") {
    auto f = [](double y) {
        const SigmaValue s = sigma_eval(1.3 * y);
        return s.value * s.derivative * y;
    };
    const double q64 = expect_quadrature(f, gauss_hermite(64));
    const double q128 = expect_quadrature(f, gauss_hermite(128));
    const double q256 = expect_quadrature(f, gauss_hermite(256));
    CHECK(std::abs(q128 - q256) < 1e-13);
    CHECK(std::abs(q64 - q256) > std::abs(q128 - q256));
    auto g = [](double a, double b) { return std::erf(0.8 * a + 0.3 * b) * std::erf(-0.2 * a + 1.1 * b); };
    CHECK(std::abs(expect_quadrature(g, gauss_hermite(64)) - expect_quadrature(g, gauss_hermite(128))) < 1e-10);
}

TEST_CASE("quadrature of erf(y) erf'(y) y agrees with Monte Carlo") {
    auto f = [](double y) {
        const SigmaValue s = sigma_eval(y);
        return s.value * s.derivative * y;
    };
    const double q = expect_quadrature(f, gauss_hermite());
    const KernelEstimate est = mc_expect([&](const RealVector& x) { return f(x[0]); }, 1, 1000000, 31);
    CHECK(oracle::within_se(q, est.value, est.std_error));
}

TEST_CASE("quadrature and Monte Carlo agree on a battery of integrands") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    int agree = 0;
    const int cases = 12;
    for (int c = 0; c < cases; ++c) {
        const double a = coef(rng);
        const double b = coef(rng);
        const double p = coef(rng);
        const double q = coef(rng);
        auto f = [=](double y1, double y2) {
            return c % 2 ? std::erf(a * y1 + b * y2) * std::erf(p * y1 + q * y2) : std::cos(a * y1 + b * y2);
        };
        const double quad = expect_quadrature(f, gauss_hermite());
        const KernelEstimate est =
            mc_expect([&](const RealVector& x) { return f(x[0], x[1]); }, 2, 200000, 100 + c);
        if (oracle::within_se(quad, est.value, est.std_error)) ++agree;
    }
    CHECK(agree >= cases - 1);
}

TEST_CASE("quadrature rejects non-finite integrands") {
    CHECK_THROWS_AS(expect_quadrature([](double y) { return y > 0 ? 1.0 / 0.0 : 0.0; }, gauss_hermite(8)),
                    EvaluationError);
    CHECK_THROWS_AS(
        expect_quadrature([](double, double) { return std::numeric_limits<double>::quiet_NaN(); }, gauss_hermite(4)),
        EvaluationError);
}

TEST_CASE("mc_expect basics") {
    const KernelEstimate c = mc_expect([](const RealVector&) { return 7.0; }, 3, 1000, 1);
    CHECK(c.value == 7.0);
    CHECK(c.std_error == 0.0);
    CHECK(c.n_samples == 1000);
    CHECK(c.seed == 1);

    const std::int64_t n = 100000;
    const KernelEstimate m = mc_expect([](const RealVector& x) { return x[0]; }, 2, n, 2);
    CHECK(std::abs(m.value) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(m.std_error == doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(0.02));

    const KernelEstimate again = mc_expect([](const RealVector& x) { return x[0]; }, 2, n, 2);
    CHECK(again.value == m.value);
    CHECK(again.std_error == m.std_error);

    CHECK_THROWS_AS(mc_expect([](const RealVector&) { return 0.0; }, 2, 1, 0), ContractError);
}

TEST_CASE("mc_expect of the erf product matches v_sigma") {
    std::mt19937_64 rng(51);
    const RealVector u = gaussian_vector(4, rng);
    const RealVector v = gaussian_vector(4, rng);
    const KernelEstimate est =
        mc_expect([&](const RealVector& x) { return std::erf(u.dot(x)) * std::erf(v.dot(x)); }, 4, 1000000, 52);
    CHECK(oracle::within_se(v_sigma(u, v), est.value, est.std_error));
}

TEST_CASE("mc_expect_vector matches scalar runs componentwise") {
    const VectorEstimate v = mc_expect_vector(
        [](const RealVector& x) {
            RealVector out(2);
            out << x[0] * x[0], std::cos(x[1]);
            return out;
        },
        2, 50000, 9);
    const KernelEstimate s0 = mc_expect([](const RealVector& x) { return x[0] * x[0]; }, 2, 50000, 9);
    CHECK(v.value[0] == doctest::Approx(s0.value).epsilon(1e-12));
    CHECK(v.std_error[0] == doctest::Approx(s0.std_error).epsilon(1e-9));
}

TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(1, 1) != derive_seed(1, 2));
    CHECK(derive_seed(1, 1) != derive_seed(2, 1));
    CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
