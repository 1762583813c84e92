#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "hermite.hpp"
#include "rng.hpp"
#include "support/gauss_hermite.hpp"

using namespace gmclab;

TEST_CASE("explicit coefficients match the factorial formula") {
    const auto& ws = HermiteWorkspace::shared();
    for (int k = 0; k <= 20; ++k) {
        for (int m = 0; m <= k / 2; ++m) {
            // k! (-1)^m / (m! (k-2m)! 2^m), assembled in double
            double v = 1.0;
            for (int i = 2; i <= k; ++i) v *= i;
            for (int i = 2; i <= m; ++i) v /= i;
            for (int i = 2; i <= k - 2 * m; ++i) v /= i;
            v /= std::pow(2.0, m);
            if (m % 2 == 1) v = -v;
            CHECK(double(ws.coeff_exact(k, m)) == doctest::Approx(v).epsilon(1e-12));
        }
    }
}

TEST_CASE("hermite_eval frozen values") {
    CHECK(hermite_eval(0, 7.3) == 1.0);
    CHECK(hermite_eval(2, 0.0) == -1.0);
    CHECK(hermite_eval(3, 2.0) == 2.0);
    CHECK(hermite_eval(10, 3.0) == 9504.0);
    CHECK(hermite_eval(12, 3.0) == -67608.0);
    CHECK(hermite_eval(20, -5.0) == doctest::Approx(-315236992800.0).epsilon(1e-12));
    // recurrence-only regime
    CHECK(hermite_eval(30, 10.0) == doctest::Approx(4.583591880837225e26).epsilon(1e-12));
}

TEST_CASE("recurrence and explicit sum agree to 1e-10 relative, k<=30, |x|<=10") {
    HermiteWorkspace ws(30);
    for (int k = 0; k <= 30; ++k) {
        for (int i = 0; i < 64; ++i) {
            double x = -10.0 + 20.0 * i / 63.0;
            double a = ws.eval_explicit(k, x);
            double b = hermite_recurrence(k, x);
            double scale = std::max({std::abs(a), std::abs(b), 1.0});
            CHECK(std::abs(a - b) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("orthogonality under 64-node Gauss-Hermite") {
    testsupport::GaussHermite gh(64);
    for (int j = 0; j <= 10; ++j) {
        for (int k = j; k <= 10; ++k) {
            double v = gh.expect([&](double x) { return hermite_eval(j, x) * hermite_eval(k, x); });
            double expected = 0.0;
            if (j == k) {
                expected = 1.0;
                for (int m = 2; m <= k; ++m) expected *= m;
            }
            CHECK(v == doctest::Approx(expected).epsilon(0).scale(1).margin(1e-8 * std::max(1.0, expected)));
        }
    }
}

TEST_CASE("generating-function residuals") {
    CHECK(generating_series_residual(0.0, 1.5, 4, 0) == 0.0);
    CHECK(generating_series_residual(1.0, 0.5, 0, 60) < 1e-12);
    CHECK(generating_series_residual(0.7, -1.2, 3, 60) < 1e-12);
}

TEST_CASE("generating-function residual decreases in K past 2(|t|+|x|)^2") {
    for (double t : {1.0, 2.0, -1.5}) {
        for (double x : {0.5, -2.0, 3.0}) {
            int k0 = int(2.0 * (std::abs(t) + std::abs(x)) * (std::abs(t) + std::abs(x))) + 1;
            double prev = generating_series_residual(t, x, 0, k0);
            for (int K = k0 + 4; K <= k0 + 24; K += 4) {
                double r = generating_series_residual(t, x, 0, K);
                CHECK(r <= prev + 1e-15);
                prev = r;
            }
        }
    }
}

TEST_CASE("umbral identities") {
    CHECK(umbral_residual(Umbral::mix, 5, 1.0, 0.3, 9.0) == 0.0);
    CHECK(umbral_residual(Umbral::shift, 6, 0.0, 0.0, 1.1) == 0.0);
    CHECK(umbral_residual(Umbral::scale, 8, 0.6, -0.4, 0.0) < 1e-10);

    Rng rng(2024, 0);
    for (int trial = 0; trial < 100; ++trial) {
        int k = int(rng.next_double() * 21);
        double rho = 2.0 * rng.next_double() - 1.0;
        double u = 6.0 * rng.next_double() - 3.0;
        double v = 6.0 * rng.next_double() - 3.0;
        CHECK(umbral_residual(Umbral::mix, k, rho, u, v) < 1e-10);
        CHECK(umbral_residual(Umbral::shift, k, rho, u, v) < 1e-10);
        CHECK(umbral_residual(Umbral::scale, k, rho, u, v) < 1e-10);
    }
}

TEST_CASE("Mehler bound") {
    auto b0 = mehler_bound(0, 0.0, 0.5);
    CHECK(b0.bound == doctest::Approx(std::pow(0.75, -0.25)).epsilon(1e-12));
    CHECK(b0.holds);
    CHECK(mehler_bound(12, 3.0, 0.9).holds);
    CHECK(mehler_bound(20, -5.0, 0.99).holds);
    CHECK_THROWS_AS(mehler_bound(3, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mehler_bound(3, 1.0, 0.0), std::invalid_argument);

    Rng rng(99, 1);
    for (int trial = 0; trial < 10000; ++trial) {
        int k = int(rng.next_double() * 21);
        double x = 12.0 * rng.next_double() - 6.0;
        double rho = 0.01 + 0.98 * rng.next_double();
        CHECK(mehler_bound(k, x, rho).holds);
    }
}

TEST_CASE("wick_power_exp trivial anchors") {
    CHECK(wick_power_exp(0.0, {0, 0.0, 1.0}, WickMethod::closed) == cplx(1.0));
    // z = sigma^2 with k=1, gamma=1 puts the shifted argument at 0
    for (double s : {0.7, 1.0, 1.9}) {
        auto v = wick_power_exp(s * s, {1, 1.0, s}, WickMethod::closed);
        CHECK(std::abs(v) < 1e-12 * std::exp(s * s / 2.0));
    }
    // closed with gamma=0 reduces to sigma^k He_k(z/sigma)
    for (int k : {0, 1, 2, 5}) {
        double s = 1.3, z = 0.8;
        auto v = wick_power_exp(z, {k, 0.0, s}, WickMethod::closed);
        CHECK(v.real() == doctest::Approx(std::pow(s, k) * hermite_eval(k, z / s)).epsilon(1e-12));
        CHECK(v.imag() == 0.0);
    }
}

TEST_CASE("wick_power_exp three methods agree on the stated box") {
    CHECK_THROWS_AS(wick_power_exp(0.0, {1, 0.5, 0.0}, WickMethod::closed), std::invalid_argument);

    auto gap = [](cplx a, cplx b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    };
    // spec example
    {
        WickTriple w{3, 0.8, 1.1};
        auto c = wick_power_exp(1.2, w, WickMethod::closed);
        auto s = wick_power_exp(1.2, w, WickMethod::series);
        CHECK(gap(c, s) < 1e-9);
    }
    Rng rng(7, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        int k = int(rng.next_double() * 11);
        double sigma = 0.3 + 1.7 * rng.next_double();
        double gmod = 4.0 * rng.next_double() / sigma;
        double garg = 2.0 * M_PI * rng.next_double();
        cplx gamma = gmod * cplx(std::cos(garg), std::sin(garg));
        double z = (12.0 * rng.next_double() - 6.0) * sigma;
        WickTriple w{k, gamma, sigma};
        auto a = wick_power_exp(z, w, WickMethod::closed);
        auto b = wick_power_exp(z, w, WickMethod::series);
        auto c = wick_power_exp(z, w, WickMethod::derivative);
        CHECK(gap(a, b) < 1e-9);
        CHECK(gap(a, c) < 1e-9);
        CHECK(gap(b, c) < 1e-9);
    }
}

TEST_CASE("gauss_expect_hermite closed forms vs quadrature oracle") {
    CHECK(gauss_expect_hermite(1, 0.5, 0.0) == 0.0);
    CHECK(gauss_expect_hermite(2, 0.0, 1.0) == 0.0);  // He_2(1) = 0
    CHECK_THROWS_AS(gauss_expect_hermite(2, 1.0, 0.5), std::invalid_argument);

    testsupport::GaussHermite gh(64);
    Rng rng(11, 4);
    for (int trial = 0; trial < 50; ++trial) {
        int k = int(rng.next_double() * 9);
        double s = 1.9 * rng.next_double() - 0.95;
        double m = 6.0 * rng.next_double() - 3.0;
        double closed = gauss_expect_hermite(k, s, m);
        double quad = gh.expect([&](double x) { return hermite_eval(k, s * x + m); });
        CHECK(std::abs(closed - quad) < 1e-8);
    }
    // parity: E[He_k(sigma X)] = 0 for odd k
    for (int k : {1, 3, 5, 7}) CHECK(gauss_expect_hermite(k, 0.4, 0.0) == 0.0);
}

TEST_CASE("gauss_expect_hermite_pair vs 2D quadrature") {
    testsupport::GaussHermite gh(64);
    {
        double closed = gauss_expect_hermite_pair(3, 0.4, 0.2, 0.3, -0.1, 0.7);
        double quad = gh.expect2(
            [&](double x1, double x2) {
                return hermite_eval(3, 0.4 * x1 + 0.2) * hermite_eval(3, 0.3 * x2 - 0.1);
            },
            0.7);
        CHECK(std::abs(closed - quad) < 1e-8);
    }
    Rng rng(13, 5);
    for (int trial = 0; trial < 50; ++trial) {
        int k = int(rng.next_double() * 9);
        double s1 = 1.9 * rng.next_double() - 0.95;
        double s2 = 1.9 * rng.next_double() - 0.95;
        double m1 = 6.0 * rng.next_double() - 3.0;
        double m2 = 6.0 * rng.next_double() - 3.0;
        double rho = 2.0 * rng.next_double() - 1.0;
        double closed = gauss_expect_hermite_pair(k, s1, m1, s2, m2, rho);
        double quad = gh.expect2(
            [&](double x1, double x2) {
                return hermite_eval(k, s1 * x1 + m1) * hermite_eval(k, s2 * x2 + m2);
            },
            rho);
        CHECK(std::abs(closed - quad) < 1e-8);
    }
}

TEST_CASE("wick_pair_moment anchors and identities") {
    CHECK(wick_pair_moment(0, 0, 0.0, 0.0, 0.8, 1e-14) == cplx(1.0));
    CHECK(wick_pair_moment(2, 2, 0.0, 0.0, 0.5, 1e-14).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(wick_pair_moment(0, 0, 0.0, 0.0, 0.5, 0.0), std::invalid_argument);

    // k! cov^k for j=k, gamma=0
    for (int k : {0, 1, 3, 6}) {
        double kfac = 1.0;
        for (int m = 2; m <= k; ++m) kfac *= m;
        double cov = -0.3;
        auto v = wick_pair_moment(k, k, 0.0, 0.0, cov, 1e-14);
        CHECK(v.real() == doctest::Approx(kfac * std::pow(cov, k)).epsilon(1e-13));
    }

    // wick exponential covariance: (0,0,g,g',C) = e^{g g' C}
    Rng rng(17, 6);
    for (int trial = 0; trial < 200; ++trial) {
        cplx g1(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
        cplx g2(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
        double cov = 4.0 * rng.next_double() - 2.0;
        auto v = wick_pair_moment(0, 0, g1, g2, cov, 1e-16);
        auto expected = std::exp(g1 * g2 * cov);
        CHECK(std::abs(v - expected) <= 1e-12 * std::abs(expected));
    }

    // (j=1,k=1, gamma1=gamma2=0.5, cov=1) vs 2D quadrature of the integrand
    {
        testsupport::GaussHermite gh(64);
        double g = 0.5, cov = 1.0;
        // X,Y standard (sigma=1), Cov = cov = rho here
        auto wick1 = [&](double x) {
            return (x - g) * std::exp(g * x - g * g / 2.0);  // sigma=1: He_1(x-g) e^{gx-g^2/2}
        };
        double quad = gh.expect2([&](double x, double y) { return wick1(x) * wick1(y); }, cov);
        auto v = wick_pair_moment(1, 1, g, g, cov, 1e-14);
        CHECK(std::abs(v.real() - quad) < 1e-8);
        CHECK(std::abs(v.imag()) < 1e-14);
    }
}
