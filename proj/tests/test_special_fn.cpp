#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <random>

#include "ncbm/special_fn.hpp"

using namespace ncbm;

namespace {
const double kPi = 3.14159265358979323846;

// Si(x) by its power series, fine for small x
double sine_integral(double x) {
    double term = x, sum = x;
    for (int k = 1; k < 40; ++k) {
        term *= -x * x / ((2.0 * k) * (2.0 * k + 1));
        sum += term / (2 * k + 1);
    }
    return sum;
}
}  // namespace

TEST_CASE("heat kernel values and symmetry") {
    CHECK(heat_kernel(1, 0, 0) == doctest::Approx(0.3989422804).epsilon(1e-10));
    CHECK(heat_kernel(2, 1, 1) == doctest::Approx(1 / std::sqrt(4 * kPi)).epsilon(1e-14));
    CHECK(heat_kernel(0.5, 0, 1) == heat_kernel(0.5, 1, 0));
    CHECK_THROWS_AS(heat_kernel(0, 0, 0), domain_error);
    CHECK_THROWS_AS(heat_kernel(-1, 0, 0), domain_error);
}

TEST_CASE("heat kernel integrates to one") {
    for (double t : {0.1, 1.0, 10.0}) {
        auto r = integrate_gk([&](double y) { return heat_kernel(t, 0.3, y); }, 0.3 - 40 * std::sqrt(t),
                              0.3 + 40 * std::sqrt(t), 1e-14, 1e-13);
        CHECK(std::abs(r.value - 1) < 1e-10);
    }
}

TEST_CASE("hermite small cases") {
    CHECK(hermite(0, 1.7) == 1.0);
    CHECK(hermite(1, 3) == 6.0);
    CHECK(hermite(2, 1) == 2.0);
    CHECK(hermite(3, 1) == -4.0);
}

TEST_CASE("hermite recurrence") {
    // exact at small integers
    for (int x = -3; x <= 3; ++x)
        for (int l = 1; l < 12; ++l)
            CHECK(hermite(l + 1, x) == 2.0 * x * hermite(l, x) - 2.0 * l * hermite(l - 1, x));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-10, 10);
    for (int s = 0; s < 200; ++s) {
        double x = U(rng);
        for (int l = 1; l < 60; ++l) {
            double lhs = hermite(l + 1, x), rhs = 2 * x * hermite(l, x) - 2.0 * l * hermite(l - 1, x);
            double scale = std::abs(2 * x * hermite(l, x)) + std::abs(2.0 * l * hermite(l - 1, x));
            CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("phi values") {
    CHECK(phi(0, 0) == doctest::Approx(0.7511255444).epsilon(1e-10));
    CHECK(phi(1, 0) == 0.0);
    auto r = integrate_gk([](double x) { return phi(3, x) * phi(3, x); }, -20, 20, 1e-14, 1e-13);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    // large index through the log-scaled path stays finite
    CHECK(std::isfinite(phi(400, 3.0)));
    CHECK(std::abs(phi(400, 3.0)) < 1.0);
}

TEST_CASE("phi orthonormality") {
    std::vector<double> xs, ws;
    composite_gl(-25, 25, 100, 20, xs, ws);
    for (int k = 0; k <= 12; ++k)
        for (int l = 0; l <= 12; ++l) {
            double s = 0;
            for (size_t i = 0; i < xs.size(); ++i) s += ws[i] * phi(k, xs[i]) * phi(l, xs[i]);
            CHECK(std::abs(s - (k == l)) < 1e-8);
        }
}

TEST_CASE("phi table agrees with single evaluations") {
    for (double x : {-7.0, -1.3, 0.0, 2.2, 11.0}) {
        auto v = phi_all(30, x);
        for (int l = 0; l <= 30; ++l) CHECK(v[l] == doctest::Approx(phi(l, x)).epsilon(1e-12).scale(1e-300));
    }
}

TEST_CASE("psi is the running integral of phi") {
    for (double x : {-3.0, 0.0, 1.5}) {
        auto p = psi_all(8, x);
        for (int l = 0; l <= 8; ++l) {
            auto r = integrate_gk([&](double u) { return phi(l, u); }, -30, x, 1e-14, 1e-13);
            CHECK(std::abs(p[l] - r.value) < 1e-11);
        }
    }
    auto pinf = psi_inf(8);
    for (int l = 0; l <= 8; ++l) {
        auto r = integrate_gk([&](double u) { return phi(l, u); }, -30, 30, 1e-14, 1e-13);
        CHECK(std::abs(pinf[l] - r.value) < 1e-11);
    }
}

TEST_CASE("hermite derivative identity") {
    CHECK(hermite_derivative_identity(1, 0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(hermite_derivative_identity(2, 1) == doctest::Approx(std::exp(-0.5) * -4.0).epsilon(1e-13));
    CHECK(hermite_derivative_identity(1, 2) == doctest::Approx(std::exp(-2.0) * hermite(2, 2)).epsilon(1e-13));
    for (int l = 1; l <= 40; ++l)
        for (double y = -8; y <= 8; y += 0.5) {
            double direct = std::exp(-y * y / 2) * hermite(l + 1, y);
            double scale = std::max(1.0, std::abs(direct));
            CHECK(std::abs(hermite_derivative_identity(l, y) - direct) <= 1e-10 * scale);
        }
}

TEST_CASE("airy at zero and known limits") {
    double ai0 = std::pow(3.0, -2.0 / 3) / std::tgamma(2.0 / 3);
    CHECK(airy_ai(0) == doctest::Approx(ai0).epsilon(1e-14));
    CHECK(airy_ai(0) == doctest::Approx(0.3550280539).epsilon(1e-10));
    double x = 25;
    double asym = std::cos(2 * std::pow(x, 1.5) / 3 - kPi / 4) / (std::sqrt(kPi) * std::pow(x, 0.25));
    CHECK(std::abs(airy_ai(-x) - asym) < 1e-3 * std::abs(asym));
    CHECK(airy_ai(10) > 0);
    CHECK(airy_ai(10) < 1e-9);
}

TEST_CASE("airy against boost on [-20, 20]") {
    double worst = 0, worstp = 0;
    for (double z = -20; z <= 20; z += 0.01) {
        worst = std::max(worst, std::abs(airy_ai(z) - boost::math::airy_ai(z)));
        double scale = std::max(1.0, std::pow(std::abs(z), 0.25));
        worstp = std::max(worstp, std::abs(airy_ai_prime(z) - boost::math::airy_ai_prime(z)) / scale);
    }
    CHECK(worst < 1e-10);
    CHECK(worstp < 1e-10);
}

TEST_CASE("airy ODE residual") {
    // plain central differences at h = 1e-3 carry h^2 Ai''''/12 ~ 2e-6 near
    // z = -10, so combine h and 2h (Richardson) to get below 1e-7
    const double h = 1e-3;
    auto d2 = [&](double z, double s) { return (airy_ai(z + s) - 2 * airy_ai(z) + airy_ai(z - s)) / (s * s); };
    for (double z = -10; z <= 5; z += 0.05) {
        double rich = (4 * d2(z, h) - d2(z, 2 * h)) / 3;
        CHECK(std::abs(rich - z * airy_ai(z)) < 1e-7);
    }
}

TEST_CASE("airy integral") {
    for (double x : {-15.0, -3.0, 0.0, 2.0, 8.0}) {
        auto r = integrate_gk([](double u) { return airy_ai(u); }, 0, x, 1e-14, 1e-13);
        CHECK(std::abs(airy_ai_integral(x) - r.value) < 1e-11);
    }
    // int_0^inf Ai = 1/3
    CHECK(airy_ai_integral(40) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("quadrature examples") {
    QuadratureSpec one;
    auto r1 = integrate([](double) { return 1.0; }, one);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r1.converged);

    QuadratureSpec g;
    g.a = -10;
    g.b_infinite = true;
    g.cutoff = 10;
    g.abs_tol = 1e-14;
    auto r2 = integrate([](double x) { return std::exp(-x * x); }, g);
    CHECK(std::abs(r2.value - std::sqrt(kPi)) < 1e-12);

    QuadratureSpec th = g;
    th.rule = QuadRule::tanh_sinh;
    auto r3 = integrate([](double x) { return std::exp(-x * x); }, th);
    CHECK(std::abs(r3.value - std::sqrt(kPi)) < 1e-12);

    QuadratureSpec f;
    f.rule = QuadRule::filon_oscillatory;
    f.a = 1;
    f.b_infinite = true;
    f.cutoff = 1;
    f.half_period = kPi;
    auto r4 = integrate([](double x) { return std::sin(x) / x; }, f);
    double exact = kPi / 2 - sine_integral(1.0);
    CHECK(exact == doctest::Approx(0.6247132564).epsilon(1e-10));
    CHECK(std::abs(r4.value - exact) < 1e-10);
    CHECK(r4.converged);
}

TEST_CASE("quadrature spec validation and non-convergence flag") {
    QuadratureSpec bad;
    bad.abs_tol = 0;
    CHECK_THROWS_AS(bad.validate(), domain_error);
    QuadratureSpec bad2;
    bad2.max_subdivisions = 0;
    CHECK_THROWS_AS(bad2.validate(), domain_error);
    QuadratureSpec bad3;
    bad3.b_infinite = true;
    bad3.cutoff = -1;
    CHECK_THROWS_AS(bad3.validate(), domain_error);

    // a singular integrand with a tiny budget has to say so
    auto r = integrate_gk([](double x) { return 1 / std::sqrt(std::abs(x - 0.3)); }, 0, 1, 1e-15, 1e-15, 2);
    CHECK_FALSE(r.converged);
    CHECK(r.error > 0);
}

TEST_CASE("gauss legendre and cumulative rule") {
    std::vector<double> x, w;
    for (int n : {1, 4, 16, 48}) {
        gauss_legendre(n, x, w);
        double s = 0, m2 = 0;
        for (int i = 0; i < n; ++i) s += w[i], m2 += w[i] * x[i] * x[i];
        CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
        if (n > 1) CHECK(m2 == doctest::Approx(2.0 / 3).epsilon(1e-14));
    }
    CumulativeGL cg(-1, 2, 5, 8);
    std::vector<double> f(cg.x.size());
    for (size_t i = 0; i < f.size(); ++i) f[i] = 3 * cg.x[i] * cg.x[i];
    auto c = cg.cumulative(f);
    for (size_t i = 0; i < f.size(); ++i) CHECK(c[i] == doctest::Approx(std::pow(cg.x[i], 3) + 1).epsilon(1e-12));
}
