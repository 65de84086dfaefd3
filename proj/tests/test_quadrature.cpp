#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/quadrature.hpp"
#include "oracles.hpp"

using namespace fracblow;

TEST_CASE("inverse square root over [0,1]") {
    auto f = [](double t) { return 1.0 / std::sqrt(t); };
    QuadResult r = integrate(f, 0.0, 1.0, SingularitySpec::endpoints(-0.5, 0.0), 1e-10);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.error_estimate >= 0.0);
    CHECK(r.evaluations >= 1);
}

TEST_CASE("algebraic tail over [0,inf)") {
    auto f = [](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); };
    QuadResult r = integrate_to_inf(f, 0.0, SingularitySpec::with_tail(0.0, 2.0), 1e-10);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("kernel-profile integrand against a graded Riemann oracle") {
    // f(t) = t^(a-1) / (1+t)^(N/2), alpha = 0.5, N = 2, over [0,1]
    auto f = [](double t) { return std::pow(t, -0.5) / (1.0 + t); };
    const double oracle = oracles::riemann_graded_left(f, 0.0, 1.0, 10'000'000, 4.0);
    QuadResult r = integrate(f, 0.0, 1.0, SingularitySpec::endpoints(-0.5, 0.0), 1e-10);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-6));
    // the closed form pi/2 pins both routes
    CHECK(r.value == doctest::Approx(M_PI / 2.0).epsilon(1e-10));
}

TEST_CASE("linearity in the integrand") {
    auto f = [](double t) { return std::exp(-t) * std::cos(3.0 * t); };
    QuadResult r1 = integrate(f, 0.0, 2.0, SingularitySpec::regular(), 1e-11);
    auto cf = [&](double t) { return 7.25 * f(t); };
    QuadResult r2 = integrate(cf, 0.0, 2.0, SingularitySpec::regular(), 1e-11);
    CHECK(r2.value == doctest::Approx(7.25 * r1.value).epsilon(2e-11));
}

TEST_CASE("halving the tolerance never worsens the reported error") {
    auto f = [](double t) { return std::pow(t, -0.4) * std::cos(t); };
    double prev = 1e300;
    for (double tol = 1e-4; tol >= 1e-12; tol *= 0.5) {
        QuadResult r = integrate(f, 0.0, 3.0, SingularitySpec::endpoints(-0.4, 0.0), tol);
        CHECK(r.error_estimate <= prev * (1.0 + 1e-12));
        prev = r.error_estimate;
    }
}

TEST_CASE("splitting the interval is additive") {
    auto f = [](double t) { return std::pow(t, -0.3) / (1.0 + t * t); };
    for (double c : {0.2, 0.5, 0.8}) {
        QuadResult whole = integrate(f, 0.0, 1.0, SingularitySpec::endpoints(-0.3, 0.0), 1e-11);
        QuadResult left = integrate(f, 0.0, c, SingularitySpec::endpoints(-0.3, 0.0), 1e-11);
        QuadResult right = integrate(f, c, 1.0, SingularitySpec::regular(), 1e-11);
        CHECK(whole.value == doctest::Approx(left.value + right.value).epsilon(5e-11));
    }
}

TEST_CASE("invalid specs are rejected") {
    auto f = [](double t) { return t; };
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, SingularitySpec::endpoints(-1.5, 0.0), 1e-8), Error);
    CHECK_THROWS_AS(integrate_to_inf(f, 0.0, SingularitySpec::with_tail(0.0, 0.9), 1e-8), Error);
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, SingularitySpec::regular(), -1.0), Error);
}

TEST_CASE("refinement budget exhaustion reports nonconvergence") {
    // an undeclared interior singularity the engine cannot meet at this tol
    auto f = [](double t) { return 1.0 / std::abs(t - 0.37281); };
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, SingularitySpec::regular(), 1e-12), Error);
}

TEST_CASE("disk area and a radial singularity in polar form") {
    auto one = [](double, double) { return 1.0; };
    QuadResult r = integrate_2d_polar(one, SingularitySpec::regular(), 1e-10);
    CHECK(r.value == doctest::Approx(M_PI).epsilon(1e-9));

    auto f = [](double rr, double) { return 1.0 / std::sqrt(rr); };
    QuadResult s = integrate_2d_polar(f, SingularitySpec::endpoints(-0.5, 0.0), 1e-9);
    CHECK(s.value == doctest::Approx(2.0 * M_PI * (2.0 / 3.0)).epsilon(1e-8));
}
