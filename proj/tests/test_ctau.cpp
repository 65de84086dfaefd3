#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/ctau.hpp"
#include "oracles.hpp"

using namespace fracblow;

TEST_CASE("the root sits at alpha - 1") {
    CHECK(std::abs(c_tau(FracOrder(0.5), -0.5).value) < 1e-6);
    CHECK(std::abs(c_tau(FracOrder(0.25), -0.75).value) < 1e-6);
}

TEST_CASE("sign change across the root, confirmed by a Riemann oracle") {
    const FracOrder order(0.5);
    const double left = c_tau(order, -0.9).value;
    const double right = c_tau(order, -0.1).value;
    CHECK(left * right < 0.0);
    const double o_left = oracles::c_tau_riemann(0.5, -0.9, 1'000'000);
    const double o_right = oracles::c_tau_riemann(0.5, -0.1, 1'000'000);
    CHECK(left * o_left > 0.0);
    CHECK(right * o_right > 0.0);
    CHECK(left == doctest::Approx(o_left).epsilon(1e-3));
    CHECK(right == doctest::Approx(o_right).epsilon(1e-3));
}

TEST_CASE("root location for several orders") {
    CHECK(tau0(FracOrder(0.5), 1e-8) == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(tau0(FracOrder(0.9), 1e-8) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(tau0(FracOrder(0.2), 1e-8) == doctest::Approx(-0.8).epsilon(1e-6));
}

TEST_CASE("root agrees with the oracle's own root") {
    // bisect the Riemann-sum version of C for alpha = 0.3
    const double alpha = 0.3;
    double lo = -0.95, hi = -0.05;
    double flo = oracles::c_tau_riemann(alpha, lo, 200'000);
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = oracles::c_tau_riemann(alpha, mid, 200'000);
        if (flo * fm <= 0.0) hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    const double oracle_root = 0.5 * (lo + hi);
    CHECK(tau0(FracOrder(alpha), 1e-8) == doctest::Approx(oracle_root).epsilon(1e-4));
}

TEST_CASE("exactly one sign change on a 50-point scan") {
    for (double alpha : {0.3, 0.6}) {
        auto scan = c_tau_scan(FracOrder(alpha), 50);
        int changes = 0;
        for (std::size_t i = 1; i < scan.size(); ++i)
            if (scan[i - 1].value * scan[i].value < 0.0) ++changes;
        CHECK(changes == 1);
    }
}

TEST_CASE("continuity in tau under halving") {
    const FracOrder order(0.4);
    const double base = c_tau(order, -0.37).value;
    double step = 0.08;
    double prev_gap = 1e300;
    for (int i = 0; i < 6; ++i) {
        const double gap = std::abs(c_tau(order, -0.37 + step).value - base);
        CHECK(gap < prev_gap + 1e-12);
        prev_gap = gap;
        step *= 0.5;
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(c_tau(FracOrder(0.5), 0.5), Error);
    CHECK_THROWS_AS(c_tau(FracOrder(0.5), -1.5), Error);
    CHECK_THROWS_AS(tau0(FracOrder(0.5), -1.0), Error);
}

TEST_CASE("derived critical exponents") {
    FracOrder order(0.5);
    CHECK(order.p_star() == doctest::Approx(3.0));
    CHECK(order.p_star_N(2) == doctest::Approx(5.0 / 3.0));
    for (double a : {0.1, 0.5, 0.9})
        for (int n : {2, 3, 5}) {
            FracOrder o(a);
            CHECK(o.p_star() > 1.0);
            CHECK(o.p_star() > o.p_star_N(n));
        }
    CHECK_THROWS_AS(FracOrder(1.0), Error);
    CHECK_THROWS_AS(FracOrder(0.0), Error);
}
