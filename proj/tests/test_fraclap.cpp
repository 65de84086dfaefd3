#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/ctau.hpp"
#include "fracblow/fraclap.hpp"
#include "fracblow/measures.hpp"

using namespace fracblow;

namespace {
const BallDomain disk(2);
}

TEST_CASE("constant field: only the exterior tail contributes") {
    // u = c inside, 0 outside: the principal value reduces to the closed-form
    // integral of c |z-x|^(-2-2a) over the exterior of the ball
    const FracOrder order(0.5);
    const double c = 2.3;
    ExplicitField u = constant_field(disk, c);
    const Point x = make_point(0.0, 0.0);
    const double expected = c * 2.0 * M_PI / (2.0 * order.alpha);
    CHECK(frac_lap_eval(disk, order, u, x, 1e-7) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("amplitude linearity") {
    const FracOrder order(0.4);
    ExplicitField u = power_profile_field(disk, -0.3);
    auto scaled_eval = [&](const Point& y) { return 3.7 * u.eval(y); };
    ExplicitField su(scaled_eval, u.boundary_exponent,
                     [&](const Point& y, double rho) { return 3.7 * u.eval_rho(y, rho); });
    const Point x = make_point(0.4, 0.2);
    const double a = frac_lap_eval(disk, order, u, x, 1e-7);
    const double b = frac_lap_eval(disk, order, su, x, 1e-7);
    CHECK(b == doctest::Approx(3.7 * a).epsilon(1e-5));
}

TEST_CASE("rotation equivariance") {
    const FracOrder order(0.55);
    auto shape = [&](const Point& y, double rho) {
        if (rho <= 0.0) return 0.0;
        return std::pow(rho, -0.2) * (1.0 + 0.5 * y[0]); // not radial
    };
    ExplicitField u([&](const Point& y) { return shape(y, disk.rho(y)); }, -0.2,
                    [&](const Point& y, double rho) { return shape(y, rho); });
    const double ang = 1.1;
    const double ca = std::cos(ang), sa = std::sin(ang);
    auto rot_inv = [&](const Point& y) {
        return make_point(ca * y[0] + sa * y[1], -sa * y[0] + ca * y[1]);
    };
    ExplicitField ur([&](const Point& y) { return shape(rot_inv(y), disk.rho(y)); }, -0.2,
                     [&](const Point& y, double rho) { return shape(rot_inv(y), rho); });
    const Point x = make_point(0.3, -0.1);
    const Point xr = make_point(ca * x[0] - sa * x[1], sa * x[0] + ca * x[1]);
    const double va = frac_lap_eval(disk, order, u, x, 1e-6);
    const double vb = frac_lap_eval(disk, order, ur, xr, 1e-6);
    CHECK(vb == doctest::Approx(va).epsilon(2e-4));
}

TEST_CASE("flat-boundary power profiles reproduce the one-dimensional constant") {
    // (-Delta)^a rho^tau ~ -C'_N C(tau) rho^(tau-2a) as rho -> 0; the factor
    // C'_N collapses the transverse directions of the flattened boundary
    const double alpha = 0.4, tau = -0.3;
    const FracOrder order(alpha);
    ExplicitField u = power_profile_field(disk, tau);
    const double rho = 1e-3;
    const Point x = make_point(1.0 - rho, 0.0);
    const double pv = frac_lap_eval(disk, order, u, x, 1e-5);
    const double ratio = pv / std::pow(rho, tau - 2.0 * alpha);
    const double expected = -half_space_factor(2, order) * c_tau(order, tau).value;
    CHECK(ratio == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("supersolution scale for the strong-singularity profile") {
    const FracOrder order(0.5);
    const double p = 2.5;
    ExplicitField w = wp_field(disk, order, p);
    const double sigma = 2.0 * order.alpha / (p - 1.0);
    // normalized operator values are negative and bounded away from zero
    for (double rho : {0.1, 0.3, 0.6}) {
        const Point x = make_point(1.0 - rho, 0.0);
        const double pv = frac_lap_eval(disk, order, w, x, 1e-5);
        const double normalized = pv * std::pow(rho, sigma + 2.0 * order.alpha);
        CHECK(normalized < -0.05);
    }
}

TEST_CASE("supersolution check passes and scales") {
    const FracOrder order(0.5);
    const double p = 2.5;
    auto pts = radial_probe_points(15);
    auto rep = check_supersolution(disk, order, p, pts, 1e-3, 1e-5);
    CHECK(rep.ok);
    CHECK(rep.c_p < 0.0);
    CHECK(rep.lambda0 > 0.0);
    for (double r : rep.residual_rel) CHECK(r >= -1e-3);

    // doubling lambda0 keeps the supersolution property
    const double sigma = 2.0 * order.alpha / (p - 1.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double rho = disk.rho(pts[i]);
        const double lam = 2.0 * rep.lambda0;
        const double lhs = lam * rep.normalized_pv[i] * std::pow(rho, -sigma - 2.0 * order.alpha) +
                           std::pow(lam * std::pow(rho, -sigma), p);
        CHECK(lhs / std::pow(lam * std::pow(rho, -sigma), p) >= -1e-3);
    }
}

TEST_CASE("supersolution preconditions") {
    const FracOrder order(0.5);
    auto pts = radial_probe_points(3);
    CHECK_THROWS_AS(check_supersolution(disk, order, 1.5, pts), Error); // p <= 1+2a
    CHECK_THROWS_AS(check_supersolution(disk, order, 3.5, pts), Error); // p >= p*
}

TEST_CASE("surface potential is in the kernel of the operator") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.25, 16);
    PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
    ExplicitField u = radial_interpolant_field(disk, pf.samples);
    for (double rho : {0.35, 0.6}) {
        const Point x = make_point(1.0 - rho, 0.0);
        const double pv = frac_lap_eval(disk, order, u, x, 1e-4);
        const double scale = std::pow(rho, order.alpha - 1.0 - 2.0 * order.alpha);
        CHECK(std::abs(pv) <= 1e-2 * scale);
    }
}

TEST_CASE("interior-only evaluation") {
    const FracOrder order(0.5);
    ExplicitField u = constant_field(disk, 1.0);
    CHECK_THROWS_AS(frac_lap_eval(disk, order, u, make_point(1.0 - 1e-8, 0.0)), Error);
}
