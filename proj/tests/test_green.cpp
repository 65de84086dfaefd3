#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/green.hpp"
#include "fracblow/measures.hpp"
#include "fracblow/rng.hpp"
#include "oracles.hpp"

using namespace fracblow;

namespace {
const BallDomain disk(2);

// independent reference for the boundary kernel: the scaled kernel at a tiny
// offset from the boundary point
double martin_small_t(const BallDomain& dom, const FracOrder& order, const Point& x,
                      const Point& z, double t = 1e-6) {
    const Point y = (1.0 - t) * z;
    return std::pow(t, -order.alpha) * green_kernel(dom, order, x, y).value;
}
} // namespace

TEST_CASE("kernel symmetry over random pairs") {
    const FracOrder order(0.6);
    Rng rng(42);
    for (int i = 0; i < 20; ++i) {
        const Point x = rng.disk_point(1e-3);
        Point y = rng.disk_point(1e-3);
        if (dist(x, y) < 1e-6) y = make_point(0.5 * y[0], 0.5 * y[1] + 0.1);
        const double gxy = green_kernel(disk, order, x, y).value;
        const double gyx = green_kernel(disk, order, y, x).value;
        CHECK(gxy == doctest::Approx(gyx).epsilon(1e-12));
        CHECK(gxy > 0.0);
    }
}

TEST_CASE("kernel value against a Riemann oracle for the inner integral") {
    // N=2, alpha=0.5, x=(0,0), y=(0.5,0)
    const FracOrder order(0.5);
    const Point x = make_point(0.0, 0.0);
    const Point y = make_point(0.5, 0.0);
    const double d = 0.5;
    const double r0 = (1.0 - 0.25) / (d * d); // = 3
    auto f = [&](double s) { return std::pow(s, -0.5) / (1.0 + s); };
    const double inner = oracles::riemann_graded_left(f, 0.0, r0, 4'000'000, 4.0);
    const double expected = kernel_prefactor(2, order) * std::pow(d, 2.0 * 0.5 - 2.0) * inner;
    CHECK(green_kernel(disk, order, x, y).value == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("alpha-power decay toward the boundary") {
    const FracOrder order(0.5);
    const Point x = make_point(0.5, 0.0);
    double prev_ratio = 0.0;
    double rho = 1e-3;
    for (int i = 0; i < 6; ++i) {
        const Point y = make_point(-(1.0 - rho), 0.0);
        const double ratio = green_kernel(disk, order, x, y).value / std::pow(rho, order.alpha);
        if (i > 0) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.02));
        CHECK(ratio > 0.0);
        prev_ratio = ratio;
        rho *= 0.5;
    }
}

TEST_CASE("two-sided sharp bound with a fixed constant") {
    for (double alpha : {0.3, 0.5, 0.7}) {
        const FracOrder order(alpha);
        const double kappa = kernel_prefactor(2, order);
        Rng rng(7);
        for (int i = 0; i < 200; ++i) {
            const Point x = rng.disk_point(1e-4);
            Point y = rng.disk_point(1e-4);
            if (dist(x, y) < 1e-9) continue;
            const double d = dist(x, y);
            const double nx = norm(x), ny = norm(y);
            const double r0 = (1.0 - nx * nx) * (1.0 - ny * ny) / (d * d);
            const double normalized = green_kernel(disk, order, x, y).value *
                                      std::pow(d, 2.0 - 2.0 * alpha) / kappa;
            const double envelope = std::pow(std::min(1.0, r0), alpha);
            // F(r0) <= min(r0^a/a, B(a,1-a)) and >= c min(1,r0)^a
            const double c = 3.5 / alpha; // generous fixed band for the disk
            CHECK(normalized <= c * envelope);
            CHECK(normalized >= envelope / c);
        }
    }
}

TEST_CASE("boundary kernel: rotational equivariance and center symmetry") {
    const FracOrder order(0.4);
    const Point x = make_point(0.3, -0.2);
    const Point z = make_point(1.0, 0.0);
    const double base = martin_kernel(disk, order, x, z).value;
    for (double ang : {0.7, 1.9, 4.0}) {
        const double c = std::cos(ang), s = std::sin(ang);
        const Point xr = make_point(c * x[0] - s * x[1], s * x[0] + c * x[1]);
        const Point zr = make_point(c, s);
        CHECK(martin_kernel(disk, order, xr, zr).value == doctest::Approx(base).epsilon(1e-10));
    }

    const Point c0 = make_point(0.0, 0.0);
    const double v0 = martin_kernel(disk, order, c0, z).value;
    for (double ang : {0.3, 2.2}) {
        const Point zr = make_point(std::cos(ang), std::sin(ang));
        CHECK(martin_kernel(disk, order, c0, zr).value == doctest::Approx(v0).epsilon(1e-10));
    }
    // small-t oracle for the common center value
    CHECK(v0 == doctest::Approx(martin_small_t(disk, order, c0, z)).epsilon(1e-5));
}

TEST_CASE("boundary kernel profile band") {
    const FracOrder order(0.5);
    Rng rng(11);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Point x = rng.disk_point(1e-3);
        const Point z = rng.circle_point();
        const double rho = disk.rho(x);
        const double m = martin_kernel(disk, order, x, z).value;
        const double band = m * std::pow(dist(x, z), 2.0) / std::pow(rho, order.alpha);
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    CHECK(hi / lo < 3.0); // theoretical variation is (1+|x|)^alpha <= 2^alpha
}

TEST_CASE("volume potential of zero and of one") {
    const FracOrder order(0.5);
    VolumeField zero{[](const Point&) { return 0.0; }, 0.0, true,
                     [](double) { return 0.0; }, {}};
    CHECK(green_apply(disk, order, zero, make_point(0.0, 0.0)) == 0.0);

    VolumeField one{[&](const Point& y) { return disk.inside(y) ? 1.0 : 0.0; }, 0.0, true,
                    [](double) { return 1.0; }, {}};
    const double at0 = green_apply(disk, order, one, make_point(0.0, 0.0), 1e-8);
    // midpoint oracle for int G((0,0), y) dy
    const double kappa = kernel_prefactor(2, order);
    auto gfun = [&](double yx, double yy) {
        const double r2 = yx * yx + yy * yy;
        const double d = std::sqrt(r2);
        if (d < 1e-9) return 0.0;
        const double r0 = (1.0 - r2) / r2;
        const double inner = 2.0 * std::atan(std::sqrt(r0)); // closed form at alpha=1/2, N=2
        return kappa / d * inner;
    };
    const double oracle = oracles::disk_midpoint_sum(gfun, 2000, 0.0, 0.0);
    CHECK(at0 == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("volume potential of a boundary-blowup source stays on its scale") {
    // f = rho^((alpha-1)p) with p < (1+alpha)/(1-alpha)
    const FracOrder order(0.5);
    const double p = 2.5;
    const double e = (order.alpha - 1.0) * p;
    VolumeField f{[&](const Point& y) {
                      const double rho = disk.rho(y);
                      return rho > 0.0 ? std::pow(rho, e) : 0.0;
                  },
                  e, true, [&](double r) { return r < 1.0 ? std::pow(1.0 - r, e) : 0.0; },
                  [&](double rho) { return rho > 0.0 ? std::pow(rho, e) : 0.0; }};
    double prev = 0.0;
    for (double rho : {1e-2, 1e-3, 1e-4}) {
        const Point x = make_point(1.0 - rho, 0.0);
        const double v = green_apply(disk, order, f, x, 1e-7);
        const double normalized = v * std::pow(rho, -(2.0 * order.alpha + e));
        CHECK(normalized > 0.1);
        CHECK(normalized < 10.0);
        if (prev > 0.0) CHECK(normalized == doctest::Approx(prev).epsilon(0.35));
        prev = normalized;
    }
}

TEST_CASE("kernel domain errors") {
    const FracOrder order(0.5);
    CHECK_THROWS_AS(green_kernel(disk, order, make_point(1.1, 0.0), make_point(0.0, 0.0)), Error);
    const Point x = make_point(0.2, 0.0);
    CHECK_THROWS_AS(green_kernel(disk, order, x, x), Error);
    CHECK_THROWS_AS(martin_kernel(disk, order, x, make_point(0.5, 0.0)), Error);
}

TEST_CASE("kernel row integrated in polar form against the midpoint oracle") {
    const FracOrder order(0.5);
    const Point x = make_point(0.5, 0.0);
    auto f = [&](double r, double th) {
        const Point y = make_point(r * std::cos(th), r * std::sin(th));
        if (dist(x, y) < 1e-12 || !disk.strictly_inside(y)) return 0.0;
        return green_kernel(disk, order, x, y).value;
    };
    auto tsplits = [&](double r) {
        std::vector<double> sp;
        if (std::abs(r - 0.5) < 0.3) {
            const double w = std::max(std::abs(r - 0.5), 1e-12) / std::max(std::sqrt(0.5 * r), 0.1);
            for (double d = w; d < M_PI; d *= 4.0) {
                sp.push_back(d);
                sp.push_back(2.0 * M_PI - d);
            }
        }
        return sp;
    };
    QuadResult q = integrate_2d_polar(f, SingularitySpec::endpoints(0.0, order.alpha), 1e-7,
                                      {0.5}, tsplits);
    auto gfun = [&](double yx, double yy) {
        const Point y = make_point(yx, yy);
        if (dist(x, y) < 1e-12) return 0.0;
        return green_kernel(disk, order, x, y).value;
    };
    const double oracle = oracles::disk_midpoint_sum(gfun, 2000, 0.5, 0.0);
    CHECK(q.value == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("three-dimensional kernels and potentials") {
    const BallDomain ball(3);
    const FracOrder order(0.5);
    const Point x = make_point(0.2, 0.1, -0.3);
    Point y = make_point(-0.4, 0.2, 0.1);
    CHECK(green_kernel(ball, order, x, y).value ==
          doctest::Approx(green_kernel(ball, order, y, x).value).epsilon(1e-12));
    // boundary kernel band: M |x-z|^3 / rho^alpha stays within (1+|x|)^alpha
    Rng rng(5);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 25; ++i) {
        const double u = 2.0 * rng.uniform() - 1.0;
        const double ph = 2.0 * M_PI * rng.uniform();
        const double s = std::sqrt(1.0 - u * u);
        const Point z = make_point(s * std::cos(ph), s * std::sin(ph), u);
        const double m = martin_kernel(ball, order, x, z).value;
        const double band = m * std::pow(dist(x, z), 3.0) / std::pow(ball.rho(x), order.alpha);
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 2.0);
    // surface potential keeps the rho^(alpha-1) scale in 3D as well
    const auto mu = BoundaryMeasure::hausdorff();
    double blo = 1e300, bhi = 0.0;
    for (double rho : {1e-3, 1e-2, 0.1, 0.4}) {
        const Point xx = make_point(1.0 - rho, 0.0, 0.0);
        const double band = potential(ball, order, mu, xx) * std::pow(rho, 1.0 - order.alpha);
        blo = std::min(blo, band);
        bhi = std::max(bhi, band);
    }
    CHECK(bhi / blo < 3.0);
}
