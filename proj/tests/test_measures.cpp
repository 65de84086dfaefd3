#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/measures.hpp"
#include "fracblow/rng.hpp"

using namespace fracblow;

namespace {
const BallDomain disk(2);
}

TEST_CASE("surface potential stays on the rho^(alpha-1) scale") {
    const FracOrder order(0.5);
    const auto mu = BoundaryMeasure::hausdorff();
    double lo = 1e300, hi = 0.0;
    for (double rho : {1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.5}) {
        const Point x = make_point(1.0 - rho, 0.0);
        const double band = potential(disk, order, mu, x) * std::pow(rho, 1.0 - order.alpha);
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 3.0);
}

TEST_CASE("surface potential against the boundary-kernel limit, exchanged order") {
    // the definition integrates the kernel at distance t and then lets t -> 0;
    // the implementation integrates the extrapolated kernel. Both must agree.
    const FracOrder order(0.6);
    const auto mu = BoundaryMeasure::hausdorff();
    for (const Point& x : {make_point(0.4, 0.1), make_point(-0.1, 0.75)}) {
        const double direct = potential(disk, order, mu, x, 1e-9);
        auto at_t = [&](double t) {
            auto f = [&](double th) {
                const Point y = make_point((1.0 - t) * std::cos(th), (1.0 - t) * std::sin(th));
                return green_kernel(disk, order, x, y).value * std::pow(t, -order.alpha);
            };
            return integrate(f, 0.0, 2.0 * M_PI, SingularitySpec::regular(), 1e-11).value;
        };
        // second-order extrapolation of the integral in t
        const double t0 = 1e-3;
        const double a0 = at_t(t0), a1 = at_t(t0 / 2), a2 = at_t(t0 / 4);
        const double r1 = 2.0 * a1 - a0, r2 = 2.0 * a2 - a1;
        const double lim = (4.0 * r2 - r1) / 3.0;
        CHECK(direct == doctest::Approx(lim).epsilon(1e-5));
    }
}

TEST_CASE("Dirac potential band") {
    const FracOrder order(0.5);
    const Point z0 = make_point(1.0, 0.0);
    const auto mu = BoundaryMeasure::dirac(z0);
    Rng rng(42);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Point x = rng.disk_point(1e-3);
        const double v = potential(disk, order, mu, x);
        const double band = v * std::pow(dist(x, z0), 2.0) * std::pow(disk.rho(x), -order.alpha);
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    CHECK(hi / lo < 5.0);
}

TEST_CASE("sum potential is comparable to the sum of profiles") {
    const FracOrder order(0.5);
    const Point z0 = make_point(1.0, 0.0);
    const auto mu = BoundaryMeasure::sum(
        {{1.0, BoundaryMeasure::hausdorff()}, {1.0, BoundaryMeasure::dirac(z0)}});
    Rng rng(17);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 60; ++i) {
        const Point x = rng.disk_point(1e-3);
        const double rho = disk.rho(x);
        const double profile =
            std::pow(rho, order.alpha - 1.0) +
            std::pow(rho, order.alpha) / std::pow(dist(x, z0), 2.0);
        const double band = potential(disk, order, mu, x) / profile;
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 6.0);
}

TEST_CASE("additivity of weighted sums") {
    const FracOrder order(0.45);
    const Point z0 = make_point(0.0, 1.0);
    const Point x = make_point(0.2, -0.3);
    const double ph = potential(disk, order, BoundaryMeasure::hausdorff(), x);
    const double pd = potential(disk, order, BoundaryMeasure::dirac(z0), x);
    const auto mu = BoundaryMeasure::sum(
        {{0.7, BoundaryMeasure::hausdorff()}, {2.25, BoundaryMeasure::dirac(z0)}});
    CHECK(potential(disk, order, mu, x) ==
          doctest::Approx(0.7 * ph + 2.25 * pd).epsilon(1e-12));
}

TEST_CASE("field sampling: rotation invariance and pointwise agreement") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.6, 32);
    PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid);
    CHECK(pf.samples.radial);
    for (std::size_t j = 0; j < grid->n_levels(); ++j) {
        for (std::size_t i = 1; i < grid->thetas[j].size(); ++i)
            CHECK(pf.samples.normalized[j][i] ==
                  doctest::Approx(pf.samples.normalized[j][0]).epsilon(1e-8));
    }
    // pointwise agreement with the scalar evaluator
    const std::size_t j = grid->n_levels() / 2;
    const Point x = grid->node(j, 0);
    CHECK(pf.samples.value(j, 0) ==
          doctest::Approx(potential(disk, order, BoundaryMeasure::hausdorff(), x))
              .epsilon(1e-9));
}

TEST_CASE("boundary rate of the surface potential") {
    // least-squares slope of log P vs log rho equals alpha - 1 within 0.02
    const FracOrder order(0.5);
    const auto mu = BoundaryMeasure::hausdorff();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double rho = 1e-4; rho <= 1.01e-1; rho *= 2.0) {
        const double v = potential(disk, order, mu, make_point(1.0 - rho, 0.0));
        const double lx = std::log(rho), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(order.alpha - 1.0).epsilon(0.04));
}

TEST_CASE("measure validation") {
    CHECK_THROWS_AS(BoundaryMeasure::dirac(make_point(0.5, 0.0)), Error);
    CHECK_THROWS_AS(
        BoundaryMeasure::sum({{0.0, BoundaryMeasure::hausdorff()}}), Error);
    CHECK_THROWS_AS(potential(disk, FracOrder(0.5), BoundaryMeasure::hausdorff(),
                              make_point(1.0, 0.0)),
                    Error);
}
