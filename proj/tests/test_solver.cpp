#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/fraclap.hpp"
#include "fracblow/rng.hpp"
#include "fracblow/analysis.hpp"
#include "fracblow/solver.hpp"

using namespace fracblow;

namespace {
const BallDomain disk(2);
}

TEST_CASE("truncation cap and smoothing band") {
    auto g = Nonlinearity::power(2.0);
    auto g4 = truncate(g, 4.0);
    CHECK(g4(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g4(3.0) == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(g4(100.0) <= 4.0);
    CHECK(g4(0.0) == doctest::Approx(g(0.0)).epsilon(1e-12));
}

TEST_CASE("truncations are monotone in level and converge locally") {
    auto g = Nonlinearity::power(2.0);
    for (double n : {2.0, 4.0, 8.0, 16.0}) {
        auto gn = truncate(g, n);
        auto gn2 = truncate(g, n + 1.0);
        for (int i = 0; i < 1000; ++i) {
            const double s = 12.0 * i / 999.0;
            CHECK(gn(s) <= gn2(s) + 1e-12);
            CHECK(gn2(s) <= g(s) + 1e-12);
        }
    }
    // sup over [0, M] of |g_n - g| -> 0
    const double M = 3.0;
    double prev = 1e300;
    for (double n : {10.0, 20.0, 40.0, 80.0}) {
        auto gn = truncate(g, n);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double s = M * i / 499.0;
            worst = std::max(worst, std::abs(gn(s) - g(s)));
        }
        CHECK(worst <= prev + 1e-12);
        prev = worst;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("truncation level validation") {
    auto g = Nonlinearity::power(2.0);
    CHECK_THROWS_AS(truncate(g, 0.0), Error);
    auto c = Nonlinearity::custom([](double s) { return 5.0 + s; });
    CHECK_THROWS_AS(truncate(c, 4.0), Error);
}

TEST_CASE("zero absorption returns the pure potential in one sweep") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.6, 8);
    SolveResult r = solve(disk, order, Nonlinearity::zero(), BoundaryMeasure::hausdorff(), 2.0,
                          grid);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.residual <= 1e-14);
    CHECK(r.sandwich_ok);
    CHECK(r.method == "picard");
    PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
    for (std::size_t j = 0; j < grid->n_levels(); ++j)
        CHECK(r.solution.value(j, 0) ==
              doctest::Approx(2.0 * pf.samples.value(j, 0)).epsilon(1e-8));
}

TEST_CASE("supercritical powers are rejected") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.6, 8);
    CHECK_THROWS_AS(solve(disk, order, Nonlinearity::power(3.0), BoundaryMeasure::hausdorff(),
                          1.0, grid),
                    Error);
    CHECK_THROWS_AS(solve(disk, order, Nonlinearity::power(3.5), BoundaryMeasure::hausdorff(),
                          1.0, grid),
                    Error);
}

TEST_CASE("subcritical solve: sandwich, residual, frozen interior anchor") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-5, 1.3, 8);
    SolveResult r = solve(disk, order, Nonlinearity::power(2.5), BoundaryMeasure::hausdorff(),
                          1.0, grid);
    CHECK(r.converged);
    CHECK(r.sandwich_ok);
    CHECK(r.residual <= 1e-6);
    // interior value anchored by an independent (refined-grid) computation
    const std::size_t center = grid->n_levels() - 1;
    CHECK(r.solution.value(center, 0) == doctest::Approx(0.4427).epsilon(0.015));
}

TEST_CASE("alternate-monotone sweeps in the contractive regime") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.5, 8);
    SolverOptions opts;
    opts.track_iterates = true;
    opts.tol = 1e-6;
    opts.max_iterations = 60;
    SolveResult r = solve(disk, order, Nonlinearity::power(2.0), BoundaryMeasure::hausdorff(),
                          0.5, grid, opts);
    CHECK(r.converged);
    REQUIRE(r.iterate_profiles.size() >= 6);
    const auto& it = r.iterate_profiles;
    const std::size_t L = it[0].size();
    for (std::size_t j = 0; j < L; ++j) {
        const double slack = 1e-10 * (std::abs(it[0][j]) + 1.0);
        // odd iterates increase, even iterates decrease, odd below even
        CHECK(it[1][j] <= it[3][j] + slack);
        CHECK(it[3][j] <= it[5][j] + slack);
        CHECK(it[2][j] >= it[4][j] - slack);
        CHECK(it[0][j] >= it[2][j] - slack);
        CHECK(it[5][j] <= it[4][j] + slack);
        CHECK(it[1][j] <= it[2][j] + slack);
    }
}

TEST_CASE("monotone in the truncation level") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.5, 8);
    auto g = Nonlinearity::power(2.5);
    SolveResult rn = solve(disk, order, truncate(g, 5.0), BoundaryMeasure::hausdorff(), 1.0, grid);
    SolveResult r2n = solve(disk, order, truncate(g, 10.0), BoundaryMeasure::hausdorff(), 1.0,
                            grid);
    for (std::size_t j = 0; j < grid->n_levels(); ++j) {
        const double a = rn.solution.value(j, 0);
        const double b = r2n.solution.value(j, 0);
        CHECK(b <= a * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("family is monotone in k") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.5, 8);
    auto fam = solve_family(disk, order, Nonlinearity::power(2.5), BoundaryMeasure::hausdorff(),
                            {0.5, 1.0, 2.0, 4.0}, grid);
    CHECK(fam.size() == 4);
    for (std::size_t i = 1; i < fam.size(); ++i)
        for (std::size_t j = 0; j < grid->n_levels(); ++j)
            CHECK(fam[i].solution.value(j, 0) >=
                  fam[i - 1].solution.value(j, 0) * (1.0 - 1e-9) - 1e-12);
}

TEST_CASE("classical residual of the interpolated solution") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.25, 8);
    SolveResult r = solve(disk, order, Nonlinearity::power(2.5), BoundaryMeasure::hausdorff(),
                          1.0, grid);
    ExplicitField uf = radial_interpolant_field(disk, r.solution);
    const double cna = pv_normalization(2, order);
    Rng rng(42);
    for (int i = 0; i < 10; ++i) {
        const Point x = rng.disk_point(0.15);
        const double rho = disk.rho(x);
        const double pv = frac_lap_eval(disk, order, uf, x, 1e-4);
        const double gu = std::pow(r.solution.interp(rho, std::atan2(x[1], x[0])), 2.5);
        const double scale = std::pow(rho, order.alpha - 1.0 - 2.0 * order.alpha);
        CHECK(std::abs(cna * pv + gu) <= 5e-2 * scale);
    }
}

TEST_CASE("Dirac measures require a subadditivity constant") {
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 2.0, 8);
    auto gc = Nonlinearity::custom([](double s) { return s * s / (1.0 + s); });
    CHECK_THROWS_AS(solve(disk, order, gc, BoundaryMeasure::dirac(make_point(1.0, 0.0)), 0.5,
                          grid),
                    Error);
}

TEST_CASE("solve with a boundary Dirac mass needs a clustered grid") {
    const FracOrder order(0.5);
    auto plain = GradedGrid::make(1e-4, 2.0, 12);
    CHECK_THROWS_AS(solve(disk, order, Nonlinearity::power(2.0),
                          BoundaryMeasure::dirac(make_point(1.0, 0.0)), 0.3, plain),
                    Error);

    auto grid = GradedGrid::make(1e-4, 2.0, 12, 0.0, 2e-4);
    SolverOptions opts;
    opts.tol = 1e-5;
    opts.max_iterations = 400;
    SolveResult r = solve(disk, order, Nonlinearity::power(2.0),
                          BoundaryMeasure::dirac(make_point(1.0, 0.0)), 0.3, grid, opts);
    CHECK(r.converged);
    CHECK(r.residual <= 1e-5);
    CHECK(r.sandwich_ok);
    // positivity
    CHECK(r.solution.min_normalized() > 0.0);
}

TEST_CASE("large-k envelope steepens to the reciprocal boundary rate") {
    // for p <= 1+2a the family's pointwise sup grows at least like 1/rho on
    // the saturated window of boundary distances
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.3, 8);
    std::vector<double> ks;
    for (int j = 0; j <= 10; ++j) ks.push_back(std::pow(2.0, j));
    auto fam = solve_family(disk, order, Nonlinearity::power(1.5),
                            BoundaryMeasure::hausdorff(), ks, grid);
    FieldOnGrid sup = fam.front().solution;
    for (const auto& r : fam)
        for (std::size_t j = 0; j < grid->n_levels(); ++j)
            sup.normalized[j][0] = std::max(sup.normalized[j][0], r.solution.normalized[j][0]);
    for (std::size_t j = 0; j < grid->n_levels(); ++j)
        for (std::size_t i = 0; i < grid->thetas[j].size(); ++i)
            sup.normalized[j][i] = sup.normalized[j][0];
    RateFit fit = fit_boundary_rate(sup, {1e-2, 0.3});
    CHECK(fit.exponent <= -1.0 + 0.1);
}

TEST_CASE("discrete radial operator agrees with the adaptive volume potential") {
    // two independent routes to the same volume potential
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.4, 8);
    const double e = -0.75;
    auto profile = [&](double rho) { return std::pow(rho, e); };
    std::vector<double> via_rows =
        radial_green_apply_profile(disk, order, grid, profile, e);
    VolumeField f{[&](const Point& y) {
                      const double rho = disk.rho(y);
                      return rho > 0.0 ? std::pow(rho, e) : 0.0;
                  },
                  e, true, [&](double r) { return r < 1.0 ? std::pow(1.0 - r, e) : 0.0; },
                  [&](double rho) { return rho > 0.0 ? std::pow(rho, e) : 0.0; }};
    for (std::size_t j = 0; j < grid->n_levels(); j += 5) {
        const Point x = make_point(grid->radius(j), 0.0);
        const double via_adaptive = green_apply(disk, order, f, x, 1e-7);
        CHECK(via_rows[j] == doctest::Approx(via_adaptive).epsilon(2e-4));
    }
}
