#include "fracblow/measures.hpp"

#include <cmath>

#include "fracblow/parallel.hpp"

namespace fracblow {

namespace {

// angular split hints around the boundary projection of x: the kernel is a
// |x-z|^-N peak of width ~ rho(x), treated from 4 rho(x) outward
std::vector<double> projection_splits(double rho_x, double theta_x, double upper) {
    std::vector<double> sp;
    for (double d = 4.0 * rho_x; d < upper; d *= 4.0) {
        sp.push_back(theta_x + d);
        sp.push_back(theta_x - d);
    }
    return sp;
}

double hausdorff_potential(const BallDomain& dom, const FracOrder& order, const Point& x,
                           double rel_tol) {
    const double a = norm(x);
    const double rho_x = dom.rho(x);
    const double mtol = std::min(1e-9, 0.1 * rel_tol);

    if (dom.dim == 2) {
        const double theta_x = std::atan2(x[1], x[0]);
        auto f = [&](double th) {
            const Point z = make_point(std::cos(th), std::sin(th));
            return martin_kernel(dom, order, x, z, mtol).value;
        };
        std::vector<double> sp;
        if (a > 1e-12)
            for (double s : projection_splits(rho_x, theta_x, M_PI)) {
                double v = s;
                while (v < 0.0) v += 2.0 * M_PI;
                while (v >= 2.0 * M_PI) v -= 2.0 * M_PI;
                sp.push_back(v);
            }
        QuadResult coarse =
            integrate(f, 0.0, 2.0 * M_PI, SingularitySpec::regular(), 1e-3, sp);
        QuadResult fine = integrate(f, 0.0, 2.0 * M_PI, SingularitySpec::regular(),
                                    rel_tol * std::abs(coarse.value) + 1e-300, sp);
        return fine.value;
    }

    // N = 3: rotation invariance reduces to the polar angle from x's axis
    auto f = [&](double phi) {
        const Point xa = make_point(0.0, 0.0, a);
        const Point z = make_point(std::sin(phi), 0.0, std::cos(phi));
        return martin_kernel(dom, order, xa, z, mtol).value * std::sin(phi);
    };
    std::vector<double> sp;
    for (double d = 4.0 * rho_x; d < M_PI; d *= 4.0) sp.push_back(d);
    QuadResult coarse = integrate(f, 0.0, M_PI, SingularitySpec::regular(), 1e-3, sp);
    QuadResult fine = integrate(f, 0.0, M_PI, SingularitySpec::regular(),
                                rel_tol * std::abs(coarse.value) + 1e-300, sp);
    return 2.0 * M_PI * fine.value;
}

} // namespace

double potential(const BallDomain& dom, const FracOrder& order, const BoundaryMeasure& mu,
                 const Point& x, double rel_tol) {
    if (!dom.strictly_inside(x))
        throw Error(ErrorCode::DomainError, "potential point must lie strictly inside the ball");
    switch (mu.kind) {
        case BoundaryMeasure::Kind::Hausdorff:
            return hausdorff_potential(dom, order, x, rel_tol);
        case BoundaryMeasure::Kind::Dirac:
            return martin_kernel(dom, order, x, mu.anchor, std::min(1e-9, 0.1 * rel_tol)).value;
        case BoundaryMeasure::Kind::Sum: {
            double acc = 0.0;
            for (const auto& [w, part] : mu.parts) acc += w * potential(dom, order, part, x, rel_tol);
            return acc;
        }
    }
    throw Error(ErrorCode::DomainError, "unknown measure kind");
}

PotentialField potential_field(const BallDomain& dom, const FracOrder& order,
                               const BoundaryMeasure& mu,
                               std::shared_ptr<const GradedGrid> grid, double rel_tol) {
    const double beta = mu.potential_boundary_exponent(order);
    FieldOnGrid field(grid, order, beta);
    field.radial = mu.rotation_invariant();

    if (mu.kind == BoundaryMeasure::Kind::Sum) {
        // linearity: combine the parts' fields, keeping rotation-invariant
        // parts on their cheap radial path
        for (const auto& [w, part] : mu.parts) {
            PotentialField pf = potential_field(dom, order, part, grid, rel_tol);
            for (std::size_t j = 0; j < grid->n_levels(); ++j)
                for (std::size_t i = 0; i < grid->thetas[j].size(); ++i)
                    field.normalized[j][i] += w * pf.samples.normalized[j][i];
        }
        return PotentialField{mu, std::move(field)};
    }

    if (field.radial) {
        // one evaluation per level, broadcast over angles
        std::vector<double> per_level(grid->n_levels());
        parallel_for(grid->n_levels(), [&](std::size_t j) {
            const Point x = make_point(grid->radius(j), 0.0);
            per_level[j] = potential(dom, order, mu, x, rel_tol);
        });
        for (std::size_t j = 0; j < grid->n_levels(); ++j) {
            const double nv = per_level[j] * std::pow(grid->levels[j], 1.0 - order.alpha);
            for (std::size_t i = 0; i < grid->thetas[j].size(); ++i)
                field.normalized[j][i] = nv;
        }
        return PotentialField{mu, std::move(field)};
    }

    // flatten node list for parallel evaluation
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t j = 0; j < grid->n_levels(); ++j)
        for (std::size_t i = 0; i < grid->thetas[j].size(); ++i) idx.emplace_back(j, i);
    parallel_for(idx.size(), [&](std::size_t n) {
        const auto [j, i] = idx[n];
        const Point x = grid->node(j, i);
        field.normalized[j][i] =
            potential(dom, order, mu, x, rel_tol) * std::pow(grid->levels[j], 1.0 - order.alpha);
    });
    return PotentialField{mu, std::move(field)};
}

} // namespace fracblow
