#ifndef FRACBLOW_MEASURES_HPP
#define FRACBLOW_MEASURES_HPP

#include <vector>

#include "fracblow/grid.hpp"

namespace fracblow {

// Measure supported on the unit sphere: the surface (Hausdorff) measure, a
// Dirac mass at a boundary point, or a positively weighted sum.
struct BoundaryMeasure {
    enum class Kind { Hausdorff, Dirac, Sum };
    Kind kind = Kind::Hausdorff;
    Point anchor{};                                       // Dirac
    std::vector<std::pair<double, BoundaryMeasure>> parts; // Sum

    static BoundaryMeasure hausdorff() { return BoundaryMeasure{}; }

    static BoundaryMeasure dirac(const Point& z0) {
        if (std::abs(norm(z0) - 1.0) > 1e-10)
            throw Error(ErrorCode::DomainError, "Dirac anchor must lie on the unit sphere");
        BoundaryMeasure m;
        m.kind = Kind::Dirac;
        m.anchor = z0;
        return m;
    }

    static BoundaryMeasure sum(std::vector<std::pair<double, BoundaryMeasure>> parts) {
        for (const auto& [w, part] : parts) {
            (void)part;
            if (!(w > 0.0))
                throw Error(ErrorCode::DomainError, "sum weights must be positive");
        }
        BoundaryMeasure m;
        m.kind = Kind::Sum;
        m.parts = std::move(parts);
        return m;
    }

    bool rotation_invariant() const {
        switch (kind) {
            case Kind::Hausdorff: return true;
            case Kind::Dirac: return false;
            case Kind::Sum:
                for (const auto& [w, p] : parts) {
                    (void)w;
                    if (!p.rotation_invariant()) return false;
                }
                return true;
        }
        return false;
    }

    // leading boundary exponent of the induced potential
    double potential_boundary_exponent(const FracOrder& order) const {
        switch (kind) {
            case Kind::Hausdorff: return order.alpha - 1.0;
            case Kind::Dirac: return order.alpha;
            case Kind::Sum: {
                double e = order.alpha;
                for (const auto& [w, p] : parts) {
                    (void)w;
                    e = std::min(e, p.potential_boundary_exponent(order));
                }
                return e;
            }
        }
        return order.alpha - 1.0;
    }
};

// Boundary-measure potential at one interior point: the surface integral of
// the boundary kernel against mu (Dirac parts evaluate the kernel directly).
double potential(const BallDomain& dom, const FracOrder& order, const BoundaryMeasure& mu,
                 const Point& x, double rel_tol = 1e-8);

struct PotentialField {
    BoundaryMeasure measure;
    FieldOnGrid samples;
};

PotentialField potential_field(const BallDomain& dom, const FracOrder& order,
                               const BoundaryMeasure& mu,
                               std::shared_ptr<const GradedGrid> grid, double rel_tol = 1e-8);

} // namespace fracblow

#endif
