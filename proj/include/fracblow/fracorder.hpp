#ifndef FRACBLOW_FRACORDER_HPP
#define FRACBLOW_FRACORDER_HPP

#include "fracblow/errors.hpp"

namespace fracblow {

// Fractional order alpha in (0,1) together with its derived critical exponents.
struct FracOrder {
    double alpha;

    explicit FracOrder(double a) : alpha(a) {
        if (!(a > 0.0 && a < 1.0))
            throw Error(ErrorCode::DomainError, "alpha must lie in (0,1)");
    }

    // critical exponent for boundary-wide data: (1+alpha)/(1-alpha)
    double p_star() const { return (1.0 + alpha) / (1.0 - alpha); }

    // critical exponent for a boundary Dirac mass: (N+alpha)/(N-alpha)
    double p_star_N(int dim) const {
        if (dim < 2) throw Error(ErrorCode::DomainError, "dimension must be >= 2");
        return (static_cast<double>(dim) + alpha) / (static_cast<double>(dim) - alpha);
    }
};

} // namespace fracblow

#endif
