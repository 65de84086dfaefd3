#ifndef FRACBLOW_QUADRATURE_HPP
#define FRACBLOW_QUADRATURE_HPP

#include <functional>
#include <vector>

#include "fracblow/errors.hpp"

namespace fracblow {

// Declared endpoint behavior of a 1D integrand.
//  - left_exponent a:   f(t) ~ (t - left)^a as t -> left+, a > -1
//  - finite right end:  f(t) ~ (right - t)^b as t -> right-, b > -1
//  - unbounded right:   f(t) ~ t^-b as t -> inf, b > 1
struct SingularitySpec {
    double left_exponent = 0.0;

    enum class RightKind { Finite, Tail } right_kind = RightKind::Finite;
    double right_exponent = 0.0; // finite-endpoint exponent
    double tail_exponent = 2.0;  // algebraic tail exponent b

    static SingularitySpec regular() { return {}; }

    static SingularitySpec endpoints(double left, double right) {
        SingularitySpec s;
        s.left_exponent = left;
        s.right_exponent = right;
        return s;
    }

    static SingularitySpec with_tail(double left, double tail) {
        SingularitySpec s;
        s.left_exponent = left;
        s.right_kind = RightKind::Tail;
        s.tail_exponent = tail;
        return s;
    }

    void validate(bool unbounded) const {
        if (!(left_exponent > -1.0))
            throw Error(ErrorCode::InvalidSpec, "left exponent must exceed -1");
        if (unbounded) {
            if (right_kind != RightKind::Tail)
                throw Error(ErrorCode::InvalidSpec, "unbounded interval requires a tail exponent");
            if (!(tail_exponent > 1.0))
                throw Error(ErrorCode::InvalidSpec, "tail exponent must exceed 1");
        } else {
            if (right_kind == RightKind::Tail)
                throw Error(ErrorCode::InvalidSpec, "tail spec given for a finite interval");
            if (!(right_exponent > -1.0))
                throw Error(ErrorCode::InvalidSpec, "right exponent must exceed -1");
        }
    }
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

using Integrand1D = std::function<double(double)>;
// (t, t - a, b - t): endpoint distances are exact inside the engine's
// flattening substitutions, where t itself rounds onto the endpoint
using SingularIntegrand = std::function<double(double, double, double)>;
using Integrand2D = std::function<double(double, double)>; // (r, theta)

// Adaptive integration of f over [a,b]. Endpoint singularities declared in
// `spec` are flattened by power substitutions before refinement. `splits`
// lists interior points where the integrand is rough (kinks, peaks).
QuadResult integrate(const Integrand1D& f, double a, double b, const SingularitySpec& spec,
                     double tol = 1e-10, const std::vector<double>& splits = {});

// Same contract, but the integrand receives exact distances to both interval
// endpoints; required when the integrand is a power of an endpoint distance
// too singular to reconstruct from t alone.
QuadResult integrate_sing(const SingularIntegrand& f, double a, double b,
                          const SingularitySpec& spec, double tol = 1e-10,
                          const std::vector<double>& splits = {});

// Adaptive integration of f over [a, inf); the tail is mapped to [0,1).
QuadResult integrate_to_inf(const Integrand1D& f, double a, const SingularitySpec& spec,
                            double tol = 1e-10);

// Integral of f(r,theta) r dr dtheta over the unit disk, tensorized: adaptive
// radial rule over an adaptive angular average. radial_spec describes f's
// behavior in r at r=0 (left) and r=1 (right); the r dr measure is handled
// internally. radial_splits marks radii of interior kinks/peaks.
QuadResult integrate_2d_polar(const Integrand2D& f, const SingularitySpec& radial_spec,
                              double tol = 1e-7, const std::vector<double>& radial_splits = {},
                              const std::function<std::vector<double>(double)>& theta_splits = {});

} // namespace fracblow

#endif
