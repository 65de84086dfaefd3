#ifndef FRACBLOW_FRACLAP_HPP
#define FRACBLOW_FRACLAP_HPP

#include <functional>
#include <vector>

#include "fracblow/fracorder.hpp"
#include "fracblow/geometry.hpp"
#include "fracblow/grid.hpp"

namespace fracblow {

// Closed-form field on R^N: the evaluator must return 0 outside the closed
// ball. boundary_exponent beta describes u ~ c rho^beta near the boundary.
struct ExplicitField {
    std::function<double(const Point&)> eval;
    double boundary_exponent = 0.0;
    // optional evaluator taking an externally computed exact boundary
    // distance; coordinate subtraction loses all digits near the boundary
    std::function<double(const Point&, double)> eval_rho;

    ExplicitField(std::function<double(const Point&)> e, double beta,
                  std::function<double(const Point&, double)> er = {})
        : eval(std::move(e)), boundary_exponent(beta), eval_rho(std::move(er)) {
        if (!(beta > -1.0))
            throw Error(ErrorCode::DomainError, "boundary exponent must exceed -1");
    }
};

ExplicitField power_profile_field(const BallDomain& dom, double tau);      // rho^tau inside
ExplicitField wp_field(const BallDomain& dom, const FracOrder& order, double p);
ExplicitField constant_field(const BallDomain& dom, double c);
// smooth radial interpolant of a grid field (shape-preserving in log rho)
ExplicitField radial_interpolant_field(const BallDomain& dom, const FieldOnGrid& field);

// Pointwise principal value of the (unnormalized) fractional Laplacian,
//   -int_{R^N \ B_eps(x)} (u(z) - u(x)) |z-x|^(-N-2a) dz,
// stabilized over the schedule eps_j = rho(x) 2^-j, j = 3..12. N = 2 only.
double frac_lap_eval(const BallDomain& dom, const FracOrder& order, const ExplicitField& u,
                     const Point& x, double rel_tol = 1e-6);

// Constant linking the principal-value form above to the operator the ball
// Green kernel inverts: c_{N,a} = 4^a Gamma(N/2+a) / (pi^(N/2) Gamma(1-a)/a).
double pv_normalization(int dim, const FracOrder& order);

// Flat-boundary reduction factor: the N-dimensional principal value of a
// one-sided profile t^tau equals -C'_N C(tau) t^(tau-2a), with
// C'_N = pi^((N-1)/2) Gamma(a+1/2) / Gamma((N+2a)/2).
double half_space_factor(int dim, const FracOrder& order);

struct SupersolutionReport {
    double p = 0.0;
    double c_p = 0.0;     // most negative normalized value of the PV operator on w_p
    double lambda0 = 0.0; // |c_p|^(1/(p-1))
    std::vector<Point> points;
    std::vector<double> normalized_pv; // PV(w_p) * rho^(2a/(p-1)+2a)
    std::vector<double> residual_rel;  // (lambda0 PV + (lambda0 w_p)^p) / (lambda0 w_p)^p
    bool ok = false;
    std::vector<std::size_t> failing;
};

// Estimates c(p) on the given points, forms lambda0, and verifies that
// lambda0 w_p is a supersolution: residuals >= -tol relative to the local
// scale (lambda0 w_p)^p.
SupersolutionReport check_supersolution(const BallDomain& dom, const FracOrder& order, double p,
                                        const std::vector<Point>& points, double tol = 1e-3,
                                        double pv_tol = 1e-6);

// default radial probe points for the supersolution check
std::vector<Point> radial_probe_points(int count, double rho_lo = 0.06, double rho_hi = 0.85);

} // namespace fracblow

#endif
