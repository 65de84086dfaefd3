#ifndef FRACBLOW_GREEN_HPP
#define FRACBLOW_GREEN_HPP

#include <functional>

#include "fracblow/fracorder.hpp"
#include "fracblow/geometry.hpp"
#include "fracblow/quadrature.hpp"

namespace fracblow {

struct KernelValue {
    double value = 0.0;          // >= 0
    double error_estimate = 0.0; // absolute
};

// kappa_{N,alpha} = Gamma(N/2) / (2^(2 alpha) pi^(N/2) Gamma(alpha)^2)
double kernel_prefactor(int dim, const FracOrder& order);

// F(r0) = int_0^r0 s^(alpha-1) (1+s)^(-N/2) ds, the kernel's inner profile.
// Series at both ends, fixed Gauss-Kronrod panels in the midrange.
double kernel_profile(double r0, int dim, const FracOrder& order);
double kernel_profile_limit(int dim, const FracOrder& order); // F(inf) = B(alpha, N/2-alpha)

// Ball Green kernel G_alpha(x,y) = kappa |x-y|^(2a-N) F(r0),
// r0 = (1-|x|^2)(1-|y|^2)/|x-y|^2.
KernelValue green_kernel(const BallDomain& dom, const FracOrder& order, const Point& x,
                         const Point& y);

// Boundary kernel M_alpha(x,z) = lim_{t->0+} t^-alpha G_alpha(x, z + t n_z)
// with n_z the inward normal, by Richardson extrapolation over t0, t0/2, ...
KernelValue martin_kernel(const BallDomain& dom, const FracOrder& order, const Point& x,
                          const Point& z, double tol = 1e-9);

// Angular average of the kernel along a circle (N=2) or latitude sphere (N=3):
//   N=2: int_0^{2pi} G((a,0), r e_theta) dtheta
//   N=3: 2 pi int_0^pi G((0,0,a), r (sin phi, 0, cos phi)) sin phi dphi
// Relative tolerance; the near-diagonal peak (width ~ |a-r|) is resolved by
// split hints handed to the adaptive engine.
double angular_kernel_avg(const BallDomain& dom, const FracOrder& order, double a, double r,
                          double rel_tol = 1e-9);

// A scalar field on the ball for volume potentials: evaluator plus the
// algebraic boundary exponent (f ~ c rho^beta near the boundary) that the
// quadrature grading needs. Radial fields carry a cheap 1D evaluator.
struct VolumeField {
    std::function<double(const Point&)> eval;
    double boundary_exponent = 0.0;
    bool radial = false;
    std::function<double(double)> radial_eval; // value at radius r, set when radial
    // value as a function of the boundary distance rho; lets the engine feed
    // exact distances into boundary-singular profiles
    std::function<double(double)> radial_eval_rho;
};

// Volume potential (G_alpha f)(x) = int_ball G_alpha(x,y) f(y) dy. The kernel
// peak at y=x and the boundary layer of f are declared to the engine.
double green_apply(const BallDomain& dom, const FracOrder& order, const VolumeField& f,
                   const Point& x, double tol = 1e-7);

} // namespace fracblow

#endif
