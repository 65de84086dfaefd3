#ifndef FRACBLOW_CTAU_HPP
#define FRACBLOW_CTAU_HPP

#include <vector>

#include "fracblow/fracorder.hpp"
#include "fracblow/quadrature.hpp"

namespace fracblow {

struct CTauValue {
    double tau;
    double value;
    double error_estimate;
};

// C(tau) = int_0^inf [chi_(0,1)(t) |1-t|^tau + (1+t)^tau - 2] / t^(1+2*alpha) dt,
// tau in (-1,0). The bracket cancels to O(t^2) at t=0 and has a |1-t|^tau
// singularity at t=1; both are declared to the quadrature engine.
CTauValue c_tau(const FracOrder& order, double tau, double quad_tol = 1e-10);

// Root of tau -> C(tau) in (-1,0), located by a sign-change scan followed by
// bisection to width tol.
double tau0(const FracOrder& order, double tol = 1e-8, double quad_tol = 1e-10,
            int scan_points = 50);

// Scan helper (used by the CLI table and the uniqueness probe): C at
// `n` evenly spaced tau values in (lo, hi).
std::vector<CTauValue> c_tau_scan(const FracOrder& order, int n, double lo = -0.99,
                                  double hi = -0.01, double quad_tol = 1e-8);

} // namespace fracblow

#endif
