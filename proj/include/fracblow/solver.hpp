#ifndef FRACBLOW_SOLVER_HPP
#define FRACBLOW_SOLVER_HPP

#include <memory>
#include <string>
#include <vector>

#include "fracblow/measures.hpp"
#include "fracblow/nonlinearity.hpp"

namespace fracblow {

struct SolverOptions {
    double tol = 1e-6;        // normalized sup-norm stopping threshold
    int max_iterations = 200; // total sweep budget (Picard + Newton)
    bool track_iterates = false;
    double op_rel_tol = 1e-8; // kernel-row accuracy of the discrete operator
};

struct SolveResult {
    FieldOnGrid solution; // normalized storage u rho^(1-alpha)
    int iterations = 0;
    double residual = 0.0; // sup of |u + G[g(u)] - kP| relative to kP, over the grid
    bool sandwich_ok = false;
    double k = 0.0;
    bool converged = false;
    std::string method; // "picard" or "picard+newton"
    // optional per-iterate normalized radial profiles (radial solves only)
    std::vector<std::vector<double>> iterate_profiles;
};

// Fixed point of u = k P_mu - G[g(u)] on the graded grid, where P_mu is the
// boundary-measure potential. Starts from u0 = k P_mu with plain Picard
// sweeps and falls back to a damped Newton solve of the same discrete system
// when the Picard map stops contracting.
SolveResult solve(const BallDomain& dom, const FracOrder& order, const Nonlinearity& g,
                  const BoundaryMeasure& mu, double k, std::shared_ptr<const GradedGrid> grid,
                  const SolverOptions& opts = {});
SolveResult solve(const BallDomain& dom, const FracOrder& order, const TruncatedNonlinearity& g,
                  const BoundaryMeasure& mu, double k, std::shared_ptr<const GradedGrid> grid,
                  const SolverOptions& opts = {});

// Solves along a strictly increasing k schedule with warm starts and checks
// pointwise monotonicity in k (within a small model tolerance near the
// center at very large k).
std::vector<SolveResult> solve_family(const BallDomain& dom, const FracOrder& order,
                                      const Nonlinearity& g, const BoundaryMeasure& mu,
                                      const std::vector<double>& ks,
                                      std::shared_ptr<const GradedGrid> grid,
                                      const SolverOptions& opts = {});

// Discrete volume-potential operator applied to a radial profile given by a
// field (used by diagnostics: the nonlinear-correction sweep of the
// acceptance suite reuses the solver's radial rows).
std::vector<double> radial_green_apply_profile(const BallDomain& dom, const FracOrder& order,
                                               std::shared_ptr<const GradedGrid> grid,
                                               const std::function<double(double)>& profile_of_rho,
                                               double boundary_exponent,
                                               double op_rel_tol = 1e-8);

} // namespace fracblow

#endif
