#ifndef FRACBLOW_ANALYSIS_HPP
#define FRACBLOW_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "fracblow/solver.hpp"

namespace fracblow {

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> rho_window{0.0, 0.0};
};

// Least-squares slope of log(angular mean of u) against log rho over the
// levels inside the window. Needs at least 8 levels in the window.
RateFit fit_boundary_rate(const FieldOnGrid& field, std::pair<double, double> window = {1e-4,
                                                                                        1e-2});

struct WeakNormEstimate {
    double kappa = 0.0;
    double fitted_decay = 0.0;  // slope of log m(lambda) vs log lambda
    double band_constant = 0.0; // sup over the probed range of lambda^kappa m(lambda)
    std::vector<double> lambdas;
    std::vector<double> m_values;
};

// Distribution-function decay of the field in the rho^alpha-weighted volume:
// m(lambda) = integral of rho^alpha over { u > lambda }, evaluated by grid
// quadrature for a log-spaced ladder of lambdas, then fitted in log-log.
WeakNormEstimate weak_norm_decay(const FieldOnGrid& field, const FracOrder& order, double kappa);

enum class TailVerdict { Convergent, Divergent, Inconclusive };

struct SubcriticalReport {
    TailVerdict g1 = TailVerdict::Inconclusive; // against (1+a)/(1-a)
    TailVerdict g2 = TailVerdict::Inconclusive; // against (N+a)/(N-a)
    double p_star = 0.0;
    double p_star_N = 0.0;
    std::string detail;
};

// Tail-integral subcriticality of g: exact verdicts for powers, a numeric
// truncation-doubling test for custom nonlinearities.
SubcriticalReport subcritical_check(const Nonlinearity& g, const FracOrder& order, int dim);

struct RegimeVerdict {
    enum class Kind { StrongLimit, FamilyBlowUp, Inconclusive } kind = Kind::Inconclusive;
    std::optional<RateFit> rate;    // boundary fit of the largest-k member (StrongLimit)
    double max_increment = 0.0;     // largest relative step over the last decade of k
    double last_decade_growth = 0.0;
    std::vector<double> center_values;
};

// Classification of a k-family at the center probe: StrongLimit when the
// center sequence is Cauchy (relative increments < 5% over the last decade of
// k), FamilyBlowUp when it grows by >= 2x over that decade.
RegimeVerdict classify_regime(const std::vector<SolveResult>& family, const FracOrder& order,
                              double p);

} // namespace fracblow

#endif
