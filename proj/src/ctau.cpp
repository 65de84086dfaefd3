#include "fracblow/ctau.hpp"

#include <cmath>

namespace fracblow {

namespace {

// (1-t)^tau + (1+t)^tau - 2 for small t, as the even binomial series
// 2 * sum_{k>=1} C(tau, 2k) t^(2k). Direct evaluation loses all digits to
// cancellation once t^2 |tau(tau-1)| approaches machine precision.
double bracket_series(double tau, double t) {
    const double t2 = t * t;
    double binom = 1.0; // C(tau, j)
    double sum = 0.0;
    double tpow = 1.0;
    for (int j = 1; j <= 160; ++j) {
        binom *= (tau - static_cast<double>(j - 1)) / static_cast<double>(j);
        if (j % 2 == 0) {
            tpow *= t2;
            const double term = 2.0 * binom * tpow;
            sum += term;
            if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
        }
    }
    return sum;
}

} // namespace

CTauValue c_tau(const FracOrder& order, double tau, double quad_tol) {
    if (!(tau > -1.0 && tau < 0.0))
        throw Error(ErrorCode::DomainError, "tau must lie in (-1,0)");
    const double a = order.alpha;
    const double s = 1.0 + 2.0 * a;

    // [0,1]: cancellation at 0 leaves t^(1-2a); the |1-t|^tau factor is
    // singular at 1, where only the engine-supplied endpoint distance is
    // accurate enough to raise to the power tau
    auto f01 = [&](double t, double dl, double dr) {
        const double bracket = dl < 0.25 ? bracket_series(tau, dl)
                                         : std::pow(dr, tau) + std::pow(1.0 + t, tau) - 2.0;
        return bracket / std::pow(dl, s);
    };
    QuadResult r1 = integrate_sing(f01, 0.0, 1.0,
                                   SingularitySpec::endpoints(1.0 - 2.0 * a, tau), 0.5 * quad_tol);

    // [1,inf): bracket -> -2, so the integrand decays like t^-(1+2a)
    auto f1inf = [&](double t) { return (std::pow(1.0 + t, tau) - 2.0) / std::pow(t, s); };
    QuadResult r2 = integrate_to_inf(f1inf, 1.0, SingularitySpec::with_tail(0.0, s), 0.5 * quad_tol);

    return CTauValue{tau, r1.value + r2.value, r1.error_estimate + r2.error_estimate};
}

double tau0(const FracOrder& order, double tol, double quad_tol, int scan_points) {
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tol must be positive");
    const double lo = -1.0 + 1e-2;
    const double hi = -1e-2;
    const int n = scan_points < 3 ? 3 : scan_points;

    double prev_tau = lo;
    double prev_val = c_tau(order, lo, quad_tol).value;
    double bl = 0.0, bh = 0.0, vl = 0.0;
    bool found = false;
    for (int i = 1; i < n; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = c_tau(order, t, quad_tol).value;
        if (prev_val == 0.0) return prev_tau;
        if (prev_val * v <= 0.0) {
            bl = prev_tau;
            bh = t;
            vl = prev_val;
            found = true;
            break;
        }
        prev_tau = t;
        prev_val = v;
    }
    if (!found)
        throw Error(ErrorCode::BracketError, "no sign change of C(tau) on the scan of (-1,0)");

    while (bh - bl > tol) {
        const double mid = 0.5 * (bl + bh);
        const double vm = c_tau(order, mid, quad_tol).value;
        if (vm == 0.0) return mid;
        if (vl * vm < 0.0) {
            bh = mid;
        } else {
            bl = mid;
            vl = vm;
        }
    }
    return 0.5 * (bl + bh);
}

std::vector<CTauValue> c_tau_scan(const FracOrder& order, int n, double lo, double hi,
                                  double quad_tol) {
    if (n < 2) throw Error(ErrorCode::DomainError, "scan needs at least 2 points");
    std::vector<CTauValue> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(c_tau(order, t, quad_tol));
    }
    return out;
}

} // namespace fracblow
