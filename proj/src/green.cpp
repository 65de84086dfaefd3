#include "fracblow/green.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fracblow/gammafn.hpp"

namespace fracblow {

namespace {

double binom_next(double top, int k, double prev) {
    // C(top, k) from C(top, k-1)
    return prev * (top - static_cast<double>(k - 1)) / static_cast<double>(k);
}

double profile_series_small(double r0, double nhalf, double alpha) {
    // sum_k C(-N/2, k) r0^(alpha+k) / (alpha+k), converges for r0 < 1
    double binom = 1.0;
    double rpow = std::pow(r0, alpha);
    double sum = rpow / alpha;
    for (int k = 1; k <= 400; ++k) {
        binom = binom_next(-nhalf, k, binom);
        rpow *= r0;
        const double term = binom * rpow / (alpha + static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double profile_series_tail(double r0, double nhalf, double alpha) {
    // int_r0^inf s^(a-1)(1+s)^(-N/2) ds = sum_k C(-N/2,k) r0^(a-N/2-k)/(N/2-a+k)
    double binom = 1.0;
    double rpow = std::pow(r0, alpha - nhalf);
    double sum = rpow / (nhalf - alpha);
    for (int k = 1; k <= 400; ++k) {
        binom = binom_next(-nhalf, k, binom);
        rpow /= r0;
        const double term = binom * rpow / (nhalf - alpha + static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

} // namespace

double kernel_prefactor(int dim, const FracOrder& order) {
    const double a = order.alpha;
    const double nh = 0.5 * static_cast<double>(dim);
    return gamma_fn(nh) / (std::pow(2.0, 2.0 * a) * std::pow(M_PI, nh) * gamma_fn(a) * gamma_fn(a));
}

double kernel_profile_limit(int dim, const FracOrder& order) {
    const double nh = 0.5 * static_cast<double>(dim);
    return beta_fn(order.alpha, nh - order.alpha);
}

double kernel_profile(double r0, int dim, const FracOrder& order) {
    if (r0 <= 0.0) return 0.0;
    const double a = order.alpha;
    const double nh = 0.5 * static_cast<double>(dim);
    if (r0 <= 0.6) return profile_series_small(r0, nh, a);
    if (r0 >= 1.7) return kernel_profile_limit(dim, order) - profile_series_tail(r0, nh, a);
    // midrange: series value at 0.6 plus smooth panels on [0.6, r0]
    auto f = [&](double s) { return std::pow(s, a - 1.0) * std::pow(1.0 + s, -nh); };
    QuadResult q = integrate(f, 0.6, r0, SingularitySpec::regular(), 1e-13);
    return profile_series_small(0.6, nh, a) + q.value;
}

KernelValue green_kernel(const BallDomain& dom, const FracOrder& order, const Point& x,
                         const Point& y) {
    if (!dom.strictly_inside(x) || !dom.strictly_inside(y))
        throw Error(ErrorCode::DomainError, "kernel arguments must lie strictly inside the ball");
    const double d = dist(x, y);
    if (d == 0.0) throw Error(ErrorCode::DomainError, "kernel is singular at x = y");
    const double nx = norm(x), ny = norm(y);
    const double r0 = (1.0 - nx * nx) * (1.0 - ny * ny) / (d * d);
    const double v = kernel_prefactor(dom.dim, order) *
                     std::pow(d, 2.0 * order.alpha - static_cast<double>(dom.dim)) *
                     kernel_profile(r0, dom.dim, order);
    return KernelValue{v, 1e-14 * v};
}

KernelValue martin_kernel(const BallDomain& dom, const FracOrder& order, const Point& x,
                          const Point& z, double tol) {
    if (!dom.strictly_inside(x))
        throw Error(ErrorCode::DomainError, "x must lie strictly inside the ball");
    if (std::abs(norm(z) - 1.0) > 1e-10)
        throw Error(ErrorCode::DomainError, "z must lie on the unit sphere");
    const double a = order.alpha;
    const double rho_x = dom.rho(x);
    const double nx = norm(x);
    const double kappa = kernel_prefactor(dom.dim, order);

    auto scaled = [&](double t) {
        // z + t n_z with the inward normal n_z = -z; the boundary distance of
        // the shifted point is t exactly, so 1-|y|^2 = t(2-t) is formed from t
        // rather than from the rounded coordinates
        const Point y = (1.0 - t) * z;
        const double d = dist(x, y);
        const double r0 = (1.0 - nx * nx) * (t * (2.0 - t)) / (d * d);
        return std::pow(t, -a) * kappa *
               std::pow(d, 2.0 * a - static_cast<double>(dom.dim)) *
               kernel_profile(r0, dom.dim, order);
    };

    // t^-alpha G(x, z + t n_z) has a regular expansion in t; second-order
    // Richardson over a halving schedule
    const double t0 = 1e-2 * rho_x;
    std::vector<double> r0v, r1v, r2v;
    double prev_r2 = 0.0;
    bool have_prev = false;
    for (int j = 0; j < 44; ++j) {
        const double t = t0 * std::pow(0.5, j);
        if (t < 1e-12) break;
        r0v.push_back(scaled(t));
        const std::size_t n0 = r0v.size();
        if (n0 >= 2) r1v.push_back(2.0 * r0v[n0 - 1] - r0v[n0 - 2]);
        const std::size_t n1 = r1v.size();
        if (n1 >= 2) {
            const double r2 = (4.0 * r1v[n1 - 1] - r1v[n1 - 2]) / 3.0;
            if (have_prev) {
                const double diff = std::abs(r2 - prev_r2);
                if (diff <= tol * std::max(1.0, std::abs(r2)))
                    return KernelValue{std::max(r2, 0.0), diff};
            }
            prev_r2 = r2;
            have_prev = true;
        }
    }
    throw Error(ErrorCode::NonConvergence, "Richardson extrapolants for the boundary kernel "
                                           "failed to stabilize");
}

namespace {

double kernel_polar(const BallDomain& dom, const FracOrder& order, double a, double r,
                    double theta, double kappa) {
    const double d2 = polar_dist2(a, r, theta);
    const double d = std::sqrt(d2);
    const double r0 = (1.0 - a * a) * (1.0 - r * r) / d2;
    return kappa * std::pow(d, 2.0 * order.alpha - static_cast<double>(dom.dim)) *
           kernel_profile(r0, dom.dim, order);
}

std::vector<double> peak_splits(double a, double r, double upper) {
    std::vector<double> sp;
    const double ar = a * r;
    if (ar <= 0.0) return sp;
    double w = std::abs(a - r) / std::sqrt(ar);
    w = std::max(w, 1e-14);
    for (double s = w; s < upper; s *= 4.0) sp.push_back(s);
    return sp;
}

} // namespace

double angular_kernel_avg(const BallDomain& dom, const FracOrder& order, double a, double r,
                          double rel_tol) {
    if (a < 0.0 || r <= 0.0 || a >= 1.0 || r >= 1.0)
        throw Error(ErrorCode::DomainError, "angular kernel average needs 0 <= a < 1, 0 < r < 1");
    const double kappa = kernel_prefactor(dom.dim, order);

    if (dom.dim == 2) {
        if (a == 0.0) return 2.0 * M_PI * kernel_polar(dom, order, a, r, M_PI / 2.0, kappa);
        auto f = [&](double th) { return kernel_polar(dom, order, a, r, th, kappa); };
        auto sp = peak_splits(a, r, M_PI);
        QuadResult coarse = integrate(f, 0.0, M_PI, SingularitySpec::regular(), 1e-4, sp);
        QuadResult fine = integrate(f, 0.0, M_PI, SingularitySpec::regular(),
                                    rel_tol * std::abs(coarse.value) + 1e-300, sp);
        return 2.0 * fine.value;
    }
    // N = 3: measure sin(phi) dphi, azimuthal symmetry gives the 2 pi factor
    if (a == 0.0)
        return 4.0 * M_PI * kernel_polar(dom, order, a, r, M_PI / 2.0, kappa);
    auto f = [&](double phi) {
        return kernel_polar(dom, order, a, r, phi, kappa) * std::sin(phi);
    };
    auto sp = peak_splits(a, r, M_PI);
    QuadResult coarse = integrate(f, 0.0, M_PI, SingularitySpec::regular(), 1e-4, sp);
    QuadResult fine = integrate(f, 0.0, M_PI, SingularitySpec::regular(),
                                rel_tol * std::abs(coarse.value) + 1e-300, sp);
    return 2.0 * M_PI * fine.value;
}

double green_apply(const BallDomain& dom, const FracOrder& order, const VolumeField& f,
                   const Point& x, double tol) {
    if (!dom.strictly_inside(x))
        throw Error(ErrorCode::DomainError, "potential point must lie strictly inside the ball");
    const double a = norm(x);
    const double alpha = order.alpha;
    if (f.boundary_exponent + alpha <= -1.0)
        throw Error(ErrorCode::DivergentIntegrand,
                    "field grows too fast at the boundary for the weighted volume integral");

    if (f.radial) {
        if (!f.radial_eval)
            throw Error(ErrorCode::InvalidSpec, "radial field without radial evaluator");
        const double measure_pow = static_cast<double>(dom.dim - 1);

        auto field_at = [&](double r, double rho) {
            if (f.radial_eval_rho) return f.radial_eval_rho(rho);
            return f.radial_eval(r);
        };
        auto run = [&](double inner_rel, double outer_abs) {
            // [0, a]: the boundary distance 1 - t is well separated from zero
            auto ring_inner = [&](double t, double dl, double dr) {
                (void)dl;
                (void)dr;
                if (t <= 0.0) return 0.0;
                const double v = field_at(t, 1.0 - t);
                if (v == 0.0) return 0.0;
                return v * std::pow(t, measure_pow) *
                       angular_kernel_avg(dom, order, a, t, inner_rel);
            };
            // [a, 1]: dr is the exact boundary distance
            auto ring_outer = [&](double t, double dl, double dr) {
                (void)dl;
                if (t <= 0.0 || dr <= 0.0) return 0.0;
                const double v = field_at(t, dr);
                if (v == 0.0) return 0.0;
                return v * std::pow(t, measure_pow) *
                       angular_kernel_avg(dom, order, a, t, inner_rel);
            };
            // graded hints into the boundary layer
            std::vector<double> bsplits;
            for (double rho = 0.25; rho > 1e-7; rho *= 0.25) bsplits.push_back(1.0 - rho);
            // the angular average behaves like |r-a|^(2 alpha - 1) across the
            // diagonal (logarithmic at alpha = 1/2, which still needs the
            // substitution); near r=1 the kernel adds rho^alpha on f's slope
            double diag = 2.0 * alpha - 1.0;
            if (std::abs(diag) < 1e-9) diag = -0.05;
            if (a > 1e-12) {
                QuadResult lo, hi;
                try {
                    lo = integrate_sing(ring_inner, 0.0, a,
                                        SingularitySpec::endpoints(measure_pow, diag),
                                        0.5 * outer_abs);
                } catch (const Error& err) {
                    throw Error(ErrorCode::NonConvergence,
                                std::string("inner radial piece: ") + err.what());
                }
                std::vector<double> hi_splits;
                for (double s : bsplits)
                    if (s > a) hi_splits.push_back(s);
                try {
                    hi = integrate_sing(
                        ring_outer, a, 1.0,
                        SingularitySpec::endpoints(diag, f.boundary_exponent + alpha),
                        0.5 * outer_abs, hi_splits);
                } catch (const Error& err) {
                    throw Error(ErrorCode::NonConvergence,
                                std::string("outer radial piece: ") + err.what());
                }
                return lo.value + hi.value;
            }
            return integrate_sing(ring_outer, 0.0, 1.0,
                                  SingularitySpec::endpoints(measure_pow,
                                                             f.boundary_exponent + alpha),
                                  outer_abs, bsplits)
                .value;
        };
        // coarse magnitude pass, then a refinement with matched inner noise
        const double coarse = run(1e-5, 1e-2 * (1.0 + std::abs(field_at(0.7, 0.3))));
        const double scale = std::abs(coarse) + 1e-300;
        return run(0.02 * tol, tol * scale);
    }

    if (dom.dim != 2)
        throw Error(ErrorCode::DomainError, "non-radial volume potentials are 2D only");

    const double theta_x = std::atan2(x[1], x[0]);
    auto integrand = [&](double r, double th) {
        const Point y = make_point(r * std::cos(th), r * std::sin(th));
        const double v = f.eval(y);
        if (v == 0.0) return 0.0;
        const double d2 = polar_dist2(a, r, th - theta_x);
        const double d = std::sqrt(d2);
        if (d == 0.0) return 0.0;
        const double r0 = (1.0 - a * a) * (1.0 - r * r) / d2;
        return v * kernel_prefactor(2, order) * std::pow(d, 2.0 * alpha - 2.0) *
               kernel_profile(r0, 2, order);
    };
    std::vector<double> rsplits;
    if (a > 1e-12) rsplits.push_back(a);
    for (double rho = 0.25; rho > 1e-6; rho *= 0.25) rsplits.push_back(1.0 - rho);
    auto tsplits = [&](double r) {
        std::vector<double> sp;
        for (double s : peak_splits(a, r, M_PI)) {
            sp.push_back(theta_x + s);
            sp.push_back(theta_x - s);
        }
        for (auto& v : sp) {
            while (v < 0.0) v += 2.0 * M_PI;
            while (v >= 2.0 * M_PI) v -= 2.0 * M_PI;
        }
        return sp;
    };
    SingularitySpec rspec = SingularitySpec::endpoints(0.0, f.boundary_exponent + alpha);
    QuadResult q = integrate_2d_polar(integrand, rspec, tol, rsplits, tsplits);
    return q.value;
}

} // namespace fracblow
