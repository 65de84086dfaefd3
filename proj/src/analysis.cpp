#include "fracblow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracblow/quadrature.hpp"

namespace fracblow {

namespace {

struct LsFit {
    double slope, intercept, r2;
};

LsFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / den;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fit = slope * x[i] + intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    return {slope, intercept, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

} // namespace

RateFit fit_boundary_rate(const FieldOnGrid& field, std::pair<double, double> window) {
    const auto [lo, hi] = window;
    if (!(lo > 0.0 && hi > lo && hi <= 0.5))
        throw Error(ErrorCode::DomainError, "rate window must lie inside (0, 0.5]");
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < field.grid->n_levels(); ++j) {
        const double rho = field.grid->levels[j];
        if (rho < lo || rho > hi) continue;
        const double m = field.angular_mean_value(j);
        if (!(m > 0.0))
            throw Error(ErrorCode::DegenerateField, "rate fit needs positive angular means");
        lx.push_back(std::log(rho));
        ly.push_back(std::log(m));
    }
    if (lx.size() < 8)
        throw Error(ErrorCode::InsufficientWindow, "need at least 8 grid levels in the window");
    LsFit f = least_squares(lx, ly);
    RateFit out;
    out.exponent = f.slope;
    out.intercept = f.intercept;
    out.r_squared = f.r2;
    out.rho_window = window;
    return out;
}

namespace {

// integral of rho^alpha (1-rho) drho over [a, b] (disk volume element along a
// fixed angle, written in the boundary distance)
double rho_weight_integral(double a, double b, double alpha) {
    auto prim = [&](double t) {
        return std::pow(t, alpha + 1.0) / (alpha + 1.0) - std::pow(t, alpha + 2.0) / (alpha + 2.0);
    };
    return prim(b) - prim(a);
}

// m(lambda) for a radial field: 1D integration over the profile, resolved on
// a fine log grid plus the closed-form sub-grid tail.
double m_lambda_radial(const FieldOnGrid& field, double alpha, double lambda) {
    const auto& lv = field.grid->levels;
    const double rho_min = lv.front();
    double acc = 0.0;
    const int n = 4000;
    const double llo = std::log(rho_min), lhi = std::log(lv.back());
    double prev_rho = 0.0;
    bool prev_in = false;
    for (int i = 0; i < n; ++i) {
        const double rho = std::exp(llo + (lhi - llo) * i / (n - 1.0));
        const bool in = field.interp(rho, 0.0) > lambda;
        if (i > 0 && (in || prev_in)) {
            // resolve the crossing inside the slab by one bisection level
            double a = prev_rho, b = rho;
            if (in != prev_in) {
                for (int bs = 0; bs < 30; ++bs) {
                    const double mid = 0.5 * (a + b);
                    if ((field.interp(mid, 0.0) > lambda) == prev_in) a = mid;
                    else b = mid;
                }
                if (prev_in) acc += rho_weight_integral(prev_rho, 0.5 * (a + b), alpha);
                else acc += rho_weight_integral(0.5 * (a + b), rho, alpha);
            } else {
                acc += rho_weight_integral(prev_rho, rho, alpha);
            }
        }
        prev_rho = rho;
        prev_in = in;
    }
    // sub-grid tail by the power extension
    const double u_edge = field.interp(rho_min, 0.0);
    const double beta = field.boundary_exponent;
    double rho_star = 0.0;
    if (u_edge > lambda) {
        rho_star = rho_min;
    } else if (beta < 0.0 && u_edge > 0.0) {
        rho_star = rho_min * std::pow(lambda / u_edge, 1.0 / beta);
        rho_star = std::min(rho_star, rho_min);
    }
    if (rho_star > 0.0) acc += rho_weight_integral(0.0, rho_star, alpha);
    return 2.0 * M_PI * acc;
}

// m(lambda) for a general field: cell sums over the grid plus per-column
// sub-grid tails.
double m_lambda_cells(const FieldOnGrid& field, double alpha, double lambda) {
    const auto& lv = field.grid->levels;
    const std::size_t L = lv.size();
    double acc = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        const double lo = j == 0 ? lv[0] * std::sqrt(lv[0] / lv[1]) : std::sqrt(lv[j - 1] * lv[j]);
        const double hi = j + 1 == L ? 1.0 : std::sqrt(lv[j] * lv[j + 1]);
        const auto& th = field.grid->thetas[j];
        const std::size_t nt = th.size();
        for (std::size_t i = 0; i < nt; ++i) {
            if (!(field.value(j, i) > lambda)) continue;
            const double tp = th[(i + 1) % nt] + (i + 1 == nt ? 2.0 * M_PI : 0.0);
            const double tm = i == 0 ? th[nt - 1] - 2.0 * M_PI : th[i - 1];
            acc += 0.5 * (tp - tm) * rho_weight_integral(lo, std::min(hi, 1.0), alpha);
        }
    }
    // column tails below the deepest cells
    const double rho_b = lv[0] * std::sqrt(lv[0] / lv[1]);
    const auto& th0 = field.grid->thetas[0];
    const std::size_t nt0 = th0.size();
    const double beta = field.boundary_exponent;
    for (std::size_t i = 0; i < nt0; ++i) {
        const double u0 = field.value(0, i);
        double rho_star = 0.0;
        if (u0 > lambda) rho_star = rho_b;
        else if (beta < 0.0 && u0 > 0.0)
            rho_star = std::min(rho_b, lv[0] * std::pow(lambda / u0, 1.0 / beta));
        if (rho_star <= 0.0) continue;
        const double tp = th0[(i + 1) % nt0] + (i + 1 == nt0 ? 2.0 * M_PI : 0.0);
        const double tm = i == 0 ? th0[nt0 - 1] - 2.0 * M_PI : th0[i - 1];
        acc += 0.5 * (tp - tm) * rho_weight_integral(0.0, rho_star, alpha);
    }
    return acc;
}

} // namespace

WeakNormEstimate weak_norm_decay(const FieldOnGrid& field, const FracOrder& order, double kappa) {
    if (!(kappa > 1.0)) throw Error(ErrorCode::DomainError, "kappa must exceed 1");
    const double vmax = field.max_normalized();
    const double vmin = field.min_normalized();
    if (!(vmax > 0.0) || vmax - vmin <= 1e-14 * std::abs(vmax))
        throw Error(ErrorCode::DegenerateField, "field is constant or nonpositive");

    // lambda ladder spanning the field's resolved dynamic range
    double u_hi = 0.0, u_lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < field.grid->n_levels(); ++j)
        for (std::size_t i = 0; i < field.grid->thetas[j].size(); ++i) {
            const double v = field.value(j, i);
            u_hi = std::max(u_hi, v);
            u_lo = std::min(u_lo, v);
        }
    const double lam_lo = std::max(u_lo * 2.0, u_hi * 1e-6);
    const double lam_hi = u_hi / 3.0;
    if (!(lam_hi > lam_lo))
        throw Error(ErrorCode::DegenerateField, "field has no usable dynamic range");

    WeakNormEstimate est;
    est.kappa = kappa;
    const int n_lam = 40;
    std::vector<double> lx, ly;
    const double alpha = order.alpha;
    for (int i = 0; i < n_lam; ++i) {
        const double lam =
            std::exp(std::log(lam_lo) + (std::log(lam_hi) - std::log(lam_lo)) * i / (n_lam - 1.0));
        const double m = field.radial ? m_lambda_radial(field, alpha, lam)
                                      : m_lambda_cells(field, alpha, lam);
        est.lambdas.push_back(lam);
        est.m_values.push_back(m);
        if (m > 0.0) {
            lx.push_back(std::log(lam));
            ly.push_back(std::log(m));
        }
        est.band_constant = std::max(est.band_constant, std::pow(lam, kappa) * m);
    }
    if (lx.size() < 5)
        throw Error(ErrorCode::DegenerateField, "too few nonempty super-level sets");
    est.fitted_decay = least_squares(lx, ly).slope;
    return est;
}

SubcriticalReport subcritical_check(const Nonlinearity& g, const FracOrder& order, int dim) {
    SubcriticalReport rep;
    rep.p_star = order.p_star();
    rep.p_star_N = order.p_star_N(dim);

    auto power_verdict = [&](double pc) {
        return g.p < pc ? TailVerdict::Convergent : TailVerdict::Divergent;
    };
    auto numeric_verdict = [&](double pc) {
        // truncation-doubling test of int_1^inf g(s) s^(-1-pc) ds
        auto f = [&](double s) { return g(s) * std::pow(s, -1.0 - pc); };
        double total = 0.0, lo = 1.0;
        std::vector<double> increments;
        for (int j = 0; j < 36; ++j) {
            const double hi = lo * 2.0;
            QuadResult q = integrate(f, lo, hi, SingularitySpec::regular(), 1e-12);
            total += q.value;
            increments.push_back(q.value);
            lo = hi;
        }
        const std::size_t n = increments.size();
        const double tail_ratio = increments[n - 1] / std::max(increments[n - 2], 1e-300);
        if (increments[n - 1] < 1e-10 * total && tail_ratio < 0.95) return TailVerdict::Convergent;
        if (tail_ratio >= 1.0) return TailVerdict::Divergent;
        // geometric extrapolation of the remaining tail
        const double rem = increments[n - 1] * tail_ratio / (1.0 - tail_ratio);
        if (rem < 1e-4 * total) return TailVerdict::Convergent;
        if (tail_ratio > 0.999) return TailVerdict::Divergent;
        return TailVerdict::Inconclusive;
    };

    switch (g.kind) {
        case Nonlinearity::Kind::Zero:
            rep.g1 = rep.g2 = TailVerdict::Convergent;
            rep.detail = "identically zero";
            break;
        case Nonlinearity::Kind::Power:
            rep.g1 = power_verdict(rep.p_star);
            rep.g2 = power_verdict(rep.p_star_N);
            rep.detail = "closed-form power tail";
            break;
        case Nonlinearity::Kind::Custom:
            rep.g1 = numeric_verdict(rep.p_star);
            rep.g2 = numeric_verdict(rep.p_star_N);
            rep.detail = "numeric tail integral with truncation doubling";
            break;
    }
    return rep;
}

RegimeVerdict classify_regime(const std::vector<SolveResult>& family, const FracOrder& order,
                              double p) {
    (void)p;
    if (family.size() < 4)
        throw Error(ErrorCode::DomainError, "family too small to classify");
    const double k_min = family.front().k, k_max = family.back().k;
    if (!(k_max / k_min >= 1e3))
        throw Error(ErrorCode::DomainError, "family must span at least three decades of k");

    RegimeVerdict v;
    const std::size_t center = family.front().solution.grid->n_levels() - 1;
    for (const auto& r : family) v.center_values.push_back(r.solution.value(center, 0));

    // members in the last decade of k
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < family.size(); ++i)
        if (family[i].k >= k_max / 10.0) idx.push_back(i);
    if (idx.size() < 2)
        throw Error(ErrorCode::DomainError, "need several family members in the last decade");

    double max_inc = 0.0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        const double a = v.center_values[idx[j - 1]];
        const double b = v.center_values[idx[j]];
        max_inc = std::max(max_inc, std::abs(b / a - 1.0));
    }
    v.max_increment = max_inc;
    v.last_decade_growth = v.center_values[idx.back()] / v.center_values[idx.front()];

    if (max_inc < 0.05) {
        v.kind = RegimeVerdict::Kind::StrongLimit;
        v.rate = fit_boundary_rate(family.back().solution);
    } else if (v.last_decade_growth >= 2.0) {
        v.kind = RegimeVerdict::Kind::FamilyBlowUp;
    } else {
        v.kind = RegimeVerdict::Kind::Inconclusive;
    }
    return v;
}

} // namespace fracblow
