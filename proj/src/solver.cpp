#include "fracblow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>

#include "fracblow/parallel.hpp"

namespace fracblow {

namespace {

constexpr double kRhoDeep = 1e-11; // numeric rows stop here; modeled tail below

// ---- small dense linear algebra -------------------------------------------

bool lu_solve(std::vector<double> A, std::vector<double>& b, std::size_t n) {
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r * n + c]) > std::abs(A[best * n + c])) best = r;
        if (A[best * n + c] == 0.0) return false;
        if (best != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[c * n + j], A[best * n + j]);
            std::swap(b[c], b[best]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r * n + c] / A[c * n + c];
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) A[r * n + j] -= f * A[c * n + j];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i * n + j] * b[j];
        b[i] = s / A[i * n + i];
    }
    return true;
}

// ---- Gauss-Legendre nodes --------------------------------------------------

struct GaussRule {
    std::vector<double> x, w; // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                p0 = 1.0;
                p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double d = n * (x * p1 - p0) / (x * x - 1.0);
                g.x[i] = x;
                g.w[i] = 2.0 / ((1.0 - x * x) * d * d);
                break;
            }
        }
    }
    return g;
}

const GaussRule& gl12() {
    static GaussRule r = gauss_legendre(12);
    return r;
}

// ---- radial discrete operator ----------------------------------------------

// One row integrates f(r) K_ang(a_i, r) r dr over (0, 1 - kRhoDeep] as a dot
// product; the boundary layer below kRhoDeep enters through coefficient
// k_deep times a shared profile integral in rho^alpha units.
struct OperatorRow {
    std::vector<double> nodes;   // radii
    std::vector<double> weights; // include K_ang * r * quadrature weight
    double k_deep = 0.0;         // K_ang(a, 1-rho) ~ k_deep rho^alpha as rho -> 0
};

struct RadialOperator {
    std::vector<double> levels; // rho levels (ascending, last = 1)
    std::vector<OperatorRow> rows;
};

void add_plain_panel(OperatorRow& row, const BallDomain& dom, const FracOrder& order, double a,
                     double lo, double hi, double rel_tol) {
    const auto& g = gl12();
    for (std::size_t q = 0; q < g.x.size(); ++q) {
        const double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.x[q];
        const double w = 0.5 * (hi - lo) * g.w[q];
        row.nodes.push_back(r);
        row.weights.push_back(w * r * angular_kernel_avg(dom, order, a, r, rel_tol));
    }
}

// panel [a, a+len] (side=+1) or [a-len, a] (side=-1) with the |r-a|^(2a-1)
// edge flattened by r = a + side len s^m
void add_diagonal_panel(OperatorRow& row, const BallDomain& dom, const FracOrder& order, double a,
                        double len, int side, double rel_tol) {
    const double e = 2.0 * order.alpha - 1.0;
    const int m = e >= 1.0 ? 1 : std::clamp(static_cast<int>(std::ceil(2.0 / (1.0 + e))), 1, 64);
    const auto& g = gl12();
    for (std::size_t q = 0; q < g.x.size(); ++q) {
        const double s = 0.5 + 0.5 * g.x[q];
        const double sm1 = std::pow(s, m - 1);
        const double r = a + side * len * sm1 * s;
        if (r <= 0.0 || r >= 1.0) continue;
        const double w = 0.5 * g.w[q] * len * m * sm1;
        row.nodes.push_back(r);
        row.weights.push_back(w * r * angular_kernel_avg(dom, order, a, r, rel_tol));
    }
}

OperatorRow build_row(const BallDomain& dom, const FracOrder& order,
                      const std::vector<double>& levels, double a, double rel_tol) {
    OperatorRow row;
    const double r_end = 1.0 - kRhoDeep;

    std::vector<double> breaks{0.0};
    for (double rho : levels)
        if (rho < 1.0) breaks.push_back(1.0 - rho);
    // boundary-layer grading below the grid resolution (about 2 per decade)
    for (double rho = levels.front(); rho > kRhoDeep * 3.0; rho /= 3.1623)
        breaks.push_back(1.0 - rho);
    breaks.push_back(r_end);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    if (a > 0.0) {
        // gaps to the nearest breaks on each side of the diagonal
        double gap_lo = a, gap_hi = r_end - a;
        for (double b : breaks) {
            const double d = std::abs(b - a);
            if (d < 1e-12) continue;
            if (b < a) gap_lo = std::min(gap_lo, a - b);
            else gap_hi = std::min(gap_hi, b - a);
        }
        const double dl = 0.5 * gap_lo, dh = 0.5 * gap_hi;

        // left side: breaks outside the window plus a graded approach, then a
        // substituted edge panel handling the |r-a|^(2a-1) behavior
        std::vector<double> left, right;
        for (double b : breaks) {
            if (b <= a - dl) left.push_back(b);
            if (b >= a + dh) right.push_back(b);
        }
        double dmin_l = dl;
        for (double d = dl / 4.0; d > 3e-5 * dl; d /= 4.0) {
            left.push_back(a - d);
            dmin_l = d;
        }
        double dmin_r = dh;
        for (double d = dh / 4.0; d > 3e-5 * dh; d /= 4.0) {
            right.push_back(a + d);
            dmin_r = d;
        }
        std::sort(left.begin(), left.end());
        std::sort(right.begin(), right.end());

        for (std::size_t i = 0; i + 1 < left.size(); ++i)
            add_plain_panel(row, dom, order, a, left[i], left[i + 1], rel_tol);
        add_diagonal_panel(row, dom, order, a, dmin_l, -1, rel_tol);
        add_diagonal_panel(row, dom, order, a, dmin_r, +1, rel_tol);
        for (std::size_t i = 0; i + 1 < right.size(); ++i)
            add_plain_panel(row, dom, order, a, right[i], right[i + 1], rel_tol);
    } else {
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
            add_plain_panel(row, dom, order, a, breaks[i], breaks[i + 1], rel_tol);
    }

    row.k_deep = angular_kernel_avg(dom, order, a, r_end, rel_tol) * r_end *
                 std::pow(kRhoDeep, -order.alpha);
    return row;
}

using GridKey = std::tuple<double, double, int, double, double, double, int>;

GridKey grid_key(const GradedGrid& g, double alpha, int dim) {
    return {g.rho_min, g.q, g.n_theta, g.cluster_theta ? *g.cluster_theta : -999.0,
            g.cluster_min_dtheta, alpha, dim};
}

std::shared_ptr<const RadialOperator> radial_operator(const BallDomain& dom,
                                                      const FracOrder& order,
                                                      const std::shared_ptr<const GradedGrid>& grid,
                                                      double rel_tol) {
    static std::mutex mu;
    static std::map<GridKey, std::shared_ptr<const RadialOperator>> cache;
    const auto key = grid_key(*grid, order.alpha, dom.dim);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto op = std::make_shared<RadialOperator>();
    op->levels = grid->levels;
    op->rows.resize(grid->n_levels());
    parallel_for(grid->n_levels(), [&](std::size_t j) {
        op->rows[j] = build_row(dom, order, grid->levels, grid->radius(j), rel_tol);
    });
    {
        std::lock_guard<std::mutex> lock(mu);
        cache[key] = op;
    }
    return op;
}

// ---- radial solve -----------------------------------------------------------

struct GFun {
    std::function<double(double)> g;
    bool is_power = false;
    double p = 0.0;
    bool bounded = false;
    double g0 = 0.0;
};

GFun make_gfun(const Nonlinearity& g) {
    GFun f;
    f.g = [g](double s) { return g(s); };
    f.is_power = g.kind == Nonlinearity::Kind::Power;
    f.p = g.p;
    f.bounded = g.kind == Nonlinearity::Kind::Zero;
    f.g0 = g(0.0);
    return f;
}

GFun make_gfun(const TruncatedNonlinearity& g) {
    GFun f;
    f.g = [g](double s) { return g(s); };
    f.is_power = false;
    f.p = g.base.p;
    f.bounded = true;
    f.g0 = g(0.0);
    return f;
}

// radial solution profile with the sub-grid closure:
//   rho >= rho_min : log-log interpolation of the level values
//   rho <  rho_min : min( u_min (rho/rho_min)^beta , k P_model(rho) )
// where beta is the strong-singularity exponent -2a/(p-1) for supercritical
// powers and alpha-1 otherwise, and P_model extends the computed potential by
// its exact disk shape (rho(2-rho))^(alpha-1).
struct RadialProfile {
    const std::vector<double>* levels;
    std::vector<double> log_rho, log_u, u;
    double alpha, beta_model, cap_coef, rho_min;
    bool have_cap = false;

    double cap(double rho) const {
        return cap_coef * std::pow(rho * (2.0 - rho), alpha - 1.0);
    }

    double at_rho(double rho) const {
        if (rho <= 0.0) return 0.0;
        const auto& lv = *levels;
        if (rho >= lv.back()) return u.back();
        if (rho < rho_min) {
            double ext = u.front() * std::pow(rho / rho_min, beta_model);
            if (have_cap) ext = std::min(ext, cap(rho));
            return ext;
        }
        const double lr = std::log(rho);
        auto it = std::upper_bound(log_rho.begin(), log_rho.end(), lr);
        std::size_t hi = static_cast<std::size_t>(it - log_rho.begin());
        hi = std::min(std::max<std::size_t>(hi, 1), log_rho.size() - 1);
        const std::size_t lo = hi - 1;
        const double t = (lr - log_rho[lo]) / (log_rho[hi] - log_rho[lo]);
        if (u[lo] > 0.0 && u[hi] > 0.0)
            return std::exp((1.0 - t) * log_u[lo] + t * log_u[hi]);
        return (1.0 - t) * u[lo] + t * u[hi];
    }

    double at_r(double r) const { return at_rho(1.0 - r); }
};

RadialProfile make_profile(const std::vector<double>& levels, const std::vector<double>& u_lv,
                           double alpha, double beta_model, double cap_coef, bool have_cap) {
    RadialProfile pr;
    pr.levels = &levels;
    pr.alpha = alpha;
    pr.beta_model = beta_model;
    pr.cap_coef = cap_coef;
    pr.have_cap = have_cap;
    pr.rho_min = levels.front();
    pr.u = u_lv;
    pr.log_rho.reserve(levels.size());
    pr.log_u.reserve(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        pr.log_rho.push_back(std::log(levels[j]));
        pr.log_u.push_back(u_lv[j] > 0.0 ? std::log(u_lv[j]) : -690.0);
    }
    return pr;
}

// shared deep-tail integral: int_0^kRhoDeep g(u_model(rho)) rho^alpha drho
double deep_tail(const RadialProfile& pr, const GFun& gf, double alpha) {
    // crossover of the extension branch with the cap
    double lo = 1e-30;
    if (pr.have_cap && pr.beta_model < alpha - 1.0 - 1e-12) {
        const double A = pr.u.front() * std::pow(pr.rho_min, -pr.beta_model);
        const double B = pr.cap_coef * std::pow(2.0, alpha - 1.0);
        if (A < B * std::pow(pr.rho_min, alpha - 1.0 - pr.beta_model) * 1e30) {
            const double rs = std::pow(A / B, 1.0 / (alpha - 1.0 - pr.beta_model));
            lo = std::clamp(rs / 100.0, 1e-30, kRhoDeep);
        }
    }
    double T = 0.0;
    if (lo < kRhoDeep) {
        // fixed-shape log grid keeps T smooth in the profile for Newton
        const int n = 240;
        const double llo = std::log(lo), lhi = std::log(kRhoDeep);
        double prev_rho = 0.0, prev_v = 0.0;
        for (int i = 0; i < n; ++i) {
            const double rho = std::exp(llo + (lhi - llo) * i / (n - 1.0));
            const double v = gf.g(pr.at_rho(rho)) * std::pow(rho, alpha) * rho;
            if (i > 0) T += 0.5 * (v + prev_v) * std::log(rho / prev_rho);
            prev_rho = rho;
            prev_v = v;
        }
    }
    // below lo the cap branch dominates; closed form for powers, a bounded
    // estimate otherwise (negligible at these depths)
    if (gf.is_power && pr.have_cap) {
        const double B = pr.cap_coef * std::pow(2.0, alpha - 1.0);
        const double e2 = (alpha - 1.0) * gf.p + alpha;
        T += std::pow(B, gf.p) * std::pow(lo, e2 + 1.0) / (e2 + 1.0);
    } else {
        T += gf.g(pr.at_rho(0.5 * lo)) * std::pow(lo, 1.0 + alpha) / (1.0 + alpha);
    }
    return T;
}

struct RadialSystem {
    const RadialOperator* op;
    const GFun* gf;
    double alpha;
    double k;
    std::vector<double> kP;
    double beta_model;
    double cap_coef; // P-model coefficient times k

    std::vector<double> apply_G(const std::vector<double>& u) const {
        RadialProfile pr =
            make_profile(op->levels, u, alpha, beta_model, cap_coef, true);
        const double T = deep_tail(pr, *gf, alpha);
        const std::size_t L = u.size();
        std::vector<double> out(L);
        for (std::size_t i = 0; i < L; ++i) {
            const auto& row = op->rows[i];
            double acc = 0.0;
            for (std::size_t q = 0; q < row.nodes.size(); ++q)
                acc += row.weights[q] * gf->g(pr.at_r(row.nodes[q]));
            out[i] = acc + row.k_deep * T;
        }
        return out;
    }

    std::vector<double> residual(const std::vector<double>& u) const {
        std::vector<double> F = apply_G(u);
        for (std::size_t i = 0; i < u.size(); ++i) F[i] += u[i] - kP[i];
        return F;
    }

    double res_norm(const std::vector<double>& F) const {
        double m = 0.0;
        for (std::size_t i = 0; i < F.size(); ++i) m = std::max(m, std::abs(F[i]) / kP[i]);
        return m;
    }
};

bool newton_polish(const RadialSystem& sys, std::vector<double>& u, double target, int budget,
                   int& used) {
    const std::size_t L = u.size();
    std::vector<double> F = sys.residual(u);
    double rn = sys.res_norm(F);
    for (int it = 0; it < budget; ++it) {
        if (rn < target) return true;
        ++used;
        // finite-difference Jacobian (captures the interpolation and the
        // closure coupling exactly enough for quadratic-ish convergence)
        std::vector<double> J(L * L, 0.0);
        std::vector<double> base = sys.apply_G(u);
        for (std::size_t j = 0; j < L; ++j) {
            std::vector<double> up = u;
            const double h = std::max(1e-6 * std::abs(u[j]), 1e-12);
            up[j] += h;
            std::vector<double> Gp = sys.apply_G(up);
            for (std::size_t i = 0; i < L; ++i) J[i * L + j] = (Gp[i] - base[i]) / h;
            J[j * L + j] += 1.0;
        }
        std::vector<double> rhs(L);
        for (std::size_t i = 0; i < L; ++i) rhs[i] = -F[i];
        if (!lu_solve(std::move(J), rhs, L)) return false;
        double t = 1.0;
        bool stepped = false;
        for (int ls = 0; ls < 50; ++ls) {
            std::vector<double> un(L);
            bool pos = true;
            for (std::size_t i = 0; i < L; ++i) {
                un[i] = u[i] + t * rhs[i];
                if (!(un[i] > 0.0)) pos = false;
            }
            if (pos) {
                std::vector<double> Fn = sys.residual(un);
                const double rnn = sys.res_norm(Fn);
                if (rnn < rn * (1.0 - 1e-4 * t)) {
                    u = std::move(un);
                    F = std::move(Fn);
                    rn = rnn;
                    stepped = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!stepped) return rn < target;
    }
    return rn < target;
}

SolveResult solve_radial(const BallDomain& dom, const FracOrder& order, const GFun& gf,
                         const BoundaryMeasure& mu, double k,
                         std::shared_ptr<const GradedGrid> grid, const SolverOptions& opts,
                         const std::vector<double>* warm) {
    auto op = radial_operator(dom, order, grid, opts.op_rel_tol);
    const std::size_t L = grid->n_levels();
    const double alpha = order.alpha;

    // unit Hausdorff potential on the levels, cached per grid/alpha; weighted
    // Hausdorff sums only rescale it
    static std::mutex pmu;
    static std::map<GridKey, std::vector<double>> pcache;
    std::vector<double> P;
    {
        const auto key = grid_key(*grid, order.alpha, dom.dim);
        std::lock_guard<std::mutex> lock(pmu);
        auto it = pcache.find(key);
        if (it != pcache.end()) P = it->second;
    }
    if (P.empty()) {
        PotentialField pf = potential_field(dom, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
        P.resize(L);
        for (std::size_t j = 0; j < L; ++j) P[j] = pf.samples.value(j, 0);
        const auto key = grid_key(*grid, order.alpha, dom.dim);
        std::lock_guard<std::mutex> lock(pmu);
        pcache[key] = P;
    }
    double mu_weight = 1.0;
    if (mu.kind == BoundaryMeasure::Kind::Sum) {
        mu_weight = 0.0;
        for (const auto& [w, part] : mu.parts)
            mu_weight += w * (part.kind == BoundaryMeasure::Kind::Hausdorff ? 1.0 : 0.0);
    }

    RadialSystem sys;
    sys.op = op.get();
    sys.gf = &gf;
    sys.alpha = alpha;
    sys.k = k;
    sys.kP.resize(L);
    for (std::size_t j = 0; j < L; ++j) sys.kP[j] = k * mu_weight * P[j];
    const double rho_m = grid->levels.front();
    sys.cap_coef = sys.kP[0] * std::pow(rho_m * (2.0 - rho_m), 1.0 - alpha);
    const bool strong_power =
        gf.is_power && gf.p > 1.0 + 2.0 * alpha && gf.p < order.p_star();
    sys.beta_model = strong_power ? -2.0 * alpha / (gf.p - 1.0) : alpha - 1.0;

    SolveResult res{FieldOnGrid(grid, order, alpha - 1.0), 0, 0.0, false, k, false, "picard", {}};
    res.solution.radial = true;

    std::vector<double> u = warm ? *warm : sys.kP;
    if (warm)
        for (std::size_t j = 0; j < L; ++j) u[j] = std::min(u[j], sys.kP[j]);

    auto record = [&](const std::vector<double>& v) {
        if (!opts.track_iterates) return;
        std::vector<double> prof(L);
        for (std::size_t j = 0; j < L; ++j)
            prof[j] = v[j] * std::pow(grid->levels[j], 1.0 - alpha);
        res.iterate_profiles.push_back(std::move(prof));
    };
    record(u);

    // plain Picard sweeps while they contract; normalized sup-differences
    // measured against the data scale in storage units
    double norm_scale = 0.0;
    for (std::size_t j = 0; j < L; ++j)
        norm_scale = std::max(norm_scale,
                              sys.kP[j] * std::pow(grid->levels[j], 1.0 - alpha));
    double prev_diff = -1.0;
    bool picard_done = false;
    for (int sweeps = 0; sweeps < opts.max_iterations; ++sweeps) {
        std::vector<double> G = sys.apply_G(u);
        std::vector<double> un(L);
        double diff = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
            un[j] = sys.kP[j] - G[j];
            diff = std::max(diff, std::abs(un[j] - u[j]) *
                                      std::pow(grid->levels[j], 1.0 - alpha));
        }
        diff /= norm_scale;
        u = std::move(un);
        record(u);
        ++res.iterations;
        if (diff < opts.tol * 0.1) {
            picard_done = true;
            break;
        }
        if (prev_diff >= 0.0 && diff > 0.9 * prev_diff) break; // stalled or oscillating
        prev_diff = diff;
    }

    if (!picard_done) {
        // Newton on the same discrete system; start from a positive iterate
        for (std::size_t j = 0; j < L; ++j)
            u[j] = std::clamp(u[j], 1e-8 * sys.kP[j], sys.kP[j]);
        int used = 0;
        const double target = std::min(opts.tol * 1e-3, 1e-9);
        bool ok = newton_polish(sys, u, target, opts.max_iterations - res.iterations, used);
        res.iterations += used;
        res.method = "picard+newton";
        if (!ok) {
            // continuation from half the load
            if (k > 1e-6) {
                SolverOptions sub = opts;
                sub.track_iterates = false;
                SolveResult half =
                    solve_radial(dom, order, gf, mu, 0.5 * k, grid, sub, nullptr);
                std::vector<double> w0(L);
                for (std::size_t j = 0; j < L; ++j)
                    w0[j] = std::min(2.0 * half.solution.value(j, 0), sys.kP[j]);
                u = w0;
                used = 0;
                ok = newton_polish(sys, u, target, opts.max_iterations, used);
                res.iterations += used;
            }
            if (!ok)
                throw Error(ErrorCode::NonConvergence,
                            "fixed-point iteration did not converge within the budget");
        }
        record(u);
    }

    std::vector<double> F = sys.residual(u);
    res.residual = sys.res_norm(F);
    res.converged = true;

    // sandwich kP - G[g(kP)] <= u <= kP against the same discrete operator
    std::vector<double> GkP = sys.apply_G(sys.kP);
    res.sandwich_ok = true;
    for (std::size_t j = 0; j < L; ++j) {
        const double slack = 1e-9 * sys.kP[j] + 1e-14;
        if (u[j] > sys.kP[j] + slack || u[j] < sys.kP[j] - GkP[j] - slack) {
            res.sandwich_ok = false;
            break;
        }
    }

    for (std::size_t j = 0; j < L; ++j) {
        const double nv = u[j] * std::pow(grid->levels[j], 1.0 - alpha);
        for (std::size_t i = 0; i < grid->thetas[j].size(); ++i)
            res.solution.normalized[j][i] = nv;
    }
    return res;
}

// ---- general (non-radial) solve: collocation-cell operator ------------------

struct Cell {
    std::size_t level, angle;
    double rho_lo, rho_hi, th_lo, th_hi;
};

struct DiskOperator {
    std::vector<Cell> cells;
    std::vector<double> W; // dense [target][cell]
    std::vector<double> tail_coef; // per target, per boundary column packed after W
    std::size_t n = 0;
};

std::shared_ptr<const DiskOperator> disk_operator(const BallDomain& dom, const FracOrder& order,
                                                  const std::shared_ptr<const GradedGrid>& grid) {
    static std::mutex mu;
    static std::map<GridKey, std::shared_ptr<const DiskOperator>> cache;
    const auto key = grid_key(*grid, order.alpha, 2);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    auto op = std::make_shared<DiskOperator>();
    const auto& lv = grid->levels;
    const std::size_t L = lv.size();
    for (std::size_t j = 0; j < L; ++j) {
        const double lo = j == 0 ? lv[0] * std::sqrt(lv[0] / lv[1])
                                 : std::sqrt(lv[j - 1] * lv[j]);
        const double hi = j + 1 == L ? 1.0 : std::sqrt(lv[j] * lv[j + 1]);
        const auto& th = grid->thetas[j];
        const std::size_t nt = th.size();
        for (std::size_t i = 0; i < nt; ++i) {
            const double tp = th[(i + 1) % nt] + (i + 1 == nt ? 2.0 * M_PI : 0.0);
            const double tm = i == 0 ? th[nt - 1] - 2.0 * M_PI : th[i - 1];
            Cell c;
            c.level = j;
            c.angle = i;
            c.rho_lo = lo;
            c.rho_hi = std::min(hi, 1.0)
                ;
            c.th_lo = 0.5 * (tm + th[i]);
            c.th_hi = 0.5 * (th[i] + tp);
            op->cells.push_back(c);
        }
    }
    const std::size_t n = op->cells.size();
    op->n = n;
    op->W.assign(n * n, 0.0);
    const double kappa = kernel_prefactor(2, order);
    const double Flim = kernel_profile_limit(2, order);

    auto kernel_at = [&](const Point& x, double rho, double th) {
        const double r = 1.0 - rho;
        const Point y = make_point(r * std::cos(th), r * std::sin(th));
        const double d = dist(x, y);
        if (d < 1e-14) return 0.0;
        const double nx = norm(x);
        const double r0 = (1.0 - nx * nx) * (1.0 - r * r) / (d * d);
        return kappa * std::pow(d, 2.0 * order.alpha - 2.0) * kernel_profile(r0, 2, order);
    };

    parallel_for(n, [&](std::size_t t) {
        const Cell& tc = op->cells[t];
        const Point x = grid->node(tc.level, tc.angle);
        for (std::size_t c = 0; c < n; ++c) {
            const Cell& sc = op->cells[c];
            const double r_hi = 1.0 - sc.rho_lo, r_lo = 1.0 - sc.rho_hi;
            const double area =
                (sc.th_hi - sc.th_lo) * 0.5 * (r_hi * r_hi - r_lo * r_lo);
            const double rc = 0.5 * (r_lo + r_hi);
            const double thc = 0.5 * (sc.th_lo + sc.th_hi);
            const Point yc = make_point(rc * std::cos(thc), rc * std::sin(thc));
            const double dd = dist(x, yc);
            const double diam = std::max(r_hi - r_lo, rc * (sc.th_hi - sc.th_lo));
            int sub = 1;
            if (t == c || dd < 1.5 * diam) sub = 6;
            else if (dd < 4.0 * diam) sub = 3;
            double acc = 0.0;
            const double h_core = 0.25 * diam / sub;
            for (int si = 0; si < sub; ++si)
                for (int sj = 0; sj < sub; ++sj) {
                    const double rho =
                        sc.rho_lo + (sc.rho_hi - sc.rho_lo) * (si + 0.5) / sub;
                    const double th = sc.th_lo + (sc.th_hi - sc.th_lo) * (sj + 0.5) / sub;
                    const double r = 1.0 - rho;
                    const Point y = make_point(r * std::cos(th), r * std::sin(th));
                    const double d = dist(x, y);
                    if (t == c && d < h_core) continue; // singular core added below
                    acc += kernel_at(x, rho, th);
                }
            acc *= area / (sub * sub);
            if (t == c) // analytic core: int_{|y-x|<h} kappa |y-x|^(2a-2) F dy
                acc += kappa * Flim * 2.0 * M_PI * std::pow(h_core, 2.0 * order.alpha) /
                       (2.0 * order.alpha);
            op->W[t * n + c] = acc;
        }
    });

    // boundary-column tail coefficients (below the deepest cells)
    const std::size_t nt0 = grid->thetas[0].size();
    op->tail_coef.assign(n * nt0, 0.0);
    const double rho_b = op->cells[0].rho_lo;
    parallel_for(n, [&](std::size_t t) {
        const Cell& tc = op->cells[t];
        const Point x = grid->node(tc.level, tc.angle);
        for (std::size_t i = 0; i < nt0; ++i) {
            const auto& th = grid->thetas[0];
            const double tp = th[(i + 1) % nt0] + (i + 1 == nt0 ? 2.0 * M_PI : 0.0);
            const double tm = i == 0 ? th[nt0 - 1] - 2.0 * M_PI : th[i - 1];
            const double dth = 0.5 * (tp - tm);
            const double probe = 0.5 * rho_b;
            op->tail_coef[t * nt0 + i] =
                kernel_at(x, probe, th[i]) * std::pow(probe, -order.alpha) * dth;
        }
    });

    {
        std::lock_guard<std::mutex> lock(mu);
        cache[key] = op;
    }
    return op;
}

bool measure_has_dirac(const BoundaryMeasure& mu) {
    switch (mu.kind) {
        case BoundaryMeasure::Kind::Dirac: return true;
        case BoundaryMeasure::Kind::Hausdorff: return false;
        case BoundaryMeasure::Kind::Sum:
            for (const auto& [w, p] : mu.parts) {
                (void)w;
                if (measure_has_dirac(p)) return true;
            }
            return false;
    }
    return false;
}

SolveResult solve_disk(const BallDomain& dom, const FracOrder& order, const GFun& gf,
                       const BoundaryMeasure& mu, double k,
                       std::shared_ptr<const GradedGrid> grid, const SolverOptions& opts) {
    // a point mass concentrates the absorption below any uniform angular
    // resolution; demand a grid clustered at the anchor
    if (measure_has_dirac(mu) && !grid->cluster_theta)
        throw Error(ErrorCode::DomainError,
                    "solves with a boundary Dirac mass need a grid with angular clustering "
                    "at the anchor");
    auto op = disk_operator(dom, order, grid);
    const std::size_t n = op->n;

    PotentialField pf = potential_field(dom, order, mu, grid, 1e-8);
    std::vector<double> kP(n);
    for (std::size_t c = 0; c < n; ++c)
        kP[c] = k * pf.samples.value(op->cells[c].level, op->cells[c].angle);

    const double alpha = order.alpha;
    const std::size_t nt0 = grid->thetas[0].size();
    const double rho_b = op->cells[0].rho_lo;
    const double rho0 = grid->levels[0];

    auto apply_G = [&](const std::vector<double>& u) {
        std::vector<double> gv(n);
        for (std::size_t c = 0; c < n; ++c) gv[c] = gf.g(std::max(u[c], 0.0));
        // per-column boundary tails: extension of g(u) by the potential slope
        std::vector<double> T(nt0, 0.0);
        for (std::size_t i = 0; i < nt0; ++i) {
            const double gval = gv[i]; // level 0 cells come first in order
            const double e = gf.is_power ? (alpha - 1.0) * gf.p : 0.0;
            const double ee = e + alpha;
            if (ee <= -1.0)
                throw Error(ErrorCode::DivergentIntegrand, "boundary tail diverges");
            T[i] = gval * std::pow(rho0, -e) * std::pow(rho_b, ee + 1.0) / (ee + 1.0);
        }
        std::vector<double> out(n, 0.0);
        parallel_for(n, [&](std::size_t t) {
            double acc = 0.0;
            const double* row = &op->W[t * n];
            for (std::size_t c = 0; c < n; ++c) acc += row[c] * gv[c];
            for (std::size_t i = 0; i < nt0; ++i) acc += op->tail_coef[t * nt0 + i] * T[i];
            out[t] = acc;
        });
        return out;
    };

    auto res_norm = [&](const std::vector<double>& F) {
        double rn = 0.0;
        for (std::size_t c = 0; c < n; ++c)
            rn = std::max(rn, std::abs(F[c]) / std::max(kP[c], 1e-300));
        return rn;
    };
    auto residual_of = [&](const std::vector<double>& u) {
        std::vector<double> F = apply_G(u);
        for (std::size_t c = 0; c < n; ++c) F[c] += u[c] - kP[c];
        return F;
    };

    std::vector<double> u = kP;
    int it = 0;
    // a couple of plain sweeps (u <- kP - G[g(u)]), kept only while they help
    double sweep_rn = std::numeric_limits<double>::infinity();
    for (; it < 3; ++it) {
        std::vector<double> F = residual_of(u);
        const double rn_now = res_norm(F);
        if (rn_now < opts.tol) break;
        if (rn_now > sweep_rn) break;
        sweep_rn = rn_now;
        std::vector<double> un(n);
        bool usable = true;
        for (std::size_t c = 0; c < n; ++c) {
            un[c] = u[c] - F[c];
            if (!(un[c] > 0.0)) usable = false;
        }
        if (!usable) break;
        u = std::move(un);
    }
    // Newton needs a strictly positive start under the cap
    for (std::size_t c = 0; c < n; ++c) u[c] = std::clamp(u[c], 1e-8 * kP[c], kP[c]);
    {
        std::vector<double> F = residual_of(u);
        double rn = res_norm(F);
        const double gh = 1e-6;
        const bool dbg = std::getenv("FRACBLOW_DEBUG_2D") != nullptr;
        int newton = 0;
        while (rn >= opts.tol && it + newton < opts.max_iterations) {
            if (dbg) std::fprintf(stderr, "newton %d rn=%.4g\n", newton, rn);
            ++newton;
            // finite-difference Jacobian of u + G[g(u)] - kP
            std::vector<double> base = apply_G(u);
            std::vector<double> J(n * n, 0.0);
            for (std::size_t c = 0; c < n; ++c) {
                std::vector<double> up = u;
                const double h = std::max(gh * std::abs(u[c]), 1e-10);
                up[c] += h;
                std::vector<double> Gp = apply_G(up);
                for (std::size_t t = 0; t < n; ++t) J[t * n + c] = (Gp[t] - base[t]) / h;
                J[c * n + c] += 1.0;
            }
            std::vector<double> rhs(n);
            for (std::size_t c = 0; c < n; ++c) rhs[c] = -F[c];
            if (!lu_solve(std::move(J), rhs, n))
                throw Error(ErrorCode::NonConvergence, "singular Jacobian on the 2D grid");
            double tstep = 1.0;
            bool stepped = false;
            for (int ls = 0; ls < 45; ++ls) {
                std::vector<double> un(n);
                bool pos = true;
                for (std::size_t c = 0; c < n; ++c) {
                    un[c] = u[c] + tstep * rhs[c];
                    if (!(un[c] > 0.0)) pos = false;
                }
                if (pos) {
                    std::vector<double> Fn = residual_of(un);
                    const double rnn = res_norm(Fn);
                    if (rnn < rn * (1.0 - 1e-4 * tstep)) {
                        u = std::move(un);
                        F = std::move(Fn);
                        rn = rnn;
                        stepped = true;
                        break;
                    }
                }
                tstep *= 0.5;
            }
            if (!stepped) {
                if (dbg) std::fprintf(stderr, "line search failed at rn=%.4g\n", rn);
                break;
            }
        }
        it += newton;
        if (rn >= opts.tol)
            throw Error(ErrorCode::NonConvergence, "2D solve did not reach the tolerance");
    }

    SolveResult res{FieldOnGrid(grid, order, mu.potential_boundary_exponent(order)),
                    it + 1,
                    0.0,
                    false,
                    k,
                    true,
                    "picard+newton",
                    {}};
    std::vector<double> G = apply_G(u);
    double rn = 0.0;
    for (std::size_t c = 0; c < n; ++c)
        rn = std::max(rn, std::abs(u[c] + G[c] - kP[c]) / std::max(kP[c], 1e-300));
    res.residual = rn;
    std::vector<double> GkP = apply_G(kP);
    res.sandwich_ok = true;
    for (std::size_t c = 0; c < n; ++c) {
        const double slack = 1e-6 * kP[c] + 1e-12;
        if (u[c] > kP[c] + slack || u[c] < kP[c] - GkP[c] - slack) {
            res.sandwich_ok = false;
            break;
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        const Cell& cc = op->cells[c];
        res.solution.normalized[cc.level][cc.angle] =
            u[c] * std::pow(grid->levels[cc.level], 1.0 - alpha);
    }
    return res;
}

SolveResult solve_impl(const BallDomain& dom, const FracOrder& order, const GFun& gf,
                       bool g1_ok, const BoundaryMeasure& mu, double k,
                       std::shared_ptr<const GradedGrid> grid, const SolverOptions& opts,
                       const std::vector<double>* warm) {
    if (!(k > 0.0)) throw Error(ErrorCode::DomainError, "k must be positive");
    if (!g1_ok)
        throw Error(ErrorCode::SubcriticalityViolated,
                    "power nonlinearity at or beyond the critical exponent");
    if (dom.dim != 2)
        throw Error(ErrorCode::DomainError, "the solver is implemented on the disk");

    if (mu.rotation_invariant()) return solve_radial(dom, order, gf, mu, k, grid, opts, warm);
    return solve_disk(dom, order, gf, mu, k, grid, opts);
}

bool contains_dirac(const BoundaryMeasure& mu) {
    switch (mu.kind) {
        case BoundaryMeasure::Kind::Dirac: return true;
        case BoundaryMeasure::Kind::Hausdorff: return false;
        case BoundaryMeasure::Kind::Sum:
            for (const auto& [w, p] : mu.parts) {
                (void)w;
                if (contains_dirac(p)) return true;
            }
            return false;
    }
    return false;
}

} // namespace

SolveResult solve(const BallDomain& dom, const FracOrder& order, const Nonlinearity& g,
                  const BoundaryMeasure& mu, double k, std::shared_ptr<const GradedGrid> grid,
                  const SolverOptions& opts) {
    if (contains_dirac(mu)) (void)g.lambda_subadditive(); // must be declared
    return solve_impl(dom, order, make_gfun(g), g.satisfies_g1(order), mu, k, grid, opts,
                      nullptr);
}

SolveResult solve(const BallDomain& dom, const FracOrder& order, const TruncatedNonlinearity& g,
                  const BoundaryMeasure& mu, double k, std::shared_ptr<const GradedGrid> grid,
                  const SolverOptions& opts) {
    // truncations are bounded, hence always integral-subcritical
    if (contains_dirac(mu)) (void)g.base.lambda_subadditive();
    return solve_impl(dom, order, make_gfun(g), true, mu, k, grid, opts, nullptr);
}

std::vector<SolveResult> solve_family(const BallDomain& dom, const FracOrder& order,
                                      const Nonlinearity& g, const BoundaryMeasure& mu,
                                      const std::vector<double>& ks,
                                      std::shared_ptr<const GradedGrid> grid,
                                      const SolverOptions& opts) {
    if (ks.size() < 2) throw Error(ErrorCode::DomainError, "family needs at least two k values");
    for (std::size_t i = 1; i < ks.size(); ++i)
        if (!(ks[i] > ks[i - 1]))
            throw Error(ErrorCode::DomainError, "k schedule must be strictly increasing");

    std::vector<SolveResult> out;
    const GFun gf = make_gfun(g);
    std::vector<double> warm;
    for (double k : ks) {
        SolveResult r = solve_impl(dom, order, gf, g.satisfies_g1(order), mu, k, grid,
                                   opts, warm.empty() ? nullptr : &warm);
        if (!out.empty()) {
            // monotone in k, within the closure-model allowance at large k
            for (std::size_t j = 0; j < grid->n_levels(); ++j) {
                const double prev = out.back().solution.value(j, 0);
                const double cur = r.solution.value(j, 0);
                if (cur < prev * (1.0 - 0.025))
                    throw Error(ErrorCode::NonConvergence,
                                "family lost monotonicity in k beyond the model allowance");
            }
        }
        warm.resize(grid->n_levels());
        for (std::size_t j = 0; j < grid->n_levels(); ++j) warm[j] = r.solution.value(j, 0);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<double> radial_green_apply_profile(const BallDomain& dom, const FracOrder& order,
                                               std::shared_ptr<const GradedGrid> grid,
                                               const std::function<double(double)>& profile_of_rho,
                                               double boundary_exponent, double op_rel_tol) {
    auto op = radial_operator(dom, order, grid, op_rel_tol);
    const double alpha = order.alpha;
    const std::size_t L = grid->n_levels();
    // wrap the profile with a power extension below the grid
    const double rho_m = grid->levels.front();
    const double base = profile_of_rho(rho_m);
    auto at_rho = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        if (rho < rho_m) return base * std::pow(rho / rho_m, boundary_exponent);
        return profile_of_rho(std::min(rho, 1.0));
    };
    // deep tail in rho^alpha units
    double T = 0.0;
    {
        const int nn = 200;
        const double llo = std::log(1e-30), lhi = std::log(kRhoDeep);
        double prev_rho = 0.0, prev_v = 0.0;
        for (int i = 0; i < nn; ++i) {
            const double rho = std::exp(llo + (lhi - llo) * i / (nn - 1.0));
            const double v = at_rho(rho) * std::pow(rho, alpha) * rho;
            if (i > 0) T += 0.5 * (v + prev_v) * std::log(rho / prev_rho);
            prev_rho = rho;
            prev_v = v;
        }
    }
    std::vector<double> out(L);
    for (std::size_t i = 0; i < L; ++i) {
        const auto& row = op->rows[i];
        double acc = 0.0;
        for (std::size_t q = 0; q < row.nodes.size(); ++q)
            acc += row.weights[q] * at_rho(1.0 - row.nodes[q]);
        out[i] = acc + row.k_deep * T;
    }
    return out;
}

} // namespace fracblow
