#include "fracblow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <sstream>

#include "fracblow/analysis.hpp"
#include "fracblow/ctau.hpp"
#include "fracblow/fraclap.hpp"
#include "fracblow/rng.hpp"
#include "fracblow/solver.hpp"

namespace fracblow {

namespace {

const BallDomain disk(2);

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.str().empty()) detail << "; ";
        detail << (ok ? "" : "FAILED: ") << what;
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// 1. root identity of the truncated-Laplacian constant
CriterionResult c1_root_identity() {
    Check c;
    double worst = 0.0;
    for (int i = 1; i <= 9; ++i) {
        const double alpha = 0.1 * i;
        const double root = tau0(FracOrder(alpha), 1e-8, 1e-10);
        worst = std::max(worst, std::abs(root - (alpha - 1.0)));
    }
    c.require(worst <= 1e-6, "max |tau0(alpha) - (alpha-1)| = " + fmt(worst) + " <= 1e-6");
    return {1, "root identity tau0(alpha) = alpha - 1", true, c.pass, c.detail.str(), 0.0};
}

// 2. boundary rate and normalized band of the surface potential
CriterionResult c2_surface_rate() {
    Check c;
    for (double alpha : {0.3, 0.5, 0.7}) {
        const FracOrder order(alpha);
        auto grid = GradedGrid::make(1e-5, 1.3, 16);
        PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
        RateFit fit = fit_boundary_rate(pf.samples, {1e-4, 1e-2});
        c.require(std::abs(fit.exponent - (alpha - 1.0)) <= 0.02,
                  "alpha=" + fmt(alpha) + " rate " + fmt(fit.exponent) + " within 0.02 of " +
                      fmt(alpha - 1.0));
        double lo = 1e300, hi = 0.0;
        for (std::size_t j = 0; j < grid->n_levels(); ++j) {
            const double rho = grid->levels[j];
            if (rho < 1e-4 || rho > 0.5) continue;
            const double band = pf.samples.value(j, 0) * std::pow(rho, 1.0 - alpha);
            lo = std::min(lo, band);
            hi = std::max(hi, band);
        }
        c.require(hi / lo <= 3.0,
                  "alpha=" + fmt(alpha) + " normalized band factor " + fmt(hi / lo) + " <= 3");
    }
    return {2, "surface-potential rate alpha-1 and band", true, c.pass, c.detail.str(), 0.0};
}

// 3. Dirac-potential profile band over random interior points
CriterionResult c3_dirac_band(std::uint64_t seed) {
    Check c;
    const FracOrder order(0.5);
    const Point z0 = make_point(1.0, 0.0);
    const auto mu = BoundaryMeasure::dirac(z0);
    Rng rng(seed);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Point x = rng.disk_point(1e-3);
        const double v = potential(disk, order, mu, x);
        const double band = v * std::pow(dist(x, z0), 2.0) * std::pow(disk.rho(x), -order.alpha);
        lo = std::min(lo, band);
        hi = std::max(hi, band);
    }
    c.require(hi / lo <= 5.0, "band factor " + fmt(hi / lo) + " <= 5 over 200 points");
    return {3, "Dirac-potential profile band", true, c.pass, c.detail.str(), 0.0};
}

// 4. weak-norm decay of the surface and mixed potentials
CriterionResult c4_weak_norm() {
    Check c;
    const FracOrder order(0.5);
    {
        auto grid = GradedGrid::make(1e-5, 1.25, 16);
        PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
        WeakNormEstimate est = weak_norm_decay(pf.samples, order, order.p_star());
        c.require(std::abs(est.fitted_decay + order.p_star()) <= 0.15,
                  "surface decay " + fmt(est.fitted_decay) + " within 0.15 of " +
                      fmt(-order.p_star()));
        c.require(std::isfinite(est.band_constant) && est.band_constant > 0.0,
                  "surface band constant " + fmt(est.band_constant) + " finite");
    }
    {
        const Point z0 = make_point(1.0, 0.0);
        auto grid = GradedGrid::make(1e-4, 1.3, 64, 0.0, 1e-4);
        const auto nu = BoundaryMeasure::sum(
            {{1.0, BoundaryMeasure::hausdorff()}, {1.0, BoundaryMeasure::dirac(z0)}});
        PotentialField pf = potential_field(disk, order, nu, grid, 1e-8);
        const double kappa = order.p_star_N(2);
        WeakNormEstimate est = weak_norm_decay(pf.samples, order, kappa);
        c.require(std::isfinite(est.band_constant) && est.band_constant > 0.0,
                  "mixed band constant " + fmt(est.band_constant) + " finite");
        c.require(est.fitted_decay <= -kappa + 0.12,
                  "mixed decay " + fmt(est.fitted_decay) + " at least as fast as " + fmt(-kappa));
    }
    return {4, "weak-norm decay at the critical exponents", true, c.pass, c.detail.str(), 0.0};
}

// 5. solver sandwich, residual, monotonicity in k, boundary rate
CriterionResult c5_solver() {
    Check c;
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-5, 1.3, 8);
    auto g = Nonlinearity::power(2.5);
    SolveResult r1 = solve(disk, order, g, BoundaryMeasure::hausdorff(), 1.0, grid);
    SolveResult r4 = solve(disk, order, g, BoundaryMeasure::hausdorff(), 4.0, grid);
    for (const SolveResult* r : {&r1, &r4}) {
        c.require(r->converged && r->sandwich_ok,
                  "k=" + fmt(r->k) + " sandwich holds");
        c.require(r->residual <= 1e-5,
                  "k=" + fmt(r->k) + " residual " + fmt(r->residual) + " <= 1e-5");
    }
    bool mono = true;
    for (std::size_t j = 0; j < grid->n_levels(); ++j)
        if (r4.solution.value(j, 0) < r1.solution.value(j, 0) * (1.0 - 1e-9)) mono = false;
    c.require(mono, "pointwise monotonicity u_4 >= u_1");
    for (const SolveResult* r : {&r1, &r4}) {
        RateFit fit = fit_boundary_rate(r->solution, {1e-4, 1e-2});
        c.require(std::abs(fit.exponent + 0.5) <= 0.05,
                  "k=" + fmt(r->k) + " boundary rate " + fmt(fit.exponent) +
                      " within 0.05 of -0.5");
    }
    return {5, "solver sandwich, residual, and rate", true, c.pass, c.detail.str(), 0.0};
}

// 6. supersolution property of the scaled blow-up profile
CriterionResult c6_supersolution() {
    Check c;
    for (auto [alpha, p] : {std::pair{0.5, 2.5}, std::pair{0.3, 2.0}}) {
        try {
            auto rep = check_supersolution(disk, FracOrder(alpha), p, radial_probe_points(15),
                                           1e-3, 1e-5);
            double worst = 0.0;
            for (double r : rep.residual_rel) worst = std::min(worst, r);
            c.require(rep.ok, "(alpha=" + fmt(alpha) + ", p=" + fmt(p) + ") residuals >= -1e-3" +
                                  " (worst " + fmt(worst) + ", c_p " + fmt(rep.c_p) + ")");
        } catch (const Error& e) {
            c.require(false, "(alpha=" + fmt(alpha) + ", p=" + fmt(p) + ") " + e.what());
        }
    }
    return {6, "scaled profile is a supersolution", true, c.pass, c.detail.str(), 0.0};
}

// 7. regime dichotomy of the k-family
CriterionResult c7_regimes() {
    Check c;
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-5, 1.3, 8);
    std::vector<double> ks;
    for (int j = 0; j <= 10; ++j) ks.push_back(std::pow(2.0, j));

    {
        auto fam = solve_family(disk, order, Nonlinearity::power(2.5),
                                BoundaryMeasure::hausdorff(), ks, grid);
        RegimeVerdict v = classify_regime(fam, order, 2.5);
        c.require(v.kind == RegimeVerdict::Kind::StrongLimit,
                  "p=2.5 classified as a strong limit (max increment " + fmt(v.max_increment) +
                      ")");
        if (v.rate)
            c.require(std::abs(v.rate->exponent + 2.0 / 3.0) <= 0.05,
                      "p=2.5 limit rate " + fmt(v.rate->exponent) + " within 0.05 of -2/3");
        else
            c.require(false, "p=2.5 limit rate available");
    }
    for (double p : {1.5, 0.5}) {
        auto fam = solve_family(disk, order, Nonlinearity::power(p),
                                BoundaryMeasure::hausdorff(), ks, grid);
        RegimeVerdict v = classify_regime(fam, order, p);
        c.require(v.kind == RegimeVerdict::Kind::FamilyBlowUp,
                  "p=" + fmt(p) + " family blows up (growth " + fmt(v.last_decade_growth) + ")");
    }
    return {7, "regime dichotomy over k in [1, 2^10]", true, c.pass, c.detail.str(), 0.0};
}

// 8. the surface potential is annihilated by the operator
CriterionResult c8_harmonicity(std::uint64_t seed) {
    Check c;
    const FracOrder order(0.5);
    auto grid = GradedGrid::make(1e-4, 1.25, 16);
    PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
    ExplicitField u = radial_interpolant_field(disk, pf.samples);
    Rng rng(seed);
    double worst_ratio = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Point x = rng.disk_point(0.15);
        const double rho = disk.rho(x);
        const double pv = frac_lap_eval(disk, order, u, x, 1e-4);
        const double scale = std::pow(rho, order.alpha - 1.0 - 2.0 * order.alpha);
        worst_ratio = std::max(worst_ratio, std::abs(pv) / scale);
    }
    c.require(worst_ratio <= 5e-2,
              "max |PV| / rho^(alpha-1-2alpha) = " + fmt(worst_ratio) + " <= 5e-2 at 20 points");
    return {8, "surface potential lies in the operator kernel", true, c.pass, c.detail.str(), 0.0};
}

// 9. smallness of the nonlinear correction along a radial sweep
CriterionResult c9_correction_sweep() {
    Check c;
    const FracOrder order(0.5);
    const double p = 2.5, k = 1.0;
    // levels start exactly at 1e-4: the sweep endpoint the criterion names
    auto grid = GradedGrid::make(1e-4, 1.3, 8);
    PotentialField pf = potential_field(disk, order, BoundaryMeasure::hausdorff(), grid, 1e-9);
    auto kP = [&](double rho) { return k * pf.samples.interp(rho, 0.0); };
    auto profile = [&](double rho) { return std::pow(kP(rho), p); };
    std::vector<double> G =
        radial_green_apply_profile(disk, order, grid, profile, (order.alpha - 1.0) * p);

    // normalized correction h(rho) = G[(kP)^p] rho^(1-alpha) on the levels
    std::vector<double> rho_v, h_v;
    for (std::size_t j = 0; j < grid->n_levels(); ++j) {
        const double rho = grid->levels[j];
        if (rho > 0.1 * 1.0000001) continue;
        rho_v.push_back(rho);
        h_v.push_back(G[j] * std::pow(rho, 1.0 - order.alpha));
    }
    bool mono = true;
    for (std::size_t i = 1; i < rho_v.size(); ++i)
        if (h_v[i] < h_v[i - 1] * (1.0 - 1e-9)) mono = false; // levels ascend in rho
    c.require(mono, "normalized correction decreases monotonically into the boundary");
    const double ratio = h_v.front() / h_v.back();
    c.require(ratio <= 0.10,
              "h(1e-4) / h(0.1) = " + fmt(ratio) + " <= 0.10");
    return {9, "nonlinear correction vanishes on the boundary scale", true, c.pass,
            c.detail.str(), 0.0};
}

} // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& log) {
    using Runner = std::function<CriterionResult()>;
    struct Entry {
        Runner run;
        bool long_running;
        int id;
        const char* name;
    };
    const std::vector<Entry> entries{
        {[&] { return c1_root_identity(); }, false, 1, "root identity tau0(alpha) = alpha - 1"},
        {[&] { return c2_surface_rate(); }, false, 2, "surface-potential rate alpha-1 and band"},
        {[&] { return c3_dirac_band(opts.seed); }, false, 3, "Dirac-potential profile band"},
        {[&] { return c4_weak_norm(); }, false, 4, "weak-norm decay at the critical exponents"},
        {[&] { return c5_solver(); }, true, 5, "solver sandwich, residual, and rate"},
        {[&] { return c6_supersolution(); }, true, 6, "scaled profile is a supersolution"},
        {[&] { return c7_regimes(); }, true, 7, "regime dichotomy over k in [1, 2^10]"},
        {[&] { return c8_harmonicity(opts.seed); }, true, 8,
         "surface potential lies in the operator kernel"},
        {[&] { return c9_correction_sweep(); }, true, 9,
         "nonlinear correction vanishes on the boundary scale"},
    };

    std::vector<CriterionResult> out;
    for (const auto& e : entries) {
        if (opts.quick && e.long_running) {
            CriterionResult r{e.id, e.name, false, false, "skipped in quick mode", 0.0};
            log << "[SKIP] criterion " << r.id << ": " << r.name << "\n" << std::flush;
            out.push_back(std::move(r));
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = e.run();
        } catch (const std::exception& ex) {
            r = CriterionResult{e.id, e.name, true, false, std::string("exception: ") + ex.what(),
                                0.0};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.name << " ("
            << fmt(r.seconds) << " s)";
        if (!r.pass) log << " -- " << r.detail;
        log << "\n" << std::flush;
        out.push_back(std::move(r));
    }
    return out;
}

bool acceptance_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (r.ran && !r.pass) return false;
    return true;
}

} // namespace fracblow
