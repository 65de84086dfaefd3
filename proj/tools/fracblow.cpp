// Command-line front end: reproducible experiments over the kernel,
// potential, solver, and analysis modules. Outputs are CSV (fields, tables)
// and JSON (scalar reports); every artifact embeds the config hash.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracblow/acceptance.hpp"
#include "fracblow/analysis.hpp"
#include "fracblow/config.hpp"
#include "fracblow/ctau.hpp"
#include "fracblow/fraclap.hpp"
#include "fracblow/solver.hpp"

using json = nlohmann::json;
using namespace fracblow;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot open output file: " + path);
    return out;
}

void csv_header(std::ofstream& out, const ExperimentConfig& cfg, const std::string& columns) {
    out << "# config_hash: " << cfg.hash() << "\n";
    out << "# version: " << kVersion << "\n";
    out << columns << "\n";
}

json json_meta(const ExperimentConfig& cfg, const Timer& timer) {
    return json{{"config_hash", cfg.hash()},
                {"version", kVersion},
                {"wall_time_s", timer.seconds()}};
}

BoundaryMeasure measure_from(const ExperimentConfig& cfg) {
    const std::string& m = cfg.get("measure");
    const double th = cfg.get_num("dirac.theta");
    const Point z0 = make_point(std::cos(th), std::sin(th));
    if (m == "hausdorff") return BoundaryMeasure::hausdorff();
    if (m == "dirac") return BoundaryMeasure::dirac(z0);
    return BoundaryMeasure::sum({{cfg.get_num("sum.hausdorff_weight"), BoundaryMeasure::hausdorff()},
                                 {cfg.get_num("sum.dirac_weight"), BoundaryMeasure::dirac(z0)}});
}

std::shared_ptr<const GradedGrid> grid_from(const ExperimentConfig& cfg) {
    const std::string& m = cfg.get("measure");
    std::optional<double> cluster;
    if (m == "dirac" || m == "sum") cluster = cfg.get_num("dirac.theta");
    return GradedGrid::make(cfg.get_num("grid.rho_min"), cfg.get_num("grid.q"),
                            static_cast<int>(cfg.get_int("grid.n_theta")), cluster);
}

Nonlinearity nonlinearity_from(const ExperimentConfig& cfg) {
    if (cfg.get("nonlinearity") == "zero") return Nonlinearity::zero();
    return Nonlinearity::power(cfg.get_num("p"));
}

void write_field_csv(const std::string& path, const ExperimentConfig& cfg,
                     const FieldOnGrid& field) {
    auto out = open_out(path);
    csv_header(out, cfg, "rho,theta,value,normalized_value");
    for (std::size_t j = 0; j < field.grid->n_levels(); ++j)
        for (std::size_t i = 0; i < field.grid->thetas[j].size(); ++i)
            out << num(field.grid->levels[j]) << "," << num(field.grid->thetas[j][i]) << ","
                << num(field.value(j, i)) << "," << num(field.normalized[j][i]) << "\n";
}

std::vector<double> k_schedule(const ExperimentConfig& cfg) {
    std::vector<double> ks;
    const double kmax = cfg.get_num("k.max");
    const double factor = cfg.get_num("k.factor");
    if (!(factor > 1.0)) throw Error(ErrorCode::ConfigError, "k.factor must exceed 1");
    for (double k = cfg.get_num("k"); k <= kmax * 1.0000001; k *= factor) ks.push_back(k);
    if (ks.size() < 2) throw Error(ErrorCode::ConfigError, "k schedule needs at least 2 values");
    return ks;
}

json solve_report(const SolveResult& r) {
    return json{{"k", r.k},
                {"iterations", r.iterations},
                {"residual", r.residual},
                {"sandwich_ok", r.sandwich_ok},
                {"converged", r.converged},
                {"method", r.method}};
}

// ---- subcommand bodies ------------------------------------------------------

int run_ctau(const ExperimentConfig& cfg, const std::string& out_csv,
             const std::string& out_json) {
    Timer timer;
    const FracOrder order(cfg.get_num("alpha"));
    const int n = static_cast<int>(cfg.get_int("scan"));
    auto scan = c_tau_scan(order, n, -0.99, -0.01, cfg.get_num("tol.quad"));
    const double root = tau0(order, 1e-8, cfg.get_num("tol.quad"));
    if (!out_csv.empty()) {
        auto out = open_out(out_csv);
        csv_header(out, cfg, "tau,value,error_estimate");
        for (const auto& v : scan)
            out << num(v.tau) << "," << num(v.value) << "," << num(v.error_estimate) << "\n";
    }
    int sign_changes = 0;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (scan[i - 1].value * scan[i].value < 0.0) ++sign_changes;
    if (!out_json.empty()) {
        json rep = json_meta(cfg, timer);
        rep["alpha"] = order.alpha;
        rep["tau0"] = root;
        rep["sign_changes"] = sign_changes;
        open_out(out_json) << rep.dump(2) << "\n";
    }
    std::cout << "tau0(alpha=" << num(order.alpha) << ") = " << num(root) << " with "
              << sign_changes << " sign change(s) on the scan\n";
    return 0;
}

int run_green(const ExperimentConfig& cfg, const std::string& out_csv) {
    Timer timer;
    (void)timer;
    const BallDomain dom(static_cast<int>(cfg.get_int("dim")));
    const FracOrder order(cfg.get_num("alpha"));
    auto out = open_out(out_csv.empty() ? "green.csv" : out_csv);
    csv_header(out, cfg, "x_radius,y_radius,theta,value");
    for (double xr : {0.0, 0.3, 0.6, 0.9}) {
        const Point x = dom.dim == 2 ? make_point(xr, 0.0) : make_point(0.0, 0.0, xr);
        for (int ir = 1; ir <= 24; ++ir) {
            const double yr = ir / 25.0;
            for (int it = 0; it < 16; ++it) {
                const double th = 2.0 * M_PI * it / 16.0;
                const Point y = dom.dim == 2
                                    ? make_point(yr * std::cos(th), yr * std::sin(th))
                                    : make_point(yr * std::sin(th), 0.0, yr * std::cos(th));
                if (dist(x, y) < 1e-12) continue;
                out << num(xr) << "," << num(yr) << "," << num(th) << ","
                    << num(green_kernel(dom, order, x, y).value) << "\n";
            }
        }
    }
    std::cout << "kernel slices written\n";
    return 0;
}

int run_potential(const ExperimentConfig& cfg, const std::string& out_csv,
                  const std::string& out_json) {
    Timer timer;
    const BallDomain dom(static_cast<int>(cfg.get_int("dim")));
    const FracOrder order(cfg.get_num("alpha"));
    auto grid = grid_from(cfg);
    PotentialField pf = potential_field(dom, order, measure_from(cfg), grid, 1e-9);
    if (!out_csv.empty()) {
        // columns: rho, x (radius of the level point at theta), value, normalized
        auto out = open_out(out_csv);
        csv_header(out, cfg, "rho,x,value,normalized_value");
        for (std::size_t j = 0; j < grid->n_levels(); ++j)
            for (std::size_t i = 0; i < grid->thetas[j].size(); ++i)
                out << num(grid->levels[j]) << "," << num(grid->thetas[j][i]) << ","
                    << num(pf.samples.value(j, i)) << "," << num(pf.samples.normalized[j][i])
                    << "\n";
    }
    if (!out_json.empty()) {
        json rep = json_meta(cfg, timer);
        rep["radial"] = pf.samples.radial;
        rep["boundary_exponent"] = pf.samples.boundary_exponent;
        open_out(out_json) << rep.dump(2) << "\n";
    }
    std::cout << "potential field sampled on " << grid->n_levels() << " levels\n";
    return 0;
}

int run_solve(const ExperimentConfig& cfg, const std::string& out_csv,
              const std::string& out_json) {
    Timer timer;
    const BallDomain dom(2);
    const FracOrder order(cfg.get_num("alpha"));
    auto grid = grid_from(cfg);
    SolverOptions opts;
    opts.tol = cfg.get_num("tol.solve");
    SolveResult r = solve(dom, order, nonlinearity_from(cfg), measure_from(cfg),
                          cfg.get_num("k"), grid, opts);
    if (!out_csv.empty()) write_field_csv(out_csv, cfg, r.solution);
    if (!out_json.empty()) {
        json rep = json_meta(cfg, timer);
        rep["solve"] = solve_report(r);
        open_out(out_json) << rep.dump(2) << "\n";
    }
    std::cout << "solve k=" << num(r.k) << ": residual " << num(r.residual) << ", sandwich "
              << (r.sandwich_ok ? "ok" : "violated") << ", " << r.iterations << " iterations ("
              << r.method << ")\n";
    return r.converged ? 0 : 1;
}

int run_family(const ExperimentConfig& cfg, const std::string& out_csv,
               const std::string& out_json, std::vector<SolveResult>* keep = nullptr) {
    Timer timer;
    const BallDomain dom(2);
    const FracOrder order(cfg.get_num("alpha"));
    auto grid = grid_from(cfg);
    SolverOptions opts;
    opts.tol = cfg.get_num("tol.solve");
    auto fam = solve_family(dom, order, nonlinearity_from(cfg), measure_from(cfg),
                            k_schedule(cfg), grid, opts);
    if (!out_csv.empty()) {
        auto out = open_out(out_csv);
        csv_header(out, cfg, "k,rho,theta,value,normalized_value");
        for (const auto& r : fam)
            for (std::size_t j = 0; j < grid->n_levels(); ++j)
                for (std::size_t i = 0; i < grid->thetas[j].size(); ++i)
                    out << num(r.k) << "," << num(grid->levels[j]) << ","
                        << num(grid->thetas[j][i]) << "," << num(r.solution.value(j, i)) << ","
                        << num(r.solution.normalized[j][i]) << "\n";
    }
    if (!out_json.empty()) {
        json rep = json_meta(cfg, timer);
        json members = json::array();
        const std::size_t center = grid->n_levels() - 1;
        for (const auto& r : fam) {
            json m = solve_report(r);
            m["center_value"] = r.solution.value(center, 0);
            members.push_back(std::move(m));
        }
        rep["family"] = std::move(members);
        open_out(out_json) << rep.dump(2) << "\n";
    }
    std::cout << "family of " << fam.size() << " solves completed\n";
    if (keep) *keep = std::move(fam);
    return 0;
}

int run_rates(const ExperimentConfig& cfg, const std::string& out_json) {
    Timer timer;
    const BallDomain dom(2);
    const FracOrder order(cfg.get_num("alpha"));
    auto grid = grid_from(cfg);
    SolverOptions opts;
    opts.tol = cfg.get_num("tol.solve");
    SolveResult r = solve(dom, order, nonlinearity_from(cfg), measure_from(cfg),
                          cfg.get_num("k"), grid, opts);
    RateFit fit = fit_boundary_rate(r.solution);
    json rep = json_meta(cfg, timer);
    rep["exponent"] = fit.exponent;
    rep["intercept"] = fit.intercept;
    rep["r_squared"] = fit.r_squared;
    rep["rho_window"] = {fit.rho_window.first, fit.rho_window.second};
    if (!out_json.empty()) open_out(out_json) << rep.dump(2) << "\n";
    std::cout << "boundary rate " << num(fit.exponent) << " (r^2 " << num(fit.r_squared)
              << ")\n";
    return 0;
}

int run_weaknorm(const ExperimentConfig& cfg, const std::string& out_json) {
    Timer timer;
    const BallDomain dom(static_cast<int>(cfg.get_int("dim")));
    const FracOrder order(cfg.get_num("alpha"));
    auto grid = grid_from(cfg);
    PotentialField pf = potential_field(dom, order, measure_from(cfg), grid, 1e-9);
    const double kappa = measure_from(cfg).rotation_invariant()
                             ? order.p_star()
                             : order.p_star_N(dom.dim);
    WeakNormEstimate est = weak_norm_decay(pf.samples, order, kappa);
    json rep = json_meta(cfg, timer);
    rep["kappa"] = est.kappa;
    rep["fitted_decay"] = est.fitted_decay;
    rep["band_constant"] = est.band_constant;
    if (!out_json.empty()) open_out(out_json) << rep.dump(2) << "\n";
    std::cout << "weak-norm decay " << num(est.fitted_decay) << " at kappa " << num(kappa)
              << ", band " << num(est.band_constant) << "\n";
    return 0;
}

int run_classify(const ExperimentConfig& cfg, const std::string& out_json) {
    Timer timer;
    std::vector<SolveResult> fam;
    run_family(cfg, "", "", &fam);
    const FracOrder order(cfg.get_num("alpha"));
    RegimeVerdict v = classify_regime(fam, order, cfg.get_num("p"));
    json rep = json_meta(cfg, timer);
    rep["verdict"] = v.kind == RegimeVerdict::Kind::StrongLimit     ? "strong_limit"
                     : v.kind == RegimeVerdict::Kind::FamilyBlowUp ? "family_blow_up"
                                                                   : "inconclusive";
    rep["max_increment"] = v.max_increment;
    rep["last_decade_growth"] = v.last_decade_growth;
    if (v.rate) rep["limit_rate"] = v.rate->exponent;
    rep["center_values"] = v.center_values;
    if (!out_json.empty()) open_out(out_json) << rep.dump(2) << "\n";
    std::cout << "regime: " << rep["verdict"].get<std::string>() << "\n";
    return 0;
}

int run_residual(const ExperimentConfig& cfg, const std::string& out_csv,
                 const std::string& out_json) {
    Timer timer;
    const BallDomain dom(2);
    const FracOrder order(cfg.get_num("alpha"));
    json rep = json_meta(cfg, timer);
    if (cfg.get("nonlinearity") == "power" && cfg.get_num("p") > 1.0 + 2.0 * order.alpha) {
        auto repo = check_supersolution(dom, order, cfg.get_num("p"), radial_probe_points(15),
                                        1e-3, 1e-5);
        rep["c_p"] = repo.c_p;
        rep["lambda0"] = repo.lambda0;
        rep["ok"] = repo.ok;
        if (!out_csv.empty()) {
            auto out = open_out(out_csv);
            csv_header(out, cfg, "rho,normalized_pv,residual_rel");
            for (std::size_t i = 0; i < repo.points.size(); ++i)
                out << num(dom.rho(repo.points[i])) << "," << num(repo.normalized_pv[i]) << ","
                    << num(repo.residual_rel[i]) << "\n";
        }
        std::cout << "supersolution check " << (repo.ok ? "passed" : "failed") << ", c_p "
                  << num(repo.c_p) << ", lambda0 " << num(repo.lambda0) << "\n";
    } else {
        // pointwise operator values of the profile rho^tau on a radial sweep
        const double tau = cfg.get_num("tau");
        ExplicitField u = power_profile_field(dom, tau);
        json values = json::array();
        std::ofstream out;
        if (!out_csv.empty()) {
            out = open_out(out_csv);
            csv_header(out, cfg, "rho,pv,normalized");
        }
        for (double rho : {0.3, 0.1, 0.03, 0.01, 0.003, 0.001}) {
            const double pv =
                frac_lap_eval(dom, order, u, make_point(1.0 - rho, 0.0), 1e-5);
            const double normalized = pv / std::pow(rho, tau - 2.0 * order.alpha);
            values.push_back({{"rho", rho}, {"pv", pv}, {"normalized", normalized}});
            if (out.is_open())
                out << num(rho) << "," << num(pv) << "," << num(normalized) << "\n";
        }
        rep["profile_tau"] = tau;
        rep["values"] = std::move(values);
        std::cout << "pointwise operator sweep written\n";
    }
    if (!out_json.empty()) open_out(out_json) << rep.dump(2) << "\n";
    return 0;
}

int run_verify_all(const ExperimentConfig& cfg, bool quick, const std::string& out_json) {
    Timer timer;
    AcceptanceOptions opts;
    opts.quick = quick;
    opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    auto results = run_acceptance(opts, std::cout);
    if (!out_json.empty()) {
        json rep = json_meta(cfg, timer);
        json arr = json::array();
        for (const auto& r : results)
            arr.push_back({{"id", r.id},
                           {"name", r.name},
                           {"ran", r.ran},
                           {"pass", r.pass},
                           {"detail", r.detail},
                           {"seconds", r.seconds}});
        rep["criteria"] = std::move(arr);
        open_out(out_json) << rep.dump(2) << "\n";
    }
    const bool ok = acceptance_passed(results);
    std::cout << (ok ? "verification passed" : "verification has failing criteria") << "\n";
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary blow-up solver toolkit on the unit disk"};
    app.require_subcommand(1);

    std::string config_path, out_csv, out_json;
    double alpha = -1.0, p = -1.0, k = -1.0, tau_opt = 10.0;
    double grid_rho_min = -1.0, grid_q = -1.0, tol = -1.0;
    long dim = 0, n_theta = 0, scan = 0, seed = -1;
    std::string measure;
    bool quick = false;

    app.add_option("--config", config_path, "config file (key = value lines)");
    app.add_option("--alpha", alpha, "fractional order in (0,1)");
    app.add_option("--p", p, "power nonlinearity exponent (0 selects g = 0)");
    app.add_option("--k", k, "boundary-data strength");
    app.add_option("--tau", tau_opt, "profile exponent for the residual sweep");
    app.add_option("--dim", dim, "ball dimension (2 or 3)");
    app.add_option("--measure", measure, "hausdorff | dirac | sum");
    app.add_option("--grid-rho-min", grid_rho_min, "innermost boundary distance of the grid");
    app.add_option("--grid-q", grid_q, "geometric level ratio");
    app.add_option("--grid-n-theta", n_theta, "angular nodes per level");
    app.add_option("--tol", tol, "solver stopping tolerance");
    app.add_option("--scan", scan, "scan points for the constant table");
    app.add_option("--seed", seed, "sample-point seed");
    app.add_option("--out", out_csv, "CSV output path");
    app.add_option("--json", out_json, "JSON report path");
    app.add_flag("--quick", quick, "verify-all: skip the long criteria");

    auto* sc_ctau = app.add_subcommand("ctau", "constant table and its root");
    auto* sc_green = app.add_subcommand("green", "kernel slices");
    auto* sc_pot = app.add_subcommand("potential", "boundary-measure potential field");
    auto* sc_solve = app.add_subcommand("solve", "single fixed-point solve");
    auto* sc_family = app.add_subcommand("family", "k-sweep of solves");
    auto* sc_rates = app.add_subcommand("rates", "boundary-rate fit of a solve");
    auto* sc_weak = app.add_subcommand("weaknorm", "weak-norm decay of the potential");
    auto* sc_classify = app.add_subcommand("classify", "regime classification of a k-family");
    auto* sc_resid = app.add_subcommand("residual", "pointwise operator residuals");
    auto* sc_verify = app.add_subcommand("verify-all", "run the verification suite");

    for (auto* sc : {sc_ctau, sc_green, sc_pot, sc_solve, sc_family, sc_rates, sc_weak,
                     sc_classify, sc_resid, sc_verify})
        sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg =
            config_path.empty() ? ExperimentConfig() : ExperimentConfig::from_file(config_path);
        if (alpha > 0.0) cfg.set_num("alpha", alpha);
        if (p == 0.0) cfg.set("nonlinearity", "zero");
        else if (p > 0.0) cfg.set_num("p", p);
        if (k > 0.0) cfg.set_num("k", k);
        if (tau_opt < 1.0) cfg.set_num("tau", tau_opt);
        if (dim > 0) cfg.set_num("dim", static_cast<double>(dim));
        if (!measure.empty()) cfg.set("measure", measure);
        if (grid_rho_min > 0.0) cfg.set_num("grid.rho_min", grid_rho_min);
        if (grid_q > 0.0) cfg.set_num("grid.q", grid_q);
        if (n_theta > 0) cfg.set_num("grid.n_theta", static_cast<double>(n_theta));
        if (tol > 0.0) cfg.set_num("tol.solve", tol);
        if (scan > 0) cfg.set_num("scan", static_cast<double>(scan));
        if (seed >= 0) cfg.set_num("seed", static_cast<double>(seed));
        try {
            cfg.validate();
        } catch (const Error& e) {
            std::cout << json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump()
                      << "\n";
            return 2;
        }

        if (sc_ctau->parsed()) return run_ctau(cfg, out_csv, out_json);
        if (sc_green->parsed()) return run_green(cfg, out_csv);
        if (sc_pot->parsed()) return run_potential(cfg, out_csv, out_json);
        if (sc_solve->parsed()) return run_solve(cfg, out_csv, out_json);
        if (sc_family->parsed()) return run_family(cfg, out_csv, out_json);
        if (sc_rates->parsed()) return run_rates(cfg, out_json);
        if (sc_weak->parsed()) return run_weaknorm(cfg, out_json);
        if (sc_classify->parsed()) return run_classify(cfg, out_json);
        if (sc_resid->parsed()) return run_residual(cfg, out_csv, out_json);
        if (sc_verify->parsed()) return run_verify_all(cfg, quick, out_json);
        return 2;
    } catch (const Error& e) {
        std::cout << json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << json{{"error", "Unhandled"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}
