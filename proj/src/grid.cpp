#include "fracblow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace fracblow {

std::shared_ptr<const GradedGrid> GradedGrid::make(double rho_min, double q, int n_theta,
                                                   std::optional<double> cluster,
                                                   double cluster_min_dtheta) {
    if (!(rho_min >= 1e-5))
        throw Error(ErrorCode::DomainError, "grid rho_min must be >= 1e-5");
    if (!(q > 1.0)) throw Error(ErrorCode::DomainError, "grid ratio q must exceed 1");
    if (n_theta < 4) throw Error(ErrorCode::DomainError, "need at least 4 angular nodes");

    auto g = std::make_shared<GradedGrid>();
    g->rho_min = rho_min;
    g->q = q;
    g->n_theta = n_theta;
    g->cluster_theta = cluster;
    g->cluster_min_dtheta = cluster_min_dtheta;

    for (double rho = rho_min; rho < 1.0; rho *= q) g->levels.push_back(rho);
    g->levels.push_back(1.0); // center

    const double two_pi = 2.0 * M_PI;
    for (std::size_t j = 0; j < g->levels.size(); ++j) {
        std::vector<double> th;
        if (g->levels[j] >= 1.0) {
            th.push_back(0.0); // center has a single node
        } else {
            th.reserve(static_cast<std::size_t>(n_theta));
            for (int i = 0; i < n_theta; ++i)
                th.push_back(two_pi * static_cast<double>(i) / static_cast<double>(n_theta));
            if (cluster) {
                // geometric offsets on both sides of the anchor
                for (double d = cluster_min_dtheta; d < two_pi / n_theta; d *= 1.6) {
                    double lo = *cluster - d, hi = *cluster + d;
                    while (lo < 0.0) lo += two_pi;
                    while (hi >= two_pi) hi -= two_pi;
                    th.push_back(lo);
                    th.push_back(hi);
                }
                double c = *cluster;
                while (c < 0.0) c += two_pi;
                while (c >= two_pi) c -= two_pi;
                th.push_back(c);
            }
            std::sort(th.begin(), th.end());
            th.erase(std::unique(th.begin(), th.end(),
                                 [](double x, double y) { return std::abs(x - y) < 1e-13; }),
                     th.end());
        }
        g->thetas.push_back(std::move(th));
    }
    return g;
}

FieldOnGrid FieldOnGrid::sample(std::shared_ptr<const GradedGrid> g, FracOrder o, double beta,
                                const std::function<double(const Point&)>& f, bool radial) {
    FieldOnGrid out(std::move(g), o, beta);
    out.radial = radial;
    for (std::size_t j = 0; j < out.grid->n_levels(); ++j) {
        const double w = std::pow(out.grid->levels[j], 1.0 - o.alpha);
        for (std::size_t i = 0; i < out.grid->thetas[j].size(); ++i)
            out.normalized[j][i] = f(out.grid->node(j, i)) * w;
    }
    return out;
}

double FieldOnGrid::denorm(std::size_t j) const {
    return std::pow(grid->levels[j], order.alpha - 1.0);
}

double FieldOnGrid::angular_mean_value(std::size_t j) const {
    double acc = 0.0;
    for (double v : normalized[j]) acc += v;
    return acc / static_cast<double>(normalized[j].size()) * denorm(j);
}

namespace {

double interp_level(const std::vector<double>& thetas, const std::vector<double>& vals,
                    double theta) {
    const std::size_t n = thetas.size();
    if (n == 1) return vals[0];
    const double two_pi = 2.0 * M_PI;
    while (theta < 0.0) theta += two_pi;
    while (theta >= two_pi) theta -= two_pi;
    // locate bracketing angles (periodic)
    auto it = std::upper_bound(thetas.begin(), thetas.end(), theta);
    std::size_t hi = static_cast<std::size_t>(it - thetas.begin());
    std::size_t lo = (hi == 0) ? n - 1 : hi - 1;
    double th_lo = thetas[lo];
    double th_hi = (hi == n) ? thetas[0] + two_pi : thetas[hi % n];
    if (hi == 0) th_lo -= two_pi;
    const double span = th_hi - th_lo;
    const double t = span > 0.0 ? (theta - th_lo) / span : 0.0;
    return (1.0 - t) * vals[lo] + t * vals[hi % n];
}

} // namespace

double FieldOnGrid::interp(double rho, double theta) const {
    if (rho <= 0.0) return 0.0; // outside the closed ball
    const auto& lv = grid->levels;
    const double alpha = order.alpha;

    if (rho < lv.front()) {
        // power extension below the resolved layer
        const double base = interp_level(grid->thetas[0], normalized[0], theta) * denorm(0);
        return base * std::pow(rho / lv.front(), boundary_exponent);
    }
    if (rho >= lv.back()) {
        return normalized.back()[0] * denorm(grid->n_levels() - 1);
    }
    auto it = std::upper_bound(lv.begin(), lv.end(), rho);
    const std::size_t hi = static_cast<std::size_t>(it - lv.begin());
    const std::size_t lo = hi - 1;
    const double v_lo = interp_level(grid->thetas[lo], normalized[lo], theta);
    const double v_hi = interp_level(grid->thetas[hi], normalized[hi], theta);
    const double t = std::log(rho / lv[lo]) / std::log(lv[hi] / lv[lo]);
    double nv;
    if (v_lo > 0.0 && v_hi > 0.0) {
        nv = std::exp((1.0 - t) * std::log(v_lo) + t * std::log(v_hi));
    } else {
        nv = (1.0 - t) * v_lo + t * v_hi;
    }
    return nv * std::pow(rho, alpha - 1.0);
}

double FieldOnGrid::interp_point(const Point& x) const {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return interp(1.0 - r, std::atan2(x[1], x[0]));
}

double FieldOnGrid::min_normalized() const {
    double m = normalized[0][0];
    for (const auto& row : normalized)
        for (double v : row) m = std::min(m, v);
    return m;
}

double FieldOnGrid::max_normalized() const {
    double m = normalized[0][0];
    for (const auto& row : normalized)
        for (double v : row) m = std::max(m, v);
    return m;
}

VolumeField FieldOnGrid::as_volume_field() const {
    VolumeField vf;
    vf.boundary_exponent = boundary_exponent;
    vf.radial = radial;
    // copy the data the lambdas need; the field object may not outlive them
    auto self = std::make_shared<FieldOnGrid>(*this);
    vf.eval = [self](const Point& x) { return self->interp_point(x); };
    if (radial) {
        vf.radial_eval = [self](double r) { return self->interp(1.0 - r, 0.0); };
        vf.radial_eval_rho = [self](double rho) { return self->interp(rho, 0.0); };
    }
    return vf;
}

} // namespace fracblow
