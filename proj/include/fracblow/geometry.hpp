#ifndef FRACBLOW_GEOMETRY_HPP
#define FRACBLOW_GEOMETRY_HPP

#include <array>
#include <cmath>

#include "fracblow/errors.hpp"

namespace fracblow {

// Point in R^N, N <= 3. Unused trailing coordinates are zero.
struct Point {
    std::array<double, 3> c{0.0, 0.0, 0.0};

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }
};

inline Point make_point(double x, double y) { return Point{{x, y, 0.0}}; }
inline Point make_point(double x, double y, double z) { return Point{{x, y, z}}; }

inline Point operator-(const Point& a, const Point& b) {
    return Point{{a.c[0] - b.c[0], a.c[1] - b.c[1], a.c[2] - b.c[2]}};
}
inline Point operator+(const Point& a, const Point& b) {
    return Point{{a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2]}};
}
inline Point operator*(double s, const Point& a) {
    return Point{{s * a.c[0], s * a.c[1], s * a.c[2]}};
}

inline double dot(const Point& a, const Point& b) {
    return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2];
}
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Point& a, const Point& b) { return norm(a - b); }

// Unit ball in dimension N >= 2, radius fixed to 1.
struct BallDomain {
    int dim = 2;

    explicit BallDomain(int n = 2) : dim(n) {
        if (n < 2 || n > 3)
            throw Error(ErrorCode::DomainError, "ball dimension must be 2 or 3");
    }

    // boundary distance rho(x) = 1 - |x|
    double rho(const Point& x) const { return 1.0 - norm(x); }
    bool inside(const Point& x) const { return norm(x) < 1.0; }
    bool strictly_inside(const Point& x, double margin = 0.0) const {
        return norm(x) < 1.0 - margin;
    }
    bool on_boundary(const Point& x, double tol = 1e-12) const {
        return std::abs(norm(x) - 1.0) <= tol;
    }
};

// Stable |x-y|^2 for two points given in polar form on the plane:
// x at radius a (angle 0), y at radius r and angle theta. Avoids the
// catastrophic cancellation of a^2 + r^2 - 2 a r cos(theta) near theta=0, r=a.
inline double polar_dist2(double a, double r, double theta) {
    const double d = a - r;
    const double s = std::sin(0.5 * theta);
    return d * d + 4.0 * a * r * s * s;
}

} // namespace fracblow

#endif
