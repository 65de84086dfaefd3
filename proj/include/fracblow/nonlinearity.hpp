#ifndef FRACBLOW_NONLINEARITY_HPP
#define FRACBLOW_NONLINEARITY_HPP

#include <cmath>
#include <functional>
#include <optional>

#include "fracblow/errors.hpp"
#include "fracblow/fracorder.hpp"

namespace fracblow {

// Nondecreasing continuous absorption term g with g(0) >= 0. Arguments below
// zero are clamped to zero before evaluation (transient Picard undershoots).
struct Nonlinearity {
    enum class Kind { Power, Zero, Custom };
    Kind kind = Kind::Zero;
    double p = 0.0;
    std::function<double(double)> fn;
    std::optional<double> lambda_g3;

    static Nonlinearity power(double p) {
        if (!(p > 0.0)) throw Error(ErrorCode::DomainError, "power exponent must be positive");
        Nonlinearity g;
        g.kind = Kind::Power;
        g.p = p;
        return g;
    }

    static Nonlinearity zero() { return Nonlinearity{}; }

    static Nonlinearity custom(std::function<double(double)> f,
                               std::optional<double> lambda = std::nullopt) {
        Nonlinearity g;
        g.kind = Kind::Custom;
        g.fn = std::move(f);
        g.lambda_g3 = lambda;
        if (!(g.fn(0.0) >= 0.0))
            throw Error(ErrorCode::DomainError, "nonlinearity must satisfy g(0) >= 0");
        return g;
    }

    double operator()(double s) const {
        if (s < 0.0) s = 0.0;
        switch (kind) {
            case Kind::Power: return std::pow(s, p);
            case Kind::Zero: return 0.0;
            case Kind::Custom: return fn(s);
        }
        return 0.0;
    }

    // integral subcriticality against the boundary-wide critical exponent:
    // closed form for powers (the boundary case diverges logarithmically)
    bool satisfies_g1(const FracOrder& order) const {
        switch (kind) {
            case Kind::Power: return p < order.p_star();
            case Kind::Zero: return true;
            case Kind::Custom: return true; // asserted by the caller
        }
        return true;
    }

    bool satisfies_g2(const FracOrder& order, int dim) const {
        switch (kind) {
            case Kind::Power: return p < order.p_star_N(dim);
            case Kind::Zero: return true;
            case Kind::Custom: return true;
        }
        return true;
    }

    // subadditivity constant for g(s+t) <= lambda (g(s)+g(t))
    double lambda_subadditive() const {
        switch (kind) {
            case Kind::Power: return p >= 1.0 ? std::pow(2.0, p - 1.0) : 1.0;
            case Kind::Zero: return 1.0;
            case Kind::Custom:
                if (lambda_g3) return *lambda_g3;
                throw Error(ErrorCode::DomainError,
                            "custom nonlinearity must declare a subadditivity constant");
        }
        return 1.0;
    }
};

// C^1 cap of g at level n: identity below n - delta, exponential approach to
// the asymptote n above it, with delta = 1e-3 n. Monotone in s and in n,
// g_n <= g, sup g_n = n (for unbounded g), g_n(0) = g(0).
struct TruncatedNonlinearity {
    Nonlinearity base;
    double level = 1.0;

    double operator()(double s) const {
        const double v = base(s);
        const double delta = 1e-3 * level;
        const double knee = level - delta;
        if (v <= knee) return v;
        return level - delta * std::exp(-(v - knee) / delta);
    }
};

inline TruncatedNonlinearity truncate(const Nonlinearity& g, double n) {
    if (!(n > 0.0) || !(n * (1.0 - 1e-3) > g(0.0)))
        throw Error(ErrorCode::InvalidLevel, "truncation level must exceed g(0)");
    return TruncatedNonlinearity{g, n};
}

} // namespace fracblow

#endif
