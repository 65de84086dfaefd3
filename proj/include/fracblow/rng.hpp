#ifndef FRACBLOW_RNG_HPP
#define FRACBLOW_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "fracblow/geometry.hpp"

namespace fracblow {

// Deterministic uniform doubles from the raw mt19937_64 stream. We do not use
// std::uniform_real_distribution because its output is not pinned across
// standard library implementations and CSV outputs must be bit-identical.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 42) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // area-uniform point in the unit disk with boundary distance >= rho_floor
    Point disk_point(double rho_floor = 0.0) {
        const double rmax = 1.0 - rho_floor;
        const double r = rmax * std::sqrt(uniform());
        const double t = 2.0 * M_PI * uniform();
        return make_point(r * std::cos(t), r * std::sin(t));
    }

    // uniform point on the unit circle
    Point circle_point() {
        const double t = 2.0 * M_PI * uniform();
        return make_point(std::cos(t), std::sin(t));
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace fracblow

#endif
