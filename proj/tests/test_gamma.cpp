#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracblow/errors.hpp"
#include "fracblow/gammafn.hpp"

using namespace fracblow;

TEST_CASE("gamma at half-integers and integers") {
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_fn(1.5) == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-13));
    CHECK(gamma_fn(7.5) == doctest::Approx(1871.254305797788).epsilon(1e-12));
}

TEST_CASE("gamma against the standard library across the working range") {
    for (double x = 0.05; x < 25.0; x += 0.173) {
        CHECK(gamma_fn(x) == doctest::Approx(std::tgamma(x)).epsilon(1e-12));
    }
}

TEST_CASE("beta function") {
    CHECK(beta_fn(0.5, 0.5) == doctest::Approx(M_PI).epsilon(1e-13));
    CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(gamma_fn(0.0), Error);
    CHECK_THROWS_AS(log_gamma(-1.0), Error);
}
