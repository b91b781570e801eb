#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "sfp/supply_model.hpp"
#include "sfp/types.hpp"
#include "test_util.hpp"

using namespace sfp;

TEST_SUITE("supply_model") {

TEST_CASE("tracked consolidation matches hand arithmetic") {
    // 0.1 + 0.9 * 0.5
    CHECK(consolidated_rate_tracked(0.1, 0.5) == doctest::Approx(0.55).epsilon(1e-15));
    // 0.2 + 0.8 * 0.25
    CHECK(consolidated_rate_tracked(0.2, 0.25) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(consolidated_rate_tracked(0.01, 0.01) ==
          doctest::Approx(0.01 + 0.99 * 0.01).epsilon(1e-15));
}

TEST_CASE("tracked consolidation is symmetric and dominates both stages") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 200; ++i) {
        const double eta = u(gen);
        const double theta = u(gen);
        const double z = consolidated_rate_tracked(eta, theta);
        // eta + theta - eta*theta is symmetric in its arguments.
        CHECK(z == doctest::Approx(consolidated_rate_tracked(theta, eta)).epsilon(1e-14));
        CHECK(z >= eta);
        CHECK(z >= theta);
        CHECK(z < 1.0);
        // Strictly increasing in each argument.
        CHECK(consolidated_rate_tracked(eta + 0.001, theta) > z);
        CHECK(consolidated_rate_tracked(eta, theta + 0.001) > z);
    }
}

TEST_CASE("untracked consolidation mixes supply rates through the sourcing row") {
    const std::vector<double> theta{0.2, 0.05};
    const std::vector<double> q{0.3, 0.7};
    // mix = 0.3*0.2 + 0.7*0.05 = 0.095; z = 0.1 + 0.9*0.095 = 0.1855
    CHECK(consolidated_rate_untracked(0.1, theta, q) == doctest::Approx(0.1855).epsilon(1e-15));
}

TEST_CASE("untracked consolidation with a point-mass row reduces to tracked") {
    const std::vector<double> theta{0.2, 0.05, 0.33};
    for (std::size_t b = 0; b < theta.size(); ++b) {
        std::vector<double> q(theta.size(), 0.0);
        q[b] = 1.0;
        CHECK(consolidated_rate_untracked(0.12, theta, q) ==
              doctest::Approx(consolidated_rate_tracked(0.12, theta[b])).epsilon(1e-15));
    }
}

TEST_CASE("three-echelon consolidation composes two-stage consolidation") {
    // 0.1 + 0.9 * (0.2 + 0.8 * 0.3) = 0.496 = 1 - 0.9*0.8*0.7
    CHECK(consolidated_rate_three_echelon(0.1, 0.2, 0.3) ==
          doctest::Approx(0.496).epsilon(1e-15));
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 100; ++i) {
        const double eta = u(gen), zeta = u(gen), theta = u(gen);
        const double z3 = consolidated_rate_three_echelon(eta, zeta, theta);
        const double nested =
            consolidated_rate_tracked(eta, consolidated_rate_tracked(zeta, theta));
        CHECK(z3 == doctest::Approx(nested).epsilon(1e-14));
        // Survival form: 1 - prod(1 - stage rates).
        CHECK(z3 ==
              doctest::Approx(1.0 - (1.0 - eta) * (1.0 - zeta) * (1.0 - theta)).epsilon(1e-13));
    }
}

TEST_CASE("diagnostic flag probability") {
    const Diagnostic perfect(1.0, 1.0);
    CHECK(positive_probability(0.384, perfect) == doctest::Approx(0.384).epsilon(1e-15));
    const Diagnostic dev(0.85, 0.9);
    // (1 - 0.9) + (0.85 + 0.9 - 1) * 0.3 = 0.1 + 0.75*0.3 = 0.325
    CHECK(positive_probability(0.3, dev) == doctest::Approx(0.325).epsilon(1e-15));
    // An informative device keeps the flag probability strictly increasing in z.
    CHECK(positive_probability(0.31, dev) > positive_probability(0.3, dev));
}

TEST_CASE("tracked flag rate agrees with brute-force simulation") {
    const double eta = 0.12, theta = 0.3, sens = 0.85, spec = 0.9;
    const double analytic =
        positive_probability(consolidated_rate_tracked(eta, theta), Diagnostic(sens, spec));
    const double mc = testutil::mc_flag_rate_tracked(eta, theta, sens, spec, 2'000'000, 101);
    // 2e6 trials: sd ~ 3.4e-4, tolerance is > 4 sd.
    CHECK(std::fabs(mc - analytic) < 1.5e-3);
}

TEST_CASE("untracked flag rate agrees with brute-force simulation") {
    const double eta = 0.07, sens = 0.9, spec = 0.95;
    const std::vector<double> theta{0.25, 0.02, 0.4};
    const std::vector<double> q{0.5, 0.3, 0.2};
    const double analytic =
        positive_probability(consolidated_rate_untracked(eta, theta, q), Diagnostic(sens, spec));
    const double mc = testutil::mc_flag_rate_untracked(eta, theta, q, sens, spec, 2'000'000, 202);
    CHECK(std::fabs(mc - analytic) < 1.5e-3);
}

TEST_CASE("three-echelon rate agrees with brute-force simulation") {
    const double analytic = consolidated_rate_three_echelon(0.1, 0.15, 0.2); // 0.388
    const double mc = testutil::mc_flag_rate_three_echelon(0.1, 0.15, 0.2, 2'000'000, 303);
    CHECK(std::fabs(mc - analytic) < 1.5e-3);
}

TEST_CASE("rates outside the open unit interval are rejected") {
    CHECK_THROWS_AS(consolidated_rate_tracked(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(consolidated_rate_tracked(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(consolidated_rate_tracked(-0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(consolidated_rate_three_echelon(0.1, 0.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(positive_probability(1.0, Diagnostic(1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("sourcing rows must be probability vectors of matching length") {
    const std::vector<double> theta{0.2, 0.05};
    CHECK_THROWS_AS(consolidated_rate_untracked(0.1, theta, std::vector<double>{0.3, 0.6}),
                    std::invalid_argument); // sums to 0.9
    CHECK_THROWS_AS(consolidated_rate_untracked(0.1, theta, std::vector<double>{1.1, -0.1}),
                    std::invalid_argument); // negative weight
    CHECK_THROWS_AS(consolidated_rate_untracked(0.1, theta, std::vector<double>{1.0}),
                    std::invalid_argument); // length mismatch
    // A row off by less than 1e-9 is accepted.
    CHECK(consolidated_rate_untracked(0.1, theta, std::vector<double>{0.3, 0.7 + 5e-10}) ==
          doctest::Approx(0.1855).epsilon(1e-9));
}

TEST_CASE("diagnostic parameters must be informative") {
    CHECK_THROWS_AS(Diagnostic(0.5, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(Diagnostic(0.9, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Diagnostic(1.01, 0.9), std::invalid_argument);
    CHECK_NOTHROW(Diagnostic(1.0, 1.0));
    CHECK_NOTHROW(Diagnostic(0.51, 0.51));
}

} // TEST_SUITE
