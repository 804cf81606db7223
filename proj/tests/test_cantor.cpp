#include <catch2/catch_amalgamated.hpp>

#include "cms/measure.hpp"

#include <functional>

using namespace cms;

TEST_CASE("product lower bound for the survival probability") {
    ModelSpec spec;
    double p = to_double(survival_product_lower(1, spec.width_base_exact));
    REQUIRE(p >= 0.288);
    REQUIRE(p == Catch::Approx(0.2887880951).margin(1e-9));
    // Larger starting budgets survive more easily.
    REQUIRE(survival_product_lower(2, spec.width_base_exact) >
            survival_product_lower(1, spec.width_base_exact));
}

TEST_CASE("certified interval for the base survival measure") {
    ModelSpec spec;
    auto m = relative_measure(1, 60, spec);
    REQUIRE(m.width_d() < 1e-6);
    REQUIRE(m.lower_d() >= 0.288);
    // Reference value 0.31668417365...
    REQUIRE(m.lower_d() <= 0.3166841737);
    REQUIRE(m.upper_d() >= 0.3166841736);
}

TEST_CASE("interval bounds are monotone in the truncation depth") {
    ModelSpec spec;
    Rational prev_lo = 0, prev_hi = 1;
    for (int d : {5, 10, 20, 40}) {
        auto m = relative_measure(1, d, spec);
        REQUIRE(m.lower >= prev_lo);
        REQUIRE(m.upper <= prev_hi);
        REQUIRE(m.lower <= m.upper);
        prev_lo = m.lower;
        prev_hi = m.upper;
    }
}

TEST_CASE("upper bound at small depth equals the admissible-word mass") {
    ModelSpec spec;
    // Brute force: sum of symbol-width products over admissible continuations
    // of budget 1 at exact depth d. This is the recursion started from 1.
    for (int d : {1, 2, 3, 4, 5, 6}) {
        Rational brute = 0;
        std::function<void(long long, int, Rational)> rec = [&](long long S, int left, Rational w) {
            if (left == 0) {
                brute += w;
                return;
            }
            for (long long x = 1; x <= S; ++x)
                rec(S + x, left - 1, w * (Rational(1) - spec.width_base_exact) *
                                         rat_pow(spec.width_base_exact, unsigned(x - 1)));
        };
        rec(1, d, Rational(1));
        auto m = relative_measure(1, d, spec);
        // The dyadic outward rounding perturbs by at most a few ulps of 2^-192.
        REQUIRE(std::abs(m.upper_d() - to_double(brute)) < 1e-15);
        REQUIRE(m.upper >= brute);
    }
}

TEST_CASE("survival recursion is consistent across one unrolled step") {
    ModelSpec spec;
    auto lhs = relative_measure(1, 31, spec);
    // rho(1) = w_1 rho(2): only symbol 1 fits budget 1.
    auto rhs = relative_measure(2, 30, spec);
    Rational lo = rhs.lower / 2, hi = rhs.upper / 2;
    REQUIRE(lhs.lower <= hi);
    REQUIRE(lo <= lhs.upper);
}

TEST_CASE("stage measures tend to one") {
    ModelSpec spec;
    for (int n = 5; n <= 12; ++n) {
        auto m = cantor_measure(n, 60, spec);
        double floor_n = 1.0 - std::pow(2.0, 1 - n) - 1e-6;
        REQUIRE(m.lower_d() >= floor_n);
        REQUIRE(m.upper_d() <= 1.0);
    }
    REQUIRE_THROWS_AS(cantor_measure(0, 10, spec), std::invalid_argument);
}

TEST_CASE("leaf cross-sections are uniform across leaves") {
    ModelSpec spec;
    spec.perturbation = 0.1;
    auto r = leaf_ratio_bound({1, 1, 2}, spec);
    REQUIRE(r.measured == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(r.distortion_cap >= 1.0);
    REQUIRE_THROWS_AS(leaf_ratio_bound({1, 2}, spec), std::invalid_argument);
}
