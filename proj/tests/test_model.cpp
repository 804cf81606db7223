#include <catch2/catch_amalgamated.hpp>

#include "cms/model.hpp"

using namespace cms;

TEST_CASE("default spec validates and partitions the square") {
    ModelSpec spec;
    REQUIRE_NOTHROW(spec.validate());
    // Rectangle widths tile [0,1): left edges 1 - a^{i-1}.
    double total = 0.0;
    for (int i = 1; i <= 40; ++i) {
        REQUIRE(spec.left_edge(i) == Catch::Approx(1.0 - std::pow(0.5, i - 1)));
        REQUIRE(spec.width(i) == Catch::Approx(std::pow(0.5, i)));
        total += spec.width(i);
    }
    REQUIRE(total == Catch::Approx(1.0).margin(1e-10));
    // Strip heights stack from y = 0.
    REQUIRE(spec.strip_bottom(1) == Catch::Approx(0.0));
    REQUIRE(spec.strip_bottom(2) == Catch::Approx(1.0 / 3.0));
    REQUIRE(spec.height(2) == Catch::Approx(1.0 / 9.0));
}

TEST_CASE("spec validation rejects bad parameters") {
    ModelSpec bad;
    bad.width_base = 1.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ModelSpec{};
    bad.height_base = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ModelSpec{};
    bad.perturbation = -0.1;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("locate finds the rectangle index") {
    ModelSpec spec;
    REQUIRE(locate({0.3, 0.5}, spec) == 1);
    REQUIRE(locate({0.5, 0.5}, spec) == 2);
    REQUIRE(locate({0.6, 0.5}, spec) == 2);
    REQUIRE(locate({0.75, 0.5}, spec) == 3);
    REQUIRE(locate({0.9, 0.5}, spec) == 4);
    REQUIRE_THROWS_AS(locate({1.5, 0.5}, spec), std::domain_error);
}

TEST_CASE("forward map is affine on each rectangle at eps = 0") {
    ModelSpec spec;
    Point p{0.6, 0.2};  // E_2
    Point q = apply(p, spec);
    REQUIRE(q.x == Catch::Approx((0.6 - 0.5) / 0.25));
    REQUIRE(q.y == Catch::Approx(1.0 / 3.0 + (1.0 / 9.0) * 0.2));
    REQUIRE(unstable_derivative(p, spec) == Catch::Approx(4.0));
}

TEST_CASE("inverse branches invert the map") {
    for (double eps : {0.0, 0.1}) {
        ModelSpec spec;
        spec.perturbation = eps;
        for (int i = 1; i <= 5; ++i) {
            for (double x : {0.05, 0.37, 0.93}) {
                double y = spec.strip_bottom(i) + 0.4 * spec.height(i);
                auto inv = apply_inverse_branch({x, y}, i, spec);
                REQUIRE_FALSE(inv.off_strip);
                REQUIRE(locate(inv.point, spec) == i);
                Point back = apply(inv.point, spec);
                REQUIRE(back.x == Catch::Approx(x).margin(1e-10));
                REQUIRE(back.y == Catch::Approx(y).margin(1e-12));
            }
        }
        // Points outside the strip are flagged.
        auto off = apply_inverse_branch({0.5, 0.9}, 2, spec);
        REQUIRE(off.off_strip);
    }
}

TEST_CASE("perturbation and its inverse roundtrip") {
    ModelSpec spec;
    spec.perturbation = 0.3;
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.77, 0.999}) {
        double x = spec.g(t);
        REQUIRE(spec.g_inverse(x) == Catch::Approx(t).margin(1e-12));
    }
    // g' stays within [1-eps, 1+eps].
    for (double t = 0.0; t < 1.0; t += 0.01) {
        REQUIRE(spec.g_prime(t) >= 0.7 - 1e-12);
        REQUIRE(spec.g_prime(t) <= 1.3 + 1e-12);
    }
}

TEST_CASE("itinerary matches repeated locate/apply") {
    ModelSpec spec;
    Point p{0.6180339887, 0.5772156649};
    auto it = itinerary(p, 12, spec);
    Point q = p;
    for (int k = 0; k < 12; ++k) {
        REQUIRE(it[size_t(k)] == locate(q, spec));
        q = apply(q, spec);
    }
}

TEST_CASE("condition verifier passes the default model with K0 = 2") {
    ModelSpec spec;
    auto rep = verify_conditions(spec);
    REQUIRE(rep.all_pass());
    REQUIRE(rep.K0 == Catch::Approx(2.0));
    for (const auto& e : rep.entries) {
        INFO(e.name);
        REQUIRE(e.pass);
    }
}

TEST_CASE("rigged height base fails exactly H5") {
    ModelSpec spec;
    spec.width_base = 0.4;
    spec.width_base_exact = Rational(2, 5);
    spec.height_base = 0.45;
    auto rep = verify_conditions(spec);
    REQUIRE_FALSE(rep.all_pass());
    for (const auto& e : rep.entries) {
        INFO(e.name);
        REQUIRE(e.pass == (e.name != "H5"));
    }
}

TEST_CASE("rigged perturbation fails exactly H2") {
    ModelSpec spec;
    spec.perturbation = 0.6;
    auto rep = verify_conditions(spec);
    REQUIRE_FALSE(rep.all_pass());
    for (const auto& e : rep.entries) {
        INFO(e.name);
        REQUIRE(e.pass == (e.name != "H2"));
    }
}
