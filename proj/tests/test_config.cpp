#include <catch2/catch_amalgamated.hpp>

#include "cms/config.hpp"

#include <cstdio>
#include <fstream>

using namespace cms;

namespace {
std::string write_temp(const std::string& body) {
    std::string path = "test_config_tmp.cfg";
    std::ofstream out(path);
    out << body;
    return path;
}
}  // namespace

TEST_CASE("decimal literals parse to exact rationals") {
    REQUIRE(parse_decimal_rational("0.5") == Rational(1, 2));
    REQUIRE(parse_decimal_rational("0.4") == Rational(2, 5));
    REQUIRE(parse_decimal_rational("1.25e-3") == Rational(1, 800));
    REQUIRE(parse_decimal_rational("-2.5") == Rational(-5, 2));
    REQUIRE(parse_decimal_rational("3") == Rational(3));
    REQUIRE_THROWS_AS(parse_decimal_rational("abc"), ConfigError);
    REQUIRE_THROWS_AS(parse_decimal_rational("1.2.3"), ConfigError);
}

TEST_CASE("config files: comments, trimming, and typed getters") {
    auto path = write_temp(
        "# demo\n"
        "model.width_base = 0.5  # inline comment\n"
        "mc.steps = 5000\n"
        "run.label = quick\n"
        "\n");
    Config c = Config::load(path);
    REQUIRE(c.has("model.width_base"));
    REQUIRE(c.get_double("model.width_base", 0.0) == 0.5);
    REQUIRE(c.get_int("mc.steps", 0) == 5000);
    REQUIRE(c.get_string("run.label", "") == "quick");
    REQUIRE(c.get_int("missing.key", 17) == 17);
    std::remove(path.c_str());
}

TEST_CASE("malformed configs raise config errors") {
    REQUIRE_THROWS_AS(Config::load("no_such_file.cfg"), ConfigError);
    auto path = write_temp("just a line without equals\n");
    REQUIRE_THROWS_AS(Config::load(path), ConfigError);
    std::remove(path.c_str());
    path = write_temp("mc.steps = twelve\n");
    Config c = Config::load(path);
    REQUIRE_THROWS_AS(c.get_int("mc.steps", 0), ConfigError);
    REQUIRE_THROWS_AS(c.get_double("mc.steps", 0.0), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("model section builds a spec with an exact width base") {
    auto path = write_temp(
        "model.width_base = 0.4\n"
        "model.height_base = 0.45\n");
    Config c = Config::load(path);
    ModelSpec spec = c.model();
    REQUIRE(spec.width_base == 0.4);
    REQUIRE(spec.width_base_exact == Rational(2, 5));
    REQUIRE(spec.height_base == 0.45);
    // This is the rigged demo: only H5 fails.
    auto rep = verify_conditions(spec);
    REQUIRE_FALSE(rep.all_pass());
    for (const auto& e : rep.entries) REQUIRE(e.pass == (e.name != "H5"));
    std::remove(path.c_str());
}

TEST_CASE("invalid model parameters surface as config errors") {
    auto path = write_temp("model.width_base = 1.5\n");
    Config c = Config::load(path);
    REQUIRE_THROWS_AS(c.model(), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("cap and run sections populate the tuning structs") {
    auto path = write_temp(
        "caps.symbol_cap = 12\n"
        "caps.depth = 5\n"
        "mc.seed = 99\n"
        "mc.steps = 20000\n");
    Config c = Config::load(path);
    auto tc = c.thermo_caps();
    REQUIRE(tc.symbol_cap == 12);
    auto xc = c.transfer_caps();
    REQUIRE(xc.depth == 5);
    REQUIRE(xc.symbol_cap == 12);
    auto mc = c.mc();
    REQUIRE(mc.seed == 99);
    REQUIRE(mc.steps == 20000);
    std::remove(path.c_str());
}
