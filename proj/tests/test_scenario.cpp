#include <doctest.h>

#include <sstream>

#include "farfield/scenario.hpp"

using namespace farfield;

namespace {

ErrorKind load_error(const std::string& text) {
    std::istringstream is(text);
    try {
        load_scenario(is);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected the scenario to be rejected:\n" << text);
    return ErrorKind::Io;
}

const char* kMinimal = R"(
[scenario]
direction = 3, 4
window = -1, 1, -1, 1
[components]
g = xi1 + i*kappa
[terms]
term = 1 | g:0.5
)";

}  // namespace

TEST_CASE("direction is normalized on load") {
    std::istringstream is(kMinimal);
    Scenario s = load_scenario(is);
    CHECK(std::abs(norm(s.direction) - 1.0) <= 1e-12);
    CHECK(s.direction.x == doctest::Approx(0.6));
    Scenario b = builtin_scenario("example_7_2");
    CHECK(std::abs(norm(b.direction) - 1.0) <= 1e-12);
    CHECK(b.direction.x == doctest::Approx(1.5 / std::sqrt(3.06)));
}

TEST_CASE("save and load round-trip") {
    for (const auto& name : builtin_scenario_names()) {
        Scenario s = builtin_scenario(name);
        s.surface.lift = 0.35;
        s.r_ref = 5.5;
        std::ostringstream os;
        save_scenario(os, s);
        std::istringstream is(os.str());
        Scenario back = load_scenario(is);
        CHECK(same_scenario(s, back));
        CHECK(back.surface.lift == s.surface.lift);
        CHECK(back.r_values == s.r_values);
        CHECK(back.components.size() == s.components.size());
    }
}

TEST_CASE("malformed scenarios are rejected") {
    CHECK(load_error("[scenario]\nwindow = 0, 1, 0, 1\n[components]\ng = xi1\n[terms]\nterm = 1 | g:1\n") == ErrorKind::Scenario);
    CHECK(load_error(std::string(kMinimal) + "[bogus]\n") == ErrorKind::Scenario);
    CHECK(load_error(std::string(kMinimal) + "[r]\n2, -4\n") == ErrorKind::Scenario);
    CHECK(load_error(std::string(kMinimal) + "[scenario]\ngrid = 7\n") == ErrorKind::Scenario);
    CHECK(load_error(std::string(kMinimal) + "[scenario]\ncolour = red\n") == ErrorKind::Scenario);
    CHECK(load_error(std::string(kMinimal) + "[terms]\nterm = 1 | h:0.5\n") == ErrorKind::Precondition);
    CHECK(load_error(std::string(kMinimal) + "[components]\nq = xi1 +\n") == ErrorKind::Syntax);
    CHECK(load_error(std::string(kMinimal) + "[components]\nq = xi1 ; wave\n") == ErrorKind::Scenario);
    CHECK_THROWS_AS(builtin_scenario("nope"), Error);
    CHECK_THROWS_AS(load_scenario_file("/nonexistent/file.scn"), Error);
}

TEST_CASE("convergence slope on exact power laws") {
    std::vector<double> r{2, 4, 8, 16}, d;
    for (double x : r) d.push_back(3.7 / (x * x));
    auto rep = convergence_report(r, d, -2.6, -1.4);
    CHECK(std::abs(rep.slope + 2.0) <= 1e-9);
    CHECK(rep.residual <= 1e-9);
    CHECK(rep.pass);
    for (auto& x : d) x = std::sqrt(x);
    CHECK_FALSE(convergence_report(r, d, -2.6, -1.4).pass);
    CHECK_THROWS_AS(convergence_report({2, 4, 8}, {1, 1, 1}, -2.6, -1.4), Error);
    CHECK_THROWS_AS(convergence_report({2, 3, 4, 5}, {1, 1, 1, 1}, -2.6, -1.4), Error);
}

TEST_CASE("comparison CSV round-trip") {
    std::vector<ComparisonRow> rows{{2.0, {1.5, -0.25}, {1.25, 0.5}, 0.01}, {4.0, {0.1, 0.2}, {0.3, -0.4}, 0.0}};
    std::ostringstream os;
    write_comparison_csv(os, rows);
    CHECK(os.str().rfind("r,re_numeric,im_numeric,re_asymptotic,im_asymptotic,abs_diff,rel_diff\n", 0) == 0);
    std::istringstream is(os.str());
    auto back = read_comparison_csv(is);
    REQUIRE(back.size() == 2);
    for (size_t k = 0; k < 2; ++k) {
        CHECK(back[k].r == rows[k].r);
        CHECK(back[k].numeric == rows[k].numeric);
        CHECK(back[k].asymptotic == rows[k].asymptotic);
        CHECK(back[k].abs_diff() == rows[k].abs_diff());
    }
}

TEST_CASE("pipeline runs are byte-identical") {
    Scenario s = builtin_scenario("example_7_2");
    Analysis a = analyse(s);
    DeformationField f = build_field(s, a, 200);
    std::ostringstream x, y;
    write_comparison_csv(x, compare(s, a, f, {3.0, 6.0}));
    Analysis a2 = analyse(s);
    DeformationField f2 = build_field(s, a2, 200);
    write_comparison_csv(y, compare(s, a2, f2, {3.0, 6.0}));
    CHECK(x.str() == y.str());
}

TEST_CASE("traces-only scenario has no contributing points") {
    Scenario s = builtin_scenario("traces_only_circle");
    Analysis a = analyse(s);
    CHECK(a.traces.size() == 1);
    CHECK(a.traces[0].polylines.size() == 1);
    CHECK(a.points.size() == 2);
    CHECK(s.r_values.empty());
}
