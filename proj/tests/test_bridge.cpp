#include <doctest.h>

#include <random>

#include <fmt/format.h>

#include "farfield/bridge.hpp"
#include "farfield/scenario.hpp"

using namespace farfield;

namespace {

SingularComponent comp(const std::string& id, const std::string& text) {
    return SingularComponent(id, parse_expression(text), ComponentKind::Branch);
}

// Root of g(z, y; kappa) = 0 in the complex xi1 plane near x, by complex Newton.
cplx xi1_root(const SingularComponent& c, double x, double y, double kappa) {
    cplx z = x;
    for (int it = 0; it < 50; ++it) {
        cplx g = c.value(z, y, kappa);
        const double h = 1e-7;
        cplx d = (c.value(z + h, y, kappa) - c.value(z - h, y, kappa)) / (2 * h);
        z -= g / d;
    }
    return z;
}

}  // namespace

TEST_CASE("circle with absorption: bypass below in xi1 at (1, 0)") {
    auto c = comp("c", "xi1^2 + xi2^2 - (1 + i*kappa)^2");
    int s = determine_bridge(c, {1.0, 0.0});
    CHECK(s == -1);
    CHECK(bypass_side(s, {1, 0}, frame_at(c, {1, 0}).n) == BypassSide::Below);
    // the root approaches the real axis from above, so the surface must pass below
    CHECK(xi1_root(c, 1.0, 0.0, 1e-3).imag() > 0);
}

TEST_CASE("the physical bypass side does not depend on the sign convention of g") {
    auto c = comp("c", "(1 + i*kappa)^2 - xi1^2 - xi2^2");
    int s = determine_bridge(c, {1.0, 0.0});
    CHECK(s == 1);
    CHECK(bypass_side(s, {1, 0}, frame_at(c, {1, 0}).n) == BypassSide::Below);
    int s2 = determine_bridge(c, {0.0, -1.0});
    CHECK(bypass_side(s2, {0, 1}, frame_at(c, {0, -1}).n) == BypassSide::Above);
    CHECK(xi1_root(c, 1.0, 0.0, 1e-3).imag() > 0);
}

TEST_CASE("bypass side against the root position on lines") {
    for (const char* text : {"xi1 + i*kappa", "-xi1 - i*kappa", "xi1 - i*kappa", "2*xi1 - xi2 + 3*i*kappa"}) {
        auto c = comp("l", text);
        Vec2 p = polish_onto_trace(c, {0.3, 0.4});
        int s = determine_bridge(c, p);
        LocalFrame fr = frame_at(c, p);
        BypassSide side = bypass_side(s, {1, 0}, fr.n);
        bool root_above = xi1_root(c, p.x, p.y, 1e-3).imag() > 0;
        CHECK((side == BypassSide::Below) == root_above);
    }
}

TEST_CASE("all components of both examples take s = +1") {
    for (const char* name : {"example_7_2", "example_7_5"}) {
        Analysis a = analyse(builtin_scenario(name));
        for (const auto& [id, s] : a.bridges) {
            INFO(name << " " << id);
            CHECK(s == 1);
        }
    }
    CHECK(analyse(builtin_scenario("example_7_2")).bridges.size() == 3);
    CHECK(analyse(builtin_scenario("example_7_5")).bridges.size() == 2);
}

TEST_CASE("errors") {
    auto flat = comp("f", "xi1");
    CHECK_THROWS_AS(determine_bridge(flat, {0.0, 0.0}), Error);
    auto c = comp("c", "xi1^2 + xi2^2 - 1");
    CHECK_THROWS_AS(bypass_side(1, {0, 1}, frame_at(c, {1, 0}).n), Error);
    // kappa enters with opposite signs on the two branches of the trace
    auto mixed = comp("m", "xi1^2 - 1 + i*kappa*xi1");
    WaveFunctionModel m;
    m.components.push_back(mixed);
    m.terms.push_back({parse_expression("1"), {{"m", 0.5}}});
    Window w{-2, 2, -1, 1};
    std::vector<RealTrace> traces{trace_real_curves(mixed, w, 0.05)};
    CHECK_THROWS_AS(determine_bridges(m, traces, w), Error);
}

TEST_CASE("bridge sign against root tracking on random affine components") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int checked = 0;
    while (checked < 50) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        if (std::abs(a) < 0.2 || std::abs(d) < 0.1) continue;
        auto g = comp("l", fmt::format("{:.17g}*xi1 + {:.17g}*xi2 + {:.17g} + {:.17g}*i*kappa", a, b, c, d));
        Vec2 p = polish_onto_trace(g, {0.0, u(rng)});
        int s = determine_bridge(g, p);
        bool below = bypass_side(s, {1, 0}, frame_at(g, p).n) == BypassSide::Below;
        for (double kappa : {1e-1, 1e-2, 1e-3, 1e-4}) {
            // the xi1 root must approach from above exactly when the surface bypasses below
            CHECK((xi1_root(g, p.x, p.y, kappa).imag() > 0) == below);
        }
        ++checked;
    }
}

TEST_CASE("a real kappa-derivative is rejected") {
    CHECK_THROWS_AS(determine_bridge(comp("r", "xi1 + kappa"), {0.0, 0.0}), Error);
}
