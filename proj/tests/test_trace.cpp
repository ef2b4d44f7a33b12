#include <doctest.h>

#include <random>
#include <sstream>

#include <fmt/format.h>

#include "farfield/trace.hpp"

using namespace farfield;

namespace {

SingularComponent comp(const std::string& id, const std::string& text) {
    return SingularComponent(id, parse_expression(text), ComponentKind::Branch);
}

// Curvature of the circle through three points.
double circle_curvature(Vec2 p, Vec2 q, Vec2 r) {
    double a = norm(q - p), b = norm(r - q), c = norm(r - p);
    return 2.0 * std::abs(cross(q - p, r - p)) / (a * b * c);
}

}  // namespace

TEST_CASE("unit circle traces to one closed loop") {
    auto c = comp("c", "xi1^2 + xi2^2 - 1");
    RealTrace t = trace_real_curves(c, {-2, 2, -2, 2}, 0.05);
    REQUIRE(t.polylines.size() == 1);
    CHECK(t.polylines[0].closed);
    CHECK(t.vertex_count() > 100);
    for (const auto& v : t.polylines[0].vertices) {
        CHECK(std::abs(norm(v.p) - 1.0) < 1e-12);
        CHECK(v.a == doctest::Approx(2 * v.p.x));
        CHECK(v.b == doctest::Approx(2 * v.p.y));
    }
}

TEST_CASE("orientation keeps the normal on the right") {
    auto c = comp("c", "xi1^2 + xi2^2 - 1");
    RealTrace t = trace_real_curves(c, {-2, 2, -2, 2}, 0.05);
    const auto& vs = t.polylines[0].vertices;
    int agree = 0;
    for (size_t k = 0; k + 1 < vs.size(); ++k) {
        Vec2 step = vs[k + 1].p - vs[k].p;
        if (dot(step, Vec2{-vs[k].b, vs[k].a}) > 0) ++agree;
    }
    CHECK(agree == static_cast<int>(vs.size()) - 1);
}

TEST_CASE("line and parabola are open polylines that reach the window edge") {
    Window w{-3, 2.5, -1.5, 3.5};
    auto line = comp("s1", "xi2 - 2");
    RealTrace tl = trace_real_curves(line, w, 0.02);
    REQUIRE(tl.polylines.size() == 1);
    CHECK_FALSE(tl.polylines[0].closed);
    // tangent (-b, a) = (-1, 0): the line runs right to left
    CHECK(tl.polylines[0].vertices.front().p.x == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(tl.polylines[0].vertices.back().p.x == doctest::Approx(-3.0).epsilon(1e-9));

    auto par = comp("s2", "xi2 - xi1^2");
    RealTrace tp = trace_real_curves(par, w, 0.02);
    REQUIRE(tp.polylines.size() == 1);
    for (const auto& v : tp.polylines[0].vertices) CHECK(std::abs(v.p.y - v.p.x * v.p.x) < 1e-12);
}

TEST_CASE("two components give two disjoint loops") {
    auto c = comp("c", "((xi1 - 1)^2 + xi2^2 - 0.25)*((xi1 + 1)^2 + xi2^2 - 0.25)");
    RealTrace t = trace_real_curves(c, {-2, 2, -1, 1}, 0.02);
    CHECK(t.polylines.size() == 2);
    for (const auto& pl : t.polylines) CHECK(pl.closed);
}

TEST_CASE("frame and degenerate gradient") {
    auto c = comp("c", "xi1^2 + xi2^2 - 1");
    LocalFrame fr = frame_at(c, {0.6, 0.8});
    CHECK(fr.n.x == doctest::Approx(0.6));
    CHECK(fr.n.y == doctest::Approx(0.8));
    CHECK(fr.t.x == doctest::Approx(-0.8));
    CHECK(fr.grad_norm == doctest::Approx(2.0));
    LocalFrame f1 = frame_at(c, {1.0, 0.0});
    CHECK(f1.a == 2.0);
    CHECK(f1.b == 0.0);
    CHECK(f1.n.x == 1.0);
    CHECK(f1.t.y == 1.0);
    // unit circle: curvature 1, gradient norm 2
    CHECK(std::abs(alpha_at(c, {1.0, 0.0})) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(frame_at(c, {0.5, 0.5}), Error);
    auto cone = comp("k", "xi1^2 - xi2^2");
    CHECK_THROWS_AS(frame_at(cone, {0.0, 0.0}), Error);
}

TEST_CASE("alpha of the parabola at its SOS point") {
    auto par = comp("s2", "xi2 - xi1^2");
    // normal (-2 xi1, 1) parallel to (1, 2) at xi1 = -1/4
    double alpha = alpha_at(par, {-0.25, 0.0625});
    double x2 = 2.0 / std::sqrt(5.0);
    CHECK(std::abs(alpha - std::pow(x2, 4)) < 1e-12);
}

TEST_CASE("curvature identity on random conics") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    while (checked < 50) {
        double A = u(rng), B = u(rng), C = u(rng), D = u(rng), E = u(rng);
        Vec2 p0{u(rng), u(rng)};
        double F = -(A * p0.x * p0.x + B * p0.x * p0.y + C * p0.y * p0.y + D * p0.x + E * p0.y);
        double gx = 2 * A * p0.x + B * p0.y + D, gy = B * p0.x + 2 * C * p0.y + E;
        double gn = std::hypot(gx, gy);
        double num = 2 * C * gx * gx - 2 * B * gx * gy + 2 * A * gy * gy;
        if (gn < 0.2 || std::abs(num) / (gn * gn * gn) < 0.05) continue;
        auto c = comp("q", fmt::format("{:.17g}*xi1^2 + {:.17g}*xi1*xi2 + {:.17g}*xi2^2 + {:.17g}*xi1 + {:.17g}*xi2 + {:.17g}",
                                       A, B, C, D, E, F));
        double kappa_curve = std::abs(num) / (gn * gn * gn);
        double alpha = alpha_at(c, p0);
        CHECK(std::abs(std::abs(alpha) - kappa_curve / (2 * gn)) <= 1e-10 * kappa_curve / (2 * gn));

        // geometric cross-check: circle through nearby points of the curve
        Vec2 t{-gy / gn, gx / gn};
        const double h = 2e-3;
        Vec2 a = polish_onto_trace(c, p0 - h * t), b = polish_onto_trace(c, p0 + h * t);
        CHECK(circle_curvature(a, p0, b) == doctest::Approx(kappa_curve).epsilon(1e-4));
        ++checked;
    }
}

TEST_CASE("trace CSV layout") {
    auto c = comp("c", "xi1^2 + xi2^2 - 1");
    std::ostringstream os;
    write_trace_csv(os, trace_real_curves(c, {-2, 2, -2, 2}, 0.5));
    CHECK(os.str().rfind("x,y,a,b\n", 0) == 0);
}
