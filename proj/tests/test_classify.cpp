#include <doctest.h>

#include <random>
#include <sstream>

#include <fmt/format.h>

#include "farfield/classify.hpp"
#include "farfield/scenario.hpp"

using namespace farfield;

namespace {

Vec2 direction(double deg) { return {std::cos(deg * kPi / 180), std::sin(deg * kPi / 180)}; }

// Coordinates of x in the basis of the two trace normals.
std::pair<double, double> normal_coords(Vec2 x, Vec2 n1, Vec2 n2) {
    double d = cross(n1, n2);
    return {cross(x, n2) / d, cross(n1, x) / d};
}

WaveFunctionModel two_lines(const std::vector<Term>& terms) {
    WaveFunctionModel m;
    m.components.emplace_back("g1", parse_expression("xi1 + i*kappa"), ComponentKind::Branch);
    m.components.emplace_back("g2", parse_expression("xi2 + i*kappa"), ComponentKind::Branch);
    m.terms = terms;
    return m;
}

}  // namespace

TEST_CASE("one active quadrant per bridge combination") {
    struct Geometry {
        Vec2 n1, n2;
    };
    // axis-aligned and a sheared pair of traces
    for (Geometry g : {Geometry{{1, 0}, {0, 1}}, Geometry{{0.8, -0.6}, {0.3, 0.9}}}) {
        std::vector<int> owner(360, 0);
        for (int s1 : {1, -1})
            for (int s2 : {1, -1}) {
                std::vector<bool> on(360);
                for (int k = 0; k < 360; ++k) {
                    Vec2 x = direction(k + 0.5);
                    bool act = crossing_active(x, g.n1.x, g.n1.y, g.n2.x, g.n2.y, s1, s2);
                    auto [c1, c2] = normal_coords(x, g.n1, g.n2);
                    CHECK(act == (sign_of(c1) == s1 && sign_of(c2) == s2));
                    if (act) ++owner[k];
                    on[k] = act;
                }
                int arcs = 0;
                for (int k = 0; k < 360; ++k)
                    if (on[k] && !on[(k + 359) % 360]) ++arcs;
                CHECK(arcs == 1);
            }
        for (int k = 0; k < 360; ++k) CHECK(owner[k] == 1);
    }
}

TEST_CASE("quadrant layout for the axis-aligned crossing") {
    CHECK(crossing_active(direction(45), 1, 0, 0, 1, 1, 1));
    CHECK(crossing_active(direction(135), 1, 0, 0, 1, -1, 1));
    CHECK(crossing_active(direction(225), 1, 0, 0, 1, -1, -1));
    CHECK(crossing_active(direction(315), 1, 0, 0, 1, 1, -1));
    CHECK_THROWS_AS(crossing_active(direction(90), 1, 0, 0, 1, 1, 1), Error);
}

TEST_CASE("SOS activity flips with the bridge sign") {
    for (int k = 0; k < 360; ++k) {
        Vec2 x = direction(k + 0.25);
        Vec2 n = direction(37.0);
        if (std::abs(dot(x, n)) < 1e-9) continue;
        CHECK(sos_active(x, n, 1) != sos_active(x, n, -1));
        CHECK(sos_active(x, n, 1) == (dot(x, n) > 0));
    }
    CHECK_THROWS_AS(sos_active({0, 1}, {1, 0}, 1), Error);
}

TEST_CASE("monodromy and structural additivity agree on random models") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> mu(0.05, 0.95), amp(-2.0, 2.0);
    std::uniform_int_distribution<int> pick(0, 3), count(1, 3);
    BridgeConfig b{{"g1", 1}, {"g2", 1}};
    int additive = 0;
    for (int k = 0; k < 50; ++k) {
        std::vector<Term> terms;
        int n = count(rng);
        for (int t = 0; t < n; ++t) {
            Term term;
            term.amplitude = parse_expression(fmt::format("{:.17g} + {:.17g}*i", amp(rng), amp(rng)));
            int shape = pick(rng);
            if (shape == 0 || shape == 2) term.factors.push_back({"g1", mu(rng)});
            if (shape == 1 || shape == 2) term.factors.push_back({"g2", mu(rng)});
            terms.push_back(term);
        }
        auto m = two_lines(terms);
        bool st = additivity_structural(m, "g1", "g2");
        double res = 0.0;
        bool mono = additivity_monodromy(m, b, "g1", "g2", {0.31, -0.17}, &res);
        CHECK(st == mono);
        if (st) ++additive;
    }
    CHECK(additive > 5);
    CHECK(additive < 45);
}

TEST_CASE("product is non-additive, sum is additive and does not contribute") {
    BridgeConfig b{{"g1", 1}, {"g2", 1}};
    Window w{-1, 1, -1, 1};
    Vec2 xt = direction(40);
    auto run = [&](const std::vector<Term>& terms) {
        auto m = two_lines(terms);
        std::vector<RealTrace> tr;
        for (const auto& c : m.components) tr.push_back(trace_real_curves(c, w, 0.02));
        return classify_points(m, b, tr, xt, w);
    };
    Expr one = parse_expression("1");
    auto product = run({Term{one, {{"g1", 0.5}, {"g2", 0.5}}}});
    REQUIRE(product.size() == 1);
    CHECK(product[0].active);
    CHECK_FALSE(product[0].additive);
    CHECK(product[0].contributing);

    auto sum = run({Term{one, {{"g1", 0.5}}}, Term{one, {{"g2", 0.5}}}});
    REQUIRE(sum.size() == 1);
    CHECK(sum[0].active);
    CHECK(sum[0].additive);
    CHECK_FALSE(sum[0].contributing);
    CHECK(assemble_far_field(sum).empty());
    CHECK_FALSE(additivity_monodromy(two_lines({Term{one, {{"g1", 0.5}, {"g2", 0.5}}}}), b, "g1", "g2", {0.2, 0.3}));
    CHECK(additivity_monodromy(two_lines({Term{one, {{"g1", 0.5}}}, Term{one, {{"g2", 0.5}}}}), b, "g1", "g2", {0.2, 0.3}));
}

TEST_CASE("example with a line and a parabola mixes SOS and crossing") {
    Analysis a = analyse(builtin_scenario("example_7_5"));
    int sos = 0, crossings = 0, active = 0;
    for (const auto& p : a.points) {
        if (p.kind == PointKind::Sos) ++sos;
        if (p.kind == PointKind::Crossing) ++crossings;
        if (p.contributing) ++active;
    }
    CHECK(crossings == 2);
    CHECK(active == 2);
    const SpecialPoint* s = nullptr;
    for (const auto& p : a.points)
        if (p.kind == PointKind::Sos && p.contributing) s = &p;
    REQUIRE(s != nullptr);
    CHECK(s->where.x == doctest::Approx(-0.25));
    CHECK(s->where.y == doctest::Approx(0.0625));
    CHECK(s->alpha == doctest::Approx(16.0 / 25.0).epsilon(1e-12));
    for (const auto& p : a.points)
        if (p.kind == PointKind::Crossing) {
            CHECK(std::abs(p.where.x) == doctest::Approx(std::sqrt(2.0)));
            CHECK(p.contributing == (p.where.x < 0));
        }
    CHECK(sos >= 1);
}

TEST_CASE("three lines: two of three crossings contribute") {
    Analysis a = analyse(builtin_scenario("example_7_2"));
    REQUIRE(a.points.size() == 3);
    int contributing = 0;
    for (const auto& p : a.points) {
        CHECK(p.kind == PointKind::Crossing);
        CHECK(p.delta == doctest::Approx(1.0));
        if (p.contributing) ++contributing;
        bool at_10 = std::abs(p.where.x - 1.0) < 1e-9 && std::abs(p.where.y) < 1e-9;
        CHECK(p.contributing == !at_10);
    }
    CHECK(contributing == 2);
}

TEST_CASE("circle: SOS activity follows the bridge") {
    Analysis a = analyse(builtin_scenario("traces_only_circle"));
    REQUIRE(a.points.size() == 2);
    for (const auto& p : a.points) CHECK(p.kind == PointKind::Sos);
    int active = 0;
    for (const auto& p : a.points) active += p.active;
    CHECK(active == 1);
    std::ostringstream os;
    write_classification_csv(os, a.points);
    CHECK(os.str().rfind("x,y,kind,components,delta_or_alpha,s1,s2,active,contributing,reason\n", 0) == 0);
}

TEST_CASE("SOS points of the circle against a scan of the traced polyline") {
    SingularComponent c("c", parse_expression("xi1^2 + xi2^2 - 1"), ComponentKind::Branch);
    Window w{-2, 2, -2, 2};
    RealTrace tr = trace_real_curves(c, w, 0.05);
    Vec2 xt{1, 0};
    // sign changes of xt.t between consecutive vertices, t = (-b, a)
    std::vector<Vec2> scanned;
    for (const auto& pl : tr.polylines) {
        size_t n = pl.vertices.size();
        for (size_t k = 0; k + (pl.closed ? 0 : 1) < n; ++k) {
            const auto& v0 = pl.vertices[k];
            const auto& v1 = pl.vertices[(k + 1) % n];
            double d0 = -xt.x * v0.b + xt.y * v0.a, d1 = -xt.x * v1.b + xt.y * v1.a;
            if ((d0 > 0) != (d1 > 0)) scanned.push_back(0.5 * (v0.p + v1.p));
        }
    }
    auto pts = find_sos_points(c, xt, tr);
    REQUIRE(pts.size() == 2);
    REQUIRE(scanned.size() == 2);
    for (Vec2 q : scanned) {
        double best = 1e9;
        for (Vec2 p : pts) best = std::min(best, norm(p - q));
        CHECK(best < 0.05);
    }
    for (Vec2 p : pts) {
        CHECK(std::abs(std::abs(p.x) - 1.0) <= 1e-10);
        CHECK(std::abs(p.y) <= 1e-10);
    }
}

TEST_CASE("a line touching a parabola is tagged tangential") {
    SingularComponent g1("g1", parse_expression("xi2"), ComponentKind::Branch);
    SingularComponent g2("g2", parse_expression("xi2 - xi1^2"), ComponentKind::Branch);
    auto cr = find_crossings(g1, g2, {-1, 1, -1, 1});
    REQUIRE(cr.size() == 1);
    CHECK(norm(cr[0].where) <= 1e-6);
    CHECK_FALSE(cr[0].transverse);
}

TEST_CASE("monodromy residual of the product is four times |F|") {
    Expr one = parse_expression("1");
    auto m = two_lines({Term{one, {{"g1", 0.5}, {"g2", 0.5}}}});
    BridgeConfig b{{"g1", 1}, {"g2", 1}};
    Vec2 probe{0.2, 0.3};
    double res = 0.0;
    CHECK_FALSE(additivity_monodromy(m, b, "g1", "g2", probe, &res));
    double absF = 1.0 / std::sqrt(probe.x * probe.y);
    CHECK(res == doctest::Approx(4 * absF).epsilon(1e-12));
}
