#include <doctest.h>

#include <sstream>

#include "farfield/quad.hpp"
#include "farfield/scenario.hpp"

using namespace farfield;

namespace {

const cplx I(0.0, 1.0);

WaveFunctionModel amplitude_only(const std::string& text) {
    WaveFunctionModel m;
    m.terms.push_back({parse_expression(text), {}});
    return m;
}

// Smooth bump that vanishes on the boundary of [-1, 1]^2.
Vec2 bump(Vec2 p) {
    double w = (1 - p.x * p.x) * (1 - p.x * p.x) * (1 - p.y * p.y) * (1 - p.y * p.y);
    return {0.4 * w, -0.25 * w};
}

}  // namespace

TEST_CASE("affine field: every cell weight is det(I + iM) times the cell area") {
    WaveFunctionModel one = amplitude_only("1");
    Window w{-1, 2, -0.5, 1.5};
    double m11 = 0.3, m12 = -0.2, m21 = 0.15, m22 = 0.4;
    auto f = DeformationField::from_function(w, 30, 20, {1, 0}, [&](Vec2 p) {
        return Vec2{m11 * p.x + m12 * p.y, m21 * p.x + m22 * p.y};
    });
    for (double eps : {1.0, 0.5}) {
        QuadConfig cfg;
        cfg.eps_scale = eps;
        cplx det = (1.0 + I * eps * m11) * (1.0 + I * eps * m22) - (I * eps * m12) * (I * eps * m21);
        cplx got = integrate_on_surface(one, {}, f, {0, 0}, cfg).value;
        CHECK(std::abs(got - det * 6.0) < 1e-12);
    }
}

TEST_CASE("zero field reduces to the flat midpoint rule") {
    WaveFunctionModel m = amplitude_only("xi1^2*xi2 + 3");
    Window w{0, 1, 0, 2};
    auto f = DeformationField::from_function(w, 10, 8, {1, 0}, [](Vec2) { return Vec2{}; });
    cplx expected = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 8; ++j) {
            double x = 0.05 + 0.1 * i, y = 0.125 + 0.25 * j;
            expected += (x * x * y + 3) * 0.1 * 0.25;
        }
    cplx got = integrate_on_surface(m, {}, f, {0, 0}).value;
    CHECK(std::abs(got - expected) < 1e-13);
    CHECK(got.imag() == 0.0);
}

TEST_CASE("flat reference of a constant is the window area") {
    WaveFunctionModel one = amplitude_only("1");
    QuadResult q = integrate_reference(one, {}, {-1.5, 2.5, -1.5, 2.5}, 40, 40, {0, 0}, 0.1);
    CHECK(q.value.real() == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(std::abs(q.value.imag()) < 1e-14);
    CHECK_THROWS_AS(integrate_reference(one, {}, {0, 1, 0, 1}, 4, 4, {0, 0}, 0.0), Error);
}

TEST_CASE("Cauchy invariance for an entire integrand on a bump surface") {
    WaveFunctionModel m = amplitude_only("xi1^3 - 2*i*xi1*xi2 + xi2^2 + 1");
    Window w{-1, 1, -1, 1};
    Vec2 x{2.0, -1.0};
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        auto flat = DeformationField::from_function(w, n, n, {1, 0}, [](Vec2) { return Vec2{}; });
        auto bent = DeformationField::from_function(w, n, n, {1, 0}, bump);
        cplx a = integrate_on_surface(m, {}, flat, x).value;
        cplx b = integrate_on_surface(m, {}, bent, x).value;
        double d = std::abs(a - b);
        if (prev > 0) CHECK(d < prev / 3.0);
        prev = d;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("error estimate tracks the true error of a smooth integral") {
    // integral of exp(-i x.xi) over [0, 1]^2 in closed form
    WaveFunctionModel one = amplitude_only("1");
    Vec2 x{3.0, 1.0};
    auto side = [](double k) { return (1.0 - std::exp(-I * k)) / (I * k); };
    cplx exact = side(x.x) * side(x.y);
    auto f = DeformationField::from_function({0, 1, 0, 1}, 64, 64, {1, 0}, [](Vec2) { return Vec2{}; });
    QuadResult q = integrate_on_surface(one, {}, f, x);
    double err = std::abs(q.value - exact);
    CHECK(err > 0.5 * q.error_estimate);
    CHECK(err < 2.0 * q.error_estimate);
}

TEST_CASE("deterministic and kernel independent") {
    WaveFunctionModel m = amplitude_only("xi1*xi2 - i*xi2^2");
    auto f = DeformationField::from_function({-1, 1, -1, 1}, 50, 40, {1, 0}, bump);
    QuadConfig s, v;
    s.kernel = KernelKind::Scalar;
    v.kernel = KernelKind::Auto;
    cplx a = integrate_on_surface(m, {}, f, {1.5, 0.5}, s).value;
    CHECK(a == integrate_on_surface(m, {}, f, {1.5, 0.5}, s).value);
    cplx b = integrate_on_surface(m, {}, f, {1.5, 0.5}, v).value;
    CHECK(b == integrate_on_surface(m, {}, f, {1.5, 0.5}, v).value);
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
}

TEST_CASE("integrand heat map layout") {
    WaveFunctionModel one = amplitude_only("1");
    auto f = DeformationField::from_function({0, 1, 0, 1}, 4, 4, {1, 0}, [](Vec2) { return Vec2{}; });
    std::ostringstream os;
    write_integrand_heatmap(os, one, {}, f, {0, 0}, 1.0);
    std::string s = os.str();
    CHECK(s.rfind("x,y,log10_abs_integrand\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 17);
}

TEST_CASE("limiting absorption: flat integrals approach the deformed value as kappa shrinks") {
    Scenario s = builtin_scenario("example_7_2");
    s.surface.taper = 0.5;
    Analysis a = analyse(s);
    DeformationField f = build_field(s, a, 200);
    Vec2 x = 3.0 * s.direction;
    cplx d0 = integrate_on_surface(a.model, a.bridges, f, x).value;
    double prev = 1e300;
    for (double kappa : {0.2, 0.1, 0.05}) {
        cplx flat = integrate_reference(a.model, a.bridges, s.window, 200, 200, x, kappa).value;
        double d = std::abs(flat - d0);
        INFO("kappa " << kappa << " distance " << d);
        CHECK(d < 0.75 * prev);
        prev = d;
        QuadConfig cfg;
        cfg.kappa = kappa;
        cplx deformed = integrate_on_surface(a.model, a.bridges, f, x, cfg).value;
        CHECK(std::abs(deformed - flat) < 0.01 * std::abs(flat));
    }
}

TEST_CASE("grid doubling from 400 stays within the reported error estimate") {
    Scenario s = builtin_scenario("example_7_2");
    Analysis a = analyse(s);
    auto coarse = compare(s, a, build_field(s, a, 400), {5.0});
    auto fine = compare(s, a, build_field(s, a, 800), {5.0});
    CHECK(std::abs(fine[0].numeric - coarse[0].numeric) < coarse[0].error_estimate);
}
