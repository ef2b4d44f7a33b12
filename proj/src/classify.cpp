#include "farfield/classify.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

namespace farfield {

const char* point_kind_name(PointKind k) {
    switch (k) {
        case PointKind::Sos: return "sos";
        case PointKind::Crossing: return "crossing";
        case PointKind::Tangential: return "tangential";
    }
    return "?";
}

namespace {

bool lex_less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Exponents that leave the factor regular: 0, -1, -2, ...
bool regular_exponent(double mu) { return mu <= 0.0 && mu == std::round(mu); }

double exponent_of(const Term& t, const std::string& id) {
    for (const auto& f : t.factors)
        if (f.component_id == id) return f.mu;
    return 0.0;
}

bool solve2(double a, double b, double c, double d, double r0, double r1, double& x, double& y) {
    double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) return false;
    x = (r0 * d - b * r1) / det;
    y = (a * r1 - c * r0) / det;
    return true;
}

}  // namespace

std::vector<Vec2> find_sos_points(const SingularComponent& c, Vec2 xt, const RealTrace& trace) {
    std::vector<Vec2> seeds;
    auto h = [&](const TraceVertex& v) { return (xt.x * -v.b + xt.y * v.a) / std::hypot(v.a, v.b); };
    for (const auto& pl : trace.polylines) {
        const auto& vs = pl.vertices;
        size_t n = vs.size();
        size_t flat = 0;
        for (size_t k = 0; k < n; ++k)
            if (std::abs(h(vs[k])) <= 1e-12) ++flat;
        if (n > 2 && flat == n)
            throw Error(ErrorKind::BoundaryDirection,
                        fmt::format("direction is perpendicular to a straight piece of the trace of '{}'", c.id));
        size_t edges = pl.closed ? n : n - 1;
        for (size_t k = 0; k < edges; ++k) {
            const auto& v0 = vs[k];
            const auto& v1 = vs[(k + 1) % n];
            double h0 = h(v0), h1 = h(v1);
            if (std::abs(h0) <= 1e-12) seeds.push_back(v0.p);
            else if ((h0 > 0) != (h1 > 0) && std::abs(h1) > 1e-12) seeds.push_back(v0.p + (h0 / (h0 - h1)) * (v1.p - v0.p));
        }
        if (!pl.closed && std::abs(h(vs.back())) <= 1e-12) seeds.push_back(vs.back().p);
    }
    std::vector<Vec2> out;
    for (Vec2 p : seeds) {
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            Jet j = c.at(p);
            double a = j.d1.real(), b = j.d2.real();
            double g = j.value.real();
            double q = -xt.x * b + xt.y * a;
            double qx = -xt.x * j.h12.real() + xt.y * j.h11.real();
            double qy = -xt.x * j.h22.real() + xt.y * j.h12.real();
            double dx, dy;
            if (!solve2(a, b, qx, qy, g, q, dx, dy)) break;
            p = p - Vec2{dx, dy};
            if (std::hypot(dx, dy) <= 1e-15 * (1.0 + norm(p))) {
                ok = true;
                break;
            }
        }
        Jet j = c.at(p);
        double gn = std::hypot(j.d1.real(), j.d2.real());
        if (!ok && !(std::abs(j.value) <= kTraceTol)) continue;
        if (std::abs(j.value) > kTraceTol || gn <= 1e-10) continue;
        if (std::abs(-xt.x * j.d2.real() + xt.y * j.d1.real()) / gn > 1e-10) continue;
        bool dup = false;
        for (Vec2 q : out)
            if (norm(q - p) < 1e-8) dup = true;
        if (!dup) out.push_back(p);
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

namespace {

// Damped Gauss-Newton for g1 = g2 = 0; tolerates the singular Jacobian of a tangential touch.
bool solve_pair(const SingularComponent& c1, const SingularComponent& c2, Vec2& p) {
    double lambda = 1e-6;
    auto resid = [&](Vec2 q) {
        double f1 = c1.at(q).value.real(), f2 = c2.at(q).value.real();
        return f1 * f1 + f2 * f2;
    };
    double r = resid(p);
    for (int it = 0; it < 400 && r > 1e-34; ++it) {
        Jet j1 = c1.at(p), j2 = c2.at(p);
        double f1 = j1.value.real(), f2 = j2.value.real();
        double a1 = j1.d1.real(), b1 = j1.d2.real(), a2 = j2.d1.real(), b2 = j2.d2.real();
        double m11 = a1 * a1 + a2 * a2, m12 = a1 * b1 + a2 * b2, m22 = b1 * b1 + b2 * b2;
        double r0 = a1 * f1 + a2 * f2, r1 = b1 * f1 + b2 * f2;
        bool stepped = false;
        for (int tries = 0; tries < 30; ++tries) {
            double damp = lambda * (m11 + m22 + 1e-300);
            double dx, dy;
            if (!solve2(m11 + damp, m12, m12, m22 + damp, r0, r1, dx, dy)) {
                lambda *= 10;
                continue;
            }
            Vec2 q = p - Vec2{dx, dy};
            double rq = resid(q);
            if (rq < r) {
                p = q;
                r = rq;
                lambda = std::max(lambda * 0.1, 1e-15);
                stepped = true;
                break;
            }
            lambda *= 10;
        }
        if (!stepped) break;
    }
    return std::sqrt(r) <= kTraceTol;
}

// Refine a near-tangential root on the system g1 = 0, a1*b2 - a2*b1 = 0.
bool refine_tangential(const SingularComponent& c1, const SingularComponent& c2, Vec2& p) {
    Vec2 q = p;
    for (int it = 0; it < 60; ++it) {
        Jet j1 = c1.at(q), j2 = c2.at(q);
        double a1 = j1.d1.real(), b1 = j1.d2.real(), a2 = j2.d1.real(), b2 = j2.d2.real();
        double f = j1.value.real();
        double d = a1 * b2 - a2 * b1;
        double dx_d = j1.h11.real() * b2 + a1 * j2.h12.real() - j2.h11.real() * b1 - a2 * j1.h12.real();
        double dy_d = j1.h12.real() * b2 + a1 * j2.h22.real() - j2.h12.real() * b1 - a2 * j1.h22.real();
        double dx, dy;
        if (!solve2(a1, b1, dx_d, dy_d, f, d, dx, dy)) return false;
        q = q - Vec2{dx, dy};
        if (std::hypot(dx, dy) <= 1e-15 * (1.0 + norm(q))) break;
    }
    if (std::abs(c1.at(q).value) > kTraceTol || std::abs(c2.at(q).value) > kTraceTol) return false;
    if (norm(q - p) > 1e-3) return false;
    p = q;
    return true;
}

double transversality(const SingularComponent& c1, const SingularComponent& c2, Vec2 p, double& delta) {
    Jet j1 = c1.at(p), j2 = c2.at(p);
    double a1 = j1.d1.real(), b1 = j1.d2.real(), a2 = j2.d1.real(), b2 = j2.d2.real();
    delta = a1 * b2 - a2 * b1;
    double den = std::hypot(a1, b1) * std::hypot(a2, b2);
    return den > 0 ? std::abs(delta) / den : 0.0;
}

}  // namespace

std::vector<CrossingPoint> find_crossings(const SingularComponent& c1, const SingularComponent& c2, const Window& w) {
    const int n = 200;
    const double hx = (w.x1 - w.x0) / n, hy = (w.y1 - w.y0) / n;
    std::vector<double> f1((n + 1) * (n + 1)), f2((n + 1) * (n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Vec2 p{w.x0 + hx * i, w.y0 + hy * j};
            f1[i * (n + 1) + j] = c1.at(p).value.real();
            f2[i * (n + 1) + j] = c2.at(p).value.real();
        }
    auto changes = [&](const std::vector<double>& f, int i, int j) {
        double v[4] = {f[i * (n + 1) + j], f[(i + 1) * (n + 1) + j], f[(i + 1) * (n + 1) + j + 1], f[i * (n + 1) + j + 1]};
        bool pos = false, neg = false;
        for (double x : v) {
            if (x >= 0) pos = true;
            if (x <= 0) neg = true;
        }
        return pos && neg;
    };
    const double scale = std::hypot(w.x1 - w.x0, w.y1 - w.y0);
    std::vector<CrossingPoint> out;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!changes(f1, i, j) || !changes(f2, i, j)) continue;
            Vec2 p{w.x0 + hx * (i + 0.5), w.y0 + hy * (j + 0.5)};
            if (!solve_pair(c1, c2, p)) continue;
            if (!w.contains(p, 1e-9 * scale)) continue;
            double delta = 0.0;
            double tr = transversality(c1, c2, p, delta);
            if (tr < 1e-3) {
                Vec2 q = p;
                if (refine_tangential(c1, c2, q) || refine_tangential(c2, c1, q)) {
                    p = q;
                    tr = transversality(c1, c2, p, delta);
                }
            }
            bool dup = false;
            for (const auto& c : out)
                if (norm(c.where - p) < 1e-5 * scale) dup = true;
            if (dup) continue;
            CrossingPoint cp;
            cp.where = p;
            cp.transverse = tr > 1e-8;
            cp.comp1 = c1.id;
            cp.comp2 = c2.id;
            cp.delta = delta;
            if (cp.transverse && delta < 0) {
                std::swap(cp.comp1, cp.comp2);
                cp.delta = -delta;
            }
            out.push_back(cp);
        }
    }
    std::sort(out.begin(), out.end(), [](const CrossingPoint& a, const CrossingPoint& b) { return lex_less(a.where, b.where); });
    return out;
}

bool sos_active(Vec2 xt, Vec2 n, int s) {
    double d = dot(xt, n);
    if (std::abs(d) <= 1e-12) throw Error(ErrorKind::BoundaryDirection, "direction tangent to the trace at an SOS point");
    return s * sign_of(d) == 1;
}

bool crossing_active(Vec2 xt, double a1, double b1, double a2, double b2, int s1, int s2) {
    double e1 = xt.x * b2 - xt.y * a2;
    double e2 = -xt.x * b1 + xt.y * a1;
    if (std::abs(e1) <= 1e-12 * std::hypot(a2, b2) || std::abs(e2) <= 1e-12 * std::hypot(a1, b1))
        throw Error(ErrorKind::BoundaryDirection, "direction on the boundary of the active quadrant");
    return sign_of(e1) == s1 && sign_of(e2) == s2;
}

bool additivity_structural(const WaveFunctionModel& m, const std::string& c1, const std::string& c2) {
    for (const auto& t : m.terms)
        if (exponent_of(t, c1) > 0.0 && exponent_of(t, c2) > 0.0) return false;
    return true;
}

bool additivity_monodromy(const WaveFunctionModel& m, const BridgeConfig& bridges, const std::string& c1,
                          const std::string& c2, Vec2 probe, double* residual) {
    cplx acc = 0.0;
    double scale = 0.0;
    for (const auto& t : m.terms) {
        double mu1 = exponent_of(t, c1), mu2 = exponent_of(t, c2);
        if (mu1 >= 1.0 || mu2 >= 1.0)
            throw Error(ErrorKind::Precondition, "monodromy test needs exponents below 1");
        WaveFunctionModel one;
        one.components = m.components;
        one.terms = {t};
        cplx v = evaluate_model(one, bridges, probe.x, probe.y, 0.0);
        cplx w1 = 1.0 - std::exp(cplx(0.0, -2 * kPi * mu1));
        cplx w2 = 1.0 - std::exp(cplx(0.0, -2 * kPi * mu2));
        // F + F(s1 s2) - F(s1) - F(s2) for this term
        acc += v * w1 * w2;
        scale += std::abs(v);
    }
    double r = std::abs(acc);
    if (residual) *residual = r;
    return r <= 1e-10 * std::max(scale, 1e-300);
}

namespace {

cplx other_factors(const WaveFunctionModel& m, const BridgeConfig& bridges, const Term& t, Vec2 p,
                   const std::string& c1, const std::string& c2) {
    cplx v = evaluate(t.amplitude, {p.x, p.y, 0.0});
    for (const auto& f : t.factors) {
        if (f.component_id == c1 || f.component_id == c2) continue;
        cplx g = m.component(f.component_id).value(p.x, p.y);
        if (std::abs(g) <= 1e-8 && !regular_exponent(f.mu))
            throw Error(ErrorKind::Unsupported,
                        fmt::format("'{}' is also singular at ({}, {})", f.component_id, p.x, p.y));
        v *= branch_power(g, f.mu, bridges.at(f.component_id));
    }
    return v;
}

}  // namespace

std::vector<SpecialPoint> classify_points(const WaveFunctionModel& m, const BridgeConfig& bridges,
                                          const std::vector<RealTrace>& traces, Vec2 xt, const Window& w) {
    std::vector<SpecialPoint> out;
    for (const auto& tr : traces) {
        const SingularComponent& c = m.component(tr.component_id);
        for (Vec2 p : find_sos_points(c, xt, tr)) {
            for (const auto& o : m.components)
                if (o.id != c.id && std::abs(o.value(p.x, p.y)) <= 1e-8)
                    throw Error(ErrorKind::Unsupported,
                                fmt::format("SOS of '{}' at ({}, {}) lies on the trace of '{}'", c.id, p.x, p.y, o.id));
            SpecialPoint sp;
            sp.kind = PointKind::Sos;
            sp.where = p;
            sp.comp1 = c.id;
            LocalFrame fr = frame_at(c, p);
            sp.a1 = fr.a;
            sp.b1 = fr.b;
            sp.alpha = alpha_at(c, p);
            if (std::abs(sp.alpha) <= 1e-14)
                throw Error(ErrorKind::Unsupported, fmt::format("degenerate SOS of '{}' (zero curvature)", c.id));
            sp.s1 = bridges.at(c.id);
            sp.active = sos_active(xt, fr.n, sp.s1);
            for (const auto& t : m.terms) {
                double mu = exponent_of(t, c.id);
                if (regular_exponent(mu)) continue;
                sp.terms.push_back({other_factors(m, bridges, t, p, c.id, ""), mu, 0.0});
            }
            sp.contributing = sp.active && !sp.terms.empty();
            sp.reason = !sp.active ? "inactive" : (sp.terms.empty() ? "F regular here" : "active SOS");
            out.push_back(std::move(sp));
        }
    }
    for (size_t i = 0; i < m.components.size(); ++i) {
        for (size_t j = i + 1; j < m.components.size(); ++j) {
            for (const auto& cp : find_crossings(m.components[i], m.components[j], w)) {
                const auto& c1 = m.component(cp.comp1);
                const auto& c2 = m.component(cp.comp2);
                SpecialPoint sp;
                sp.where = cp.where;
                sp.comp1 = cp.comp1;
                sp.comp2 = cp.comp2;
                Jet j1 = c1.at(cp.where), j2 = c2.at(cp.where);
                sp.a1 = j1.d1.real();
                sp.b1 = j1.d2.real();
                sp.a2 = j2.d1.real();
                sp.b2 = j2.d2.real();
                sp.delta = cp.delta;
                sp.s1 = bridges.at(cp.comp1);
                sp.s2 = bridges.at(cp.comp2);
                for (const auto& o : m.components)
                    if (o.id != c1.id && o.id != c2.id && std::abs(o.value(cp.where.x, cp.where.y)) <= 1e-8)
                        throw Error(ErrorKind::Unsupported, fmt::format("three traces meet at ({}, {})", cp.where.x, cp.where.y));
                bool both_singular = false;
                for (const auto& t : m.terms) {
                    double mu1 = exponent_of(t, c1.id), mu2 = exponent_of(t, c2.id);
                    if (regular_exponent(mu1) || regular_exponent(mu2)) continue;
                    both_singular = true;
                    sp.terms.push_back({other_factors(m, bridges, t, cp.where, c1.id, c2.id), mu1, mu2});
                }
                if (!cp.transverse) {
                    sp.kind = PointKind::Tangential;
                    Vec2 n1 = (1.0 / std::hypot(sp.a1, sp.b1)) * Vec2{sp.a1, sp.b1};
                    Vec2 n2 = (1.0 / std::hypot(sp.a2, sp.b2)) * Vec2{sp.a2, sp.b2};
                    if (sp.s1 * sp.s2 * dot(n1, n2) < 0)
                        throw Error(ErrorKind::Scenario,
                                    fmt::format("bridges of '{}' and '{}' are incompatible at their tangential touch", c1.id, c2.id));
                    sp.active = norm(xt - sp.s1 * n1) <= 1e-9;
                    sp.additive = additivity_structural(m, c1.id, c2.id);
                    sp.contributing = false;
                    sp.reason = sp.active && both_singular ? "tangential touch (contribution unsupported)" : "tangential touch";
                    out.push_back(std::move(sp));
                    continue;
                }
                sp.kind = PointKind::Crossing;
                sp.active = crossing_active(xt, sp.a1, sp.b1, sp.a2, sp.b2, sp.s1, sp.s2);
                sp.additive = additivity_structural(m, c1.id, c2.id);
                sp.contributing = sp.active && !sp.additive && !sp.terms.empty();
                if (!sp.active) sp.reason = "inactive";
                else if (sp.additive) sp.reason = "active but additive";
                else sp.reason = "active crossing";
                out.push_back(std::move(sp));
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const SpecialPoint& a, const SpecialPoint& b) { return lex_less(a.where, b.where); });
    return out;
}

void write_classification_csv(std::ostream& os, const std::vector<SpecialPoint>& pts) {
    os << "x,y,kind,components,delta_or_alpha,s1,s2,active,contributing,reason\n";
    for (const auto& p : pts) {
        std::string comps = p.comp2.empty() ? p.comp1 : p.comp1 + "|" + p.comp2;
        double v = p.kind == PointKind::Sos ? p.alpha : p.delta;
        os << fmt::format("{:.17g},{:.17g},{},{},{:.17g},{},{},{},{},{}\n", p.where.x, p.where.y, point_kind_name(p.kind), comps,
                          v, p.s1, p.s2, p.active ? 1 : 0, p.contributing ? 1 : 0, p.reason);
    }
}

}  // namespace farfield
