#include "farfield/surface.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace farfield {

namespace {

double smax(double a, double b, double w) { return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + w * w)); }
double sabs(double z, double w) { return std::sqrt(z * z + w * w); }

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6 * t - 15) + 10);
}

Vec2 solve(double a11, double a12, double a21, double a22, Vec2 r) {
    double det = a11 * a22 - a12 * a21;
    if (det == 0.0) throw Error(ErrorKind::DegenerateGradient, "singular local Jacobian in patch");
    return {(a22 * r.x - a12 * r.y) / det, (a11 * r.y - a21 * r.x) / det};
}

bool is_linear(const SingularComponent& c) {
    for (Var u : {Var::Xi1, Var::Xi2})
        for (Var v : {Var::Xi1, Var::Xi2})
            if (!derivative(derivative(c.g, u), v).is_constant(0.0)) return false;
    return true;
}

}  // namespace

Vec2 LocalPatch::zeta(Vec2 xi) const {
    if (kind == PatchKind::Crossing) return {c1.at(xi).value.real(), c2.at(xi).value.real()};
    Vec2 d = xi - center;
    return {-b * d.x + a * d.y, c1.at(xi).value.real()};
}

Vec2 LocalPatch::eta_local(Vec2 z) const {
    const double w = 0.02 * rho;
    if (kind == PatchKind::Crossing) {
        double t1 = rho - c_1 * sabs(z.x, 0.3 * rho / c_1);
        double t2 = rho - c_2 * sabs(z.y, 0.3 * rho / c_2);
        if (floor1 >= 0) t1 = smax(t1, floor1 * rho, w);
        if (floor2 >= 0) t2 = smax(t2, floor2 * rho, w);
        return {s1 * beta * t1, s2 * beta * t2};
    }
    double e1 = -(alpha > 0 ? 1.0 : -1.0) * beta * s1 * z.x;
    double p = rho * rho - 2 * z.y * z.y;
    if (floor1 >= 0) p = smax(p, floor1 * rho * rho, w * rho);
    return {e1, std::abs(alpha) * beta * s1 * p};
}

Vec2 LocalPatch::eta(Vec2 xi) const {
    Vec2 e = eta_local(zeta(xi));
    Jet j1 = c1.at(xi);
    if (kind == PatchKind::Crossing) {
        Jet j2 = c2.at(xi);
        return solve(j1.d1.real(), j1.d2.real(), j2.d1.real(), j2.d2.real(), e);
    }
    return solve(-b, a, j1.d1.real(), j1.d2.real(), e);
}

double LocalPatch::weight(Vec2 xi) const {
    Vec2 z = zeta(xi);
    double q;
    if (kind == PatchKind::Crossing) {
        double u = z.x / rho, v = z.y / rho;
        q = std::pow(std::pow(u, 8) + std::pow(v, 8), 0.125);
    } else {
        q = std::hypot(z.x, z.y) / rho;
    }
    return 1.0 - smoothstep((q - 1.0) / (blend - 1.0));
}

double LocalPatch::support_radius() const {
    // Inverse Jacobian norm at the centre bounds the extent of the zeta box.
    double m11, m12, m21, m22;
    if (kind == PatchKind::Crossing) {
        Jet j1 = c1.at(center), j2 = c2.at(center);
        m11 = j1.d1.real(); m12 = j1.d2.real(); m21 = j2.d1.real(); m22 = j2.d2.real();
    } else {
        m11 = -b; m12 = a; m21 = a; m22 = b;
    }
    double det = std::abs(m11 * m22 - m12 * m21);
    double fro = std::sqrt(m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22);
    return 2.0 * blend * rho * std::sqrt(2.0) * fro / det;
}

LocalPatch sos_patch(const SingularComponent& c, Vec2 where, int s, double rho, double beta, double floor, double blend) {
    LocalPatch p;
    p.kind = PatchKind::Sos;
    p.center = where;
    p.c1 = c;
    p.s1 = s;
    p.rho = rho;
    p.beta = beta;
    p.blend = blend;
    p.floor1 = floor;
    LocalFrame fr = frame_at(c, where);
    p.a = fr.a;
    p.b = fr.b;
    p.alpha = alpha_at(c, where);
    return p;
}

LocalPatch crossing_patch(const SingularComponent& c1, const SingularComponent& c2, Vec2 where, int s1, int s2,
                          Vec2 xt, double rho, double beta, double floor, double blend) {
    LocalPatch p;
    p.kind = PatchKind::Crossing;
    p.center = where;
    p.c1 = c1;
    p.c2 = c2;
    p.s1 = s1;
    p.s2 = s2;
    p.rho = rho;
    p.beta = beta;
    p.blend = blend;
    Jet j1 = c1.at(where), j2 = c2.at(where);
    // x' solves J^T x' = xt, so that xt.xi = x'.zeta to first order
    Vec2 xp = solve(j1.d1.real(), j2.d1.real(), j1.d2.real(), j2.d2.real(), xt);
    if (xp.x == 0.0 || xp.y == 0.0) throw Error(ErrorKind::BoundaryDirection, "direction on an active quadrant boundary");
    double sum = std::abs(xp.x) + std::abs(xp.y);
    p.c_1 = 2 * sum / std::abs(xp.x);
    p.c_2 = 2 * sum / std::abs(xp.y);
    p.floor1 = is_linear(c1) ? -1.0 : floor;
    p.floor2 = is_linear(c2) ? -1.0 : floor;
    return p;
}

Vec2 DeformationField::interpolate(Vec2 p) const {
    double u = (p.x - window.x0) / hx(), v = (p.y - window.y0) / hy();
    int i = std::clamp(static_cast<int>(std::floor(u)), 0, n1 - 1);
    int j = std::clamp(static_cast<int>(std::floor(v)), 0, n2 - 1);
    double fu = u - i, fv = v - j;
    Vec2 e00 = at(i, j), e10 = at(i + 1, j), e01 = at(i, j + 1), e11 = at(i + 1, j + 1);
    return (1 - fu) * (1 - fv) * e00 + fu * (1 - fv) * e10 + (1 - fu) * fv * e01 + fu * fv * e11;
}

DeformationField DeformationField::from_function(const Window& w, int n1, int n2, Vec2 xt,
                                                 const std::function<Vec2(Vec2)>& f) {
    DeformationField d;
    d.window = w;
    d.n1 = n1;
    d.n2 = n2;
    d.xt = xt;
    d.eta.resize(static_cast<size_t>(n1 + 1) * (n2 + 1));
    d.patch_weight.assign(d.eta.size(), 0.0);
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            Vec2 e = f(d.node(i, j));
            d.eta[static_cast<size_t>(i) * (n2 + 1) + j] = e;
            d.eta_max = std::max(d.eta_max, norm(e));
        }
    return d;
}

namespace {

struct CompLocal {
    double g;
    Vec2 grad;
    double gn;
    double h11, h12, h22;
    int s;
    bool curved;
};

double wrap_angle(double t) {
    t = std::fmod(t + kPi, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    return t - kPi;
}

// Largest Hessian eigenvalue magnitude whose sign lets the real part of g reach
// Required lower bound on s*n.e for each component: sin_min within distance
// full of the trace, fading to no constraint over a further band.
double threshold(const CompLocal& c, double full, double band, double sin_min) {
    double h = 1.0 - smoothstep((std::abs(c.g) / c.gn - full) / band);
    return -1.0 + h * (1.0 + sin_min);
}

struct Arc {
    double centre;
    double half_width;
};

// Intersection of arcs as disjoint intervals of angle relative to target, in
// (-pi, pi]. Pieces joined across +-pi are merged into one interval that
// extends past pi.
std::vector<std::pair<double, double>> arc_intersection(const std::vector<Arc>& arcs, double target) {
    std::vector<std::pair<double, double>> set{{-kPi, kPi}};
    for (const auto& a : arcs) {
        if (a.half_width >= kPi) continue;
        double c = wrap_angle(a.centre - target);
        std::vector<std::pair<double, double>> iv;
        double lo = c - a.half_width, hi = c + a.half_width;
        if (lo < -kPi) {
            iv.push_back({-kPi, hi});
            iv.push_back({lo + 2 * kPi, kPi});
        } else if (hi > kPi) {
            iv.push_back({lo, kPi});
            iv.push_back({-kPi, hi - 2 * kPi});
        } else {
            iv.push_back({lo, hi});
        }
        std::vector<std::pair<double, double>> next;
        for (const auto& x : set)
            for (const auto& y : iv) {
                double l = std::max(x.first, y.first), h = std::min(x.second, y.second);
                if (l <= h) next.push_back({l, h});
            }
        set = std::move(next);
        if (set.empty()) break;
    }
    std::sort(set.begin(), set.end());
    if (set.size() >= 2 && set.front().first <= -kPi && set.back().second >= kPi) {
        set.back().second = set.front().second + 2 * kPi;
        set.erase(set.begin());
    }
    return set;
}

// Angle in the set closest to 0 (relative to target).
double closest_to_zero(const std::vector<std::pair<double, double>>& set) {
    double best = 0.0, bestd = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : set) {
        if (lo <= 0.0 && hi >= 0.0) return 0.0;
        for (double t : {lo, hi}) {
            double d = std::abs(wrap_angle(t));
            if (d < bestd) {
                bestd = d;
                best = t;
            }
        }
    }
    return best;
}

// Rest direction: as close to -xt as the trace constraints allow while keeping
// -xt.u >= decay_min. The optional parts of the constraints (normal component
// sin_lift above sin_min) is relaxed continuously until the admissible
// directions form a single arc. Returns false if even the bare constraints
// conflict with decay.
bool rest_direction(const std::vector<CompLocal>& cs, Vec2 xt, double full, double band, double sin_min,
                    double sin_lift, double decay_min, Vec2& out) {
    const double target = std::atan2(-xt.y, -xt.x);
    auto set_for = [&](double tau, bool with_decay) {
        std::vector<Arc> arcs;
        if (with_decay) arcs.push_back({target, std::acos(decay_min)});
        for (const auto& c : cs) {
            double th = threshold(c, full, band, sin_min + tau * (sin_lift - sin_min));
            if (th <= -1.0) continue;
            arcs.push_back({std::atan2(c.s * c.grad.y, c.s * c.grad.x), std::acos(std::min(1.0, th))});
        }
        return arc_intersection(arcs, target);
    };
    auto emit = [&](double rel) { out = {std::cos(target + rel), std::sin(target + rel)}; };
    auto set = set_for(1.0, true);
    if (set.size() == 1) {
        emit(closest_to_zero(set));
        return true;
    }
    set = set_for(0.0, true);
    if (set.size() == 1) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 30; ++it) {
            double mid = 0.5 * (lo + hi);
            auto sm = set_for(mid, true);
            if (sm.size() == 1) {
                lo = mid;
                set = std::move(sm);
            } else {
                hi = mid;
            }
        }
        emit(closest_to_zero(set));
        return true;
    }
    if (!set.empty()) {
        emit(closest_to_zero(set));
        return true;
    }
    set = set_for(0.0, false);
    if (!set.empty()) {
        emit(closest_to_zero(set));
        return false;
    }
    const CompLocal* near = &cs.front();
    for (const auto& c : cs)
        if (std::abs(c.g) / c.gn < std::abs(near->g) / near->gn) near = &c;
    out = (near->s / near->gn) * near->grad;
    return false;
}

// Largest L-Lipschitz function below d on the grid (two chamfer sweeps).
void lipschitz_envelope(std::vector<double>& d, int n1, int n2, double hx, double hy, double L) {
    const double sx = L * hx, sy = L * hy, sd = L * std::hypot(hx, hy);
    auto at = [&](int i, int j) -> double& { return d[static_cast<size_t>(i) * (n2 + 1) + j]; };
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            double& v = at(i, j);
            if (i > 0) v = std::min(v, at(i - 1, j) + sx);
            if (j > 0) v = std::min(v, at(i, j - 1) + sy);
            if (i > 0 && j > 0) v = std::min(v, at(i - 1, j - 1) + sd);
            if (i > 0 && j < n2) v = std::min(v, at(i - 1, j + 1) + sd);
        }
    for (int i = n1; i >= 0; --i)
        for (int j = n2; j >= 0; --j) {
            double& v = at(i, j);
            if (i < n1) v = std::min(v, at(i + 1, j) + sx);
            if (j < n2) v = std::min(v, at(i, j + 1) + sy);
            if (i < n1 && j < n2) v = std::min(v, at(i + 1, j + 1) + sd);
            if (i < n1 && j > 0) v = std::min(v, at(i + 1, j - 1) + sd);
        }
}

// Whether eta keeps a curved component off its cut for every flattening factor,
// with a safety factor on the real-part reach and |g| reduced by one cell.
bool clear_of_cut(const CompLocal& c, Vec2 eta, double a0, double safety, double cell) {
    double en = norm(eta);
    if (en == 0.0) return true;
    if (c.s * dot(c.grad, eta) >= a0 * c.gn * en) return true;
    double q = c.h11 * eta.x * eta.x + 2 * c.h12 * eta.x * eta.y + c.h22 * eta.y * eta.y;
    if (c.g * q <= 0.0) return true;
    double reach = std::max(0.0, std::abs(c.g) - c.gn * cell);
    return 0.5 * std::abs(q) < reach * (1.0 - safety);
}

// Largest mu <= mu0 such that base + mu'*u is clear for every mu' in [0, mu].
double clear_magnitude(const std::vector<CompLocal>& cs, Vec2 base, Vec2 u, double mu0, double a0, double safety,
                       double cell) {
    auto ok = [&](double mu) {
        for (const auto& c : cs)
            if (c.curved && !clear_of_cut(c, base + mu * u, a0, safety, cell)) return false;
        return true;
    };
    constexpr int kSteps = 48;
    double lo = 0.0;
    for (int k = 1; k <= kSteps; ++k) {
        double mu = mu0 * k / kSteps;
        if (!ok(mu)) {
            double hi = mu;
            for (int it = 0; it < 20; ++it) {
                double mid = 0.5 * (lo + hi);
                (ok(mid) ? lo : hi) = mid;
            }
            return lo;
        }
        lo = mu;
    }
    return mu0;
}

// Whether xi + i e eta, 0 < e <= 1, takes c across the cut of its bridge s.
bool crosses_cut(const SingularComponent& c, int s, Vec2 xi, Vec2 eta, int samples) {
    cplx prev = c.value(xi.x, xi.y);
    for (int q = 1; q <= samples; ++q) {
        double e = static_cast<double>(q) / samples;
        cplx cur = c.value(cplx(xi.x, e * eta.x), cplx(xi.y, e * eta.y));
        if ((prev.real() > 0) != (cur.real() > 0) || cur.real() == 0.0) {
            double den = prev.real() - cur.real();
            double t = den != 0.0 ? prev.real() / den : 1.0;
            double im = prev.imag() + t * (cur.imag() - prev.imag());
            if (s * im <= 0.0 && !(q == 1 && prev.real() == 0.0 && s * cur.imag() > 0)) return true;
        }
        prev = cur;
    }
    return false;
}

std::vector<bool> branched_components(const WaveFunctionModel& m) {
    std::vector<bool> out(m.components.size(), false);
    for (const auto& t : m.terms)
        for (const auto& fc : t.factors)
            if (fc.mu != std::round(fc.mu)) out[static_cast<size_t>(m.index_of(fc.component_id))] = true;
    return out;
}

}  // namespace

DeformationField build_global_field(const WaveFunctionModel& m, const BridgeConfig& bridges, Vec2 xt,
                                    const std::vector<SpecialPoint>& points, const Window& w, int n1, int n2,
                                    const SurfaceParams& prm) {
    if (n1 < 2 || n2 < 2) throw Error(ErrorKind::Precondition, "grid too small");
    DeformationField f;
    f.window = w;
    f.n1 = n1;
    f.n2 = n2;
    f.xt = xt;
    f.eta_max = prm.eta_max;
    const size_t nn = static_cast<size_t>(n1 + 1) * (n2 + 1);
    f.eta.assign(nn, Vec2{});
    f.patch_weight.assign(nn, 0.0);

    std::vector<bool> curved;
    for (const auto& c : m.components) curved.push_back(!is_linear(c));
    const bool has_curved = std::find(curved.begin(), curved.end(), true) != curved.end();
    std::vector<Vec2> contributing, special;
    for (const auto& p : points) {
        special.push_back(p.where);
        if (!p.contributing) continue;
        contributing.push_back(p.where);
    }

    // Patches, shrunk until their supports hold no foreign trace and do not overlap.
    for (const auto& p : points) {
        if (!p.contributing) continue;
        double rho = prm.rho;
        for (int attempt = 0;; ++attempt) {
            LocalPatch lp = p.kind == PointKind::Sos
                                ? sos_patch(m.component(p.comp1), p.where, p.s1, rho, prm.sos_beta, prm.floor, prm.blend)
                                : crossing_patch(m.component(p.comp1), m.component(p.comp2), p.where, p.s1, p.s2, xt, rho,
                                                 prm.beta, prm.floor, prm.blend);
            double R = lp.support_radius();
            bool ok = true;
            for (const auto& c : m.components) {
                if (c.id == lp.c1.id || (lp.kind == PatchKind::Crossing && c.id == lp.c2.id)) continue;
                int sg = 0;
                for (int a = 0; a < 24 && ok; ++a)
                    for (int r = 0; r <= 6 && ok; ++r) {
                        Vec2 q = lp.center + (R * r / 6.0) * Vec2{std::cos(2 * kPi * a / 24), std::sin(2 * kPi * a / 24)};
                        if (lp.weight(q) <= 0.0) continue;
                        int v = sign_of(c.at(q).value.real());
                        if (sg == 0) sg = v;
                        else if (v != sg) ok = false;
                    }
            }
            for (Vec2 o : contributing)
                if (norm(o - p.where) > 0 && norm(o - p.where) < R) ok = false;
            if (ok) {
                f.patches.push_back(std::move(lp));
                break;
            }
            if (attempt >= 10)
                throw Error(ErrorKind::Separation, fmt::format("patch at ({}, {}) cannot be separated", p.where.x, p.where.y));
            rho *= 0.8;
        }
    }

    std::vector<double> radius;
    for (const auto& lp : f.patches) radius.push_back(lp.support_radius());

    const double cell = std::hypot(f.hx(), f.hy());
    std::vector<Vec2> patch_part(nn), dir(nn);
    std::vector<double> mag(nn, std::numeric_limits<double>::infinity());
    for (int i = 0; i <= n1; ++i) {
        for (int j = 0; j <= n2; ++j) {
            Vec2 xi = f.node(i, j);
            const size_t idx = static_cast<size_t>(i) * (n2 + 1) + j;
            double wsum = 0.0;
            Vec2 pe{};
            for (size_t k = 0; k < f.patches.size(); ++k) {
                if (norm(xi - f.patches[k].center) > radius[k]) continue;
                double wk = f.patches[k].weight(xi);
                if (wk <= 0.0) continue;
                wsum += wk;
                pe = pe + wk * f.patches[k].eta(xi);
            }
            if (wsum >= 1.0) {
                patch_part[idx] = (1.0 / wsum) * pe;
                f.patch_weight[idx] = 1.0;
                continue;
            }
            patch_part[idx] = pe;
            f.patch_weight[idx] = wsum;
            std::vector<CompLocal> cs;
            cs.reserve(m.components.size());
            for (size_t k = 0; k < m.components.size(); ++k) {
                const auto& c = m.components[k];
                Jet jt = c.at(xi);
                Vec2 gr{jt.d1.real(), jt.d2.real()};
                double gn = norm(gr);
                if (gn <= 1e-14) continue;
                cs.push_back({jt.value.real(), gr, gn, jt.h11.real(), jt.h12.real(), jt.h22.real(), bridges.at(c.id),
                              curved[k]});
            }
            double d = std::numeric_limits<double>::infinity();
            for (Vec2 c : (contributing.empty() ? special : contributing)) d = std::min(d, norm(xi - c));
            double D = prm.decay_floor + (std::isfinite(d) ? prm.decay_gain * std::pow(d, prm.decay_power) : 0.0);
            D = std::min(D, prm.eta_max);
            Vec2 u = (-1.0 / norm(xt)) * xt;
            if (!cs.empty()) {
                double sin_lift = std::clamp(prm.lift / D, prm.margin, 0.9);
                if (!rest_direction(cs, xt, 2 * cell, prm.band, prm.margin, sin_lift, prm.margin, u)) ++f.weak_nodes;
            }
            if (has_curved)
                D = clear_magnitude(cs, pe, (1.0 - wsum) * u, D, 0.5 * prm.margin, 0.5, cell);
            dir[idx] = u;
            mag[idx] = D;
        }
    }
    lipschitz_envelope(mag, n1, n2, f.hx(), f.hy(), prm.slope_limit);

    std::vector<double> taper(nn, 1.0);
    if (prm.taper > 0.0)
        for (int i = 0; i <= n1; ++i)
            for (int j = 0; j <= n2; ++j) {
                Vec2 xi = f.node(i, j);
                double dist = std::min({xi.x - w.x0, w.x1 - xi.x, xi.y - w.y0, w.y1 - xi.y});
                taper[static_cast<size_t>(i) * (n2 + 1) + j] = smoothstep(dist / prm.taper);
            }
    auto assemble = [&](size_t idx) {
        double wt = f.patch_weight[idx];
        Vec2 e = wt >= 1.0 ? patch_part[idx] : patch_part[idx] + ((1.0 - wt) * mag[idx]) * dir[idx];
        return taper[idx] * e;
    };
    for (size_t idx = 0; idx < nn; ++idx) f.eta[idx] = assemble(idx);

    // Corners that clear the cut one by one can still cross it at the cell centre,
    // where eta is averaged. Shrink the rest field around such cells.
    if (has_curved) {
        auto branched = branched_components(m);
        std::vector<size_t> check;
        for (size_t k = 0; k < m.components.size(); ++k)
            if (curved[k] && branched[k]) check.push_back(k);
        std::vector<char> dirty(static_cast<size_t>(n1) * n2, 1);
        for (int pass = 0; pass < 80 && !check.empty(); ++pass) {
            std::vector<size_t> shrink;
            for (int i = 0; i < n1; ++i)
                for (int j = 0; j < n2; ++j) {
                    if (!dirty[static_cast<size_t>(i) * n2 + j]) continue;
                    dirty[static_cast<size_t>(i) * n2 + j] = 0;
                    Vec2 xc = f.node(i, j) + Vec2{0.5 * f.hx(), 0.5 * f.hy()};
                    Vec2 ec = 0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) + f.at(i + 1, j + 1));
                    bool bad = false;
                    for (size_t k : check)
                        if (crosses_cut(m.components[k], bridges.at(m.components[k].id), xc, ec, 64)) bad = true;
                    if (!bad) continue;
                    for (int di = 0; di < 2; ++di)
                        for (int dj = 0; dj < 2; ++dj) shrink.push_back(static_cast<size_t>(i + di) * (n2 + 1) + j + dj);
                }
            if (shrink.empty()) break;
            std::vector<double> before = mag;
            for (size_t idx : shrink) mag[idx] = 0.8 * before[idx];
            lipschitz_envelope(mag, n1, n2, f.hx(), f.hy(), prm.slope_limit);
            for (int i = 0; i <= n1; ++i)
                for (int j = 0; j <= n2; ++j) {
                    size_t idx = static_cast<size_t>(i) * (n2 + 1) + j;
                    if (mag[idx] == before[idx]) continue;
                    f.eta[idx] = assemble(idx);
                    for (int di = -1; di <= 0; ++di)
                        for (int dj = -1; dj <= 0; ++dj)
                            if (i + di >= 0 && i + di < n1 && j + dj >= 0 && j + dj < n2)
                                dirty[static_cast<size_t>(i + di) * n2 + j + dj] = 1;
                }
        }
    }
    return f;
}

FieldReport verify_field(const DeformationField& f, const WaveFunctionModel& m, const BridgeConfig& bridges,
                         double clearance_tol) {
    FieldReport rep;
    rep.min_clearance = std::numeric_limits<double>::infinity();
    rep.max_decay_off_patch = -std::numeric_limits<double>::infinity();
    const auto branchy = branched_components(m);

    const double eps_set[4] = {0.25, 0.5, 0.75, 1.0};
    constexpr int kPath = 32;
    auto check_point = [&](Vec2 xi, Vec2 eta) {
        for (size_t k = 0; k < m.components.size(); ++k) {
            const auto& c = m.components[k];
            for (double e : eps_set) {
                double cl = std::abs(c.value(cplx(xi.x, e * eta.x), cplx(xi.y, e * eta.y)));
                rep.min_clearance = std::min(rep.min_clearance, cl);
                if (!(cl >= clearance_tol)) ++rep.clearance_failures;
            }
            if (!branchy[k]) continue;
            if (crosses_cut(c, bridges.at(c.id), xi, eta, kPath) && rep.cut_crossings++ == 0) rep.first_cut_at = xi;
        }
    };

    for (int i = 0; i <= f.n1; ++i)
        for (int j = 0; j <= f.n2; ++j) {
            Vec2 xi = f.node(i, j), eta = f.at(i, j);
            rep.max_abs_eta = std::max(rep.max_abs_eta, norm(eta));
            check_point(xi, eta);
            if (i < f.n1 && j < f.n2) {
                Vec2 ec = 0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) + f.at(i + 1, j + 1));
                check_point(xi + Vec2{0.5 * f.hx(), 0.5 * f.hy()}, ec);
            }
            size_t idx = static_cast<size_t>(i) * (f.n2 + 1) + j;
            if (f.patch_weight.empty() || f.patch_weight[idx] == 0.0) {
                double dcy = dot(f.xt, eta);
                if (dcy > rep.max_decay_off_patch) {
                    rep.max_decay_off_patch = dcy;
                    rep.worst_decay_at = xi;
                }
                if (dcy > -1e-6 * f.eta_max) ++rep.decay_failures;
            }
        }
    if (rep.max_abs_eta > f.eta_max * (1 + 1e-12)) rep.bounded = false;

    double cell = 2.0 * std::max(f.hx(), f.hy());
    for (const auto& c : m.components) {
        RealTrace t = trace_real_curves(c, f.window, cell);
        int s = bridges.at(c.id);
        for (const auto& pl : t.polylines)
            for (const auto& v : pl.vertices) {
                if (!f.window.contains(v.p, -1e-9)) continue;
                ++rep.bridge_checked;
                Vec2 n{v.a, v.b};
                double d = dot(n, f.interpolate(v.p)) / norm(n);
                if (!(s * d > 1e-12)) ++rep.bridge_failures;
            }
    }

    if (rep.clearance_failures) rep.messages.push_back(fmt::format("{} clearance failures (min {:.3g})", rep.clearance_failures, rep.min_clearance));
    if (rep.cut_crossings) rep.messages.push_back(fmt::format("{} branch cut crossings (first near ({:.4g}, {:.4g}))", rep.cut_crossings,
                                                                 rep.first_cut_at.x, rep.first_cut_at.y));
    if (rep.decay_failures) rep.messages.push_back(fmt::format("{} nodes without exterior decay (max xt.eta {:.3g} at ({:.4g}, {:.4g}))",
                                                                 rep.decay_failures, rep.max_decay_off_patch, rep.worst_decay_at.x,
                                                                 rep.worst_decay_at.y));
    if (rep.bridge_failures) rep.messages.push_back(fmt::format("{} of {} trace points with the wrong bridge side", rep.bridge_failures, rep.bridge_checked));
    if (!rep.bounded) rep.messages.push_back(fmt::format("|eta| reaches {:.3g} > {:.3g}", rep.max_abs_eta, f.eta_max));
    rep.pass = rep.messages.empty();
    return rep;
}

void write_field_csv(std::ostream& os, const DeformationField& f, int stride) {
    os << "x,y,eta1,eta2\n";
    for (int i = 0; i <= f.n1; i += stride)
        for (int j = 0; j <= f.n2; j += stride) {
            Vec2 p = f.node(i, j), e = f.at(i, j);
            os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", p.x, p.y, e.x, e.y);
        }
}

void write_decay_heatmap_csv(std::ostream& os, const DeformationField& f, int stride) {
    os << "x,y,xt_dot_eta\n";
    for (int i = 0; i <= f.n1; i += stride)
        for (int j = 0; j <= f.n2; j += stride) {
            Vec2 p = f.node(i, j);
            os << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.x, p.y, dot(f.xt, f.at(i, j)));
        }
}

}  // namespace farfield
