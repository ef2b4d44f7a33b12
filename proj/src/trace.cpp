#include "farfield/trace.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

namespace farfield {

size_t RealTrace::vertex_count() const {
    size_t n = 0;
    for (const auto& p : polylines) n += p.vertices.size();
    return n;
}

Vec2 polish_onto_trace(const SingularComponent& c, Vec2 p) {
    for (int it = 0; it < 40; ++it) {
        Jet j = c.at(p);
        double f = j.value.real();
        double gx = j.d1.real(), gy = j.d2.real();
        double g2 = gx * gx + gy * gy;
        if (g2 <= 1e-30) break;
        Vec2 step{f * gx / g2, f * gy / g2};
        p = p - step;
        if (norm(step) <= 1e-16 * (1.0 + norm(p))) break;
    }
    return p;
}

LocalFrame frame_at(const SingularComponent& c, Vec2 p) {
    Jet j = c.at(p);
    if (std::abs(j.value) > kTraceTol)
        throw Error(ErrorKind::Precondition,
                    fmt::format("point ({}, {}) is not on the trace of '{}' (|g| = {:.3g})", p.x, p.y, c.id, std::abs(j.value)));
    LocalFrame fr;
    fr.a = j.d1.real();
    fr.b = j.d2.real();
    double n2 = fr.a * fr.a + fr.b * fr.b;
    if (n2 <= 1e-20)
        throw Error(ErrorKind::DegenerateGradient, fmt::format("'{}' at ({}, {})", c.id, p.x, p.y));
    fr.grad_norm = std::sqrt(n2);
    fr.n = {fr.a / fr.grad_norm, fr.b / fr.grad_norm};
    fr.t = {-fr.b / fr.grad_norm, fr.a / fr.grad_norm};
    return fr;
}

double alpha_at(const SingularComponent& c, Vec2 p) {
    LocalFrame fr = frame_at(c, p);
    Jet j = c.at(p);
    double at = 0.5 * j.h11.real(), bt = 0.5 * j.h22.real(), gt = j.h12.real();
    double a = fr.a, b = fr.b;
    double n2 = a * a + b * b;
    return -(b * b * at + a * a * bt - a * b * gt) / (n2 * n2);
}

namespace {

struct Segment {
    long e0, e1;
};

}  // namespace

RealTrace trace_real_curves(const SingularComponent& c, const Window& w, double cell_size) {
    if (!(cell_size > 0.0)) throw Error(ErrorKind::Precondition, "cell size must be positive");
    const long nx = std::max<long>(1, std::lround(std::ceil((w.x1 - w.x0) / cell_size)));
    const long ny = std::max<long>(1, std::lround(std::ceil((w.y1 - w.y0) / cell_size)));
    const double hx = (w.x1 - w.x0) / static_cast<double>(nx);
    const double hy = (w.y1 - w.y0) / static_cast<double>(ny);
    auto node = [&](long i, long j) { return Vec2{w.x0 + hx * static_cast<double>(i), w.y0 + hy * static_cast<double>(j)}; };

    std::vector<double> f(static_cast<size_t>((nx + 1) * (ny + 1)));
    auto F = [&](long i, long j) -> double& { return f[static_cast<size_t>(i * (ny + 1) + j)]; };
    for (long i = 0; i <= nx; ++i)
        for (long j = 0; j <= ny; ++j) F(i, j) = c.at(node(i, j)).value.real();

    // Edge ids: horizontal edges (i,j)-(i+1,j) first, then vertical (i,j)-(i,j+1).
    const long nh = nx * (ny + 1);
    auto hid = [&](long i, long j) { return j * nx + i; };
    auto vid = [&](long i, long j) { return nh + i * ny + j; };
    auto pos = [](double v) { return v > 0.0; };

    std::unordered_map<long, Vec2> points;
    auto edge_point = [&](long id, Vec2 p0, Vec2 p1, double f0, double f1) {
        if (points.count(id)) return;
        double t = f0 / (f0 - f1);
        points[id] = polish_onto_trace(c, p0 + t * (p1 - p0));
    };

    std::vector<Segment> segs;
    for (long i = 0; i < nx; ++i) {
        for (long j = 0; j < ny; ++j) {
            double f00 = F(i, j), f10 = F(i + 1, j), f11 = F(i + 1, j + 1), f01 = F(i, j + 1);
            long eb = -1, et = -1, el = -1, er = -1;
            if (pos(f00) != pos(f10)) { eb = hid(i, j); edge_point(eb, node(i, j), node(i + 1, j), f00, f10); }
            if (pos(f01) != pos(f11)) { et = hid(i, j + 1); edge_point(et, node(i, j + 1), node(i + 1, j + 1), f01, f11); }
            if (pos(f00) != pos(f01)) { el = vid(i, j); edge_point(el, node(i, j), node(i, j + 1), f00, f01); }
            if (pos(f10) != pos(f11)) { er = vid(i + 1, j); edge_point(er, node(i + 1, j), node(i + 1, j + 1), f10, f11); }
            std::vector<long> cut;
            for (long e : {eb, er, et, el})
                if (e >= 0) cut.push_back(e);
            if (cut.size() == 2) {
                segs.push_back({cut[0], cut[1]});
            } else if (cut.size() == 4) {
                double fc = c.at(node(i, j) + Vec2{0.5 * hx, 0.5 * hy}).value.real();
                if (pos(fc) == pos(f00)) {
                    segs.push_back({eb, er});
                    segs.push_back({et, el});
                } else {
                    segs.push_back({eb, el});
                    segs.push_back({et, er});
                }
            }
        }
    }

    std::unordered_map<long, std::vector<size_t>> adj;
    for (size_t k = 0; k < segs.size(); ++k) {
        adj[segs[k].e0].push_back(k);
        adj[segs[k].e1].push_back(k);
    }
    std::vector<char> used(segs.size(), 0);

    auto walk = [&](long start, size_t first_seg) {
        std::vector<long> chain{start};
        long cur = start;
        size_t s = first_seg;
        for (;;) {
            used[s] = 1;
            long next = segs[s].e0 == cur ? segs[s].e1 : segs[s].e0;
            chain.push_back(next);
            cur = next;
            size_t nxt = segs.size();
            for (size_t k : adj[cur])
                if (!used[k]) { nxt = k; break; }
            if (nxt == segs.size()) break;
            s = nxt;
        }
        return chain;
    };

    // Deterministic start order: lowest edge ids first, open chains before loops.
    std::vector<long> ids;
    ids.reserve(adj.size());
    for (const auto& kv : adj) ids.push_back(kv.first);
    std::sort(ids.begin(), ids.end());

    RealTrace out;
    out.component_id = c.id;
    auto emit = [&](const std::vector<long>& chain, bool closed) {
        Polyline pl;
        pl.closed = closed;
        for (long e : chain) {
            Vec2 p = points.at(e);
            if (!pl.vertices.empty() && norm(p - pl.vertices.back().p) < 1e-14) continue;
            Jet jt = c.at(p);
            pl.vertices.push_back({p, jt.d1.real(), jt.d2.real()});
        }
        if (closed && pl.vertices.size() > 1 && norm(pl.vertices.front().p - pl.vertices.back().p) < 1e-14)
            pl.vertices.pop_back();
        if (pl.vertices.size() < 2) return;
        double orient = 0.0;
        for (size_t k = 0; k + 1 < pl.vertices.size(); ++k) {
            const auto& v = pl.vertices[k];
            orient += dot(pl.vertices[k + 1].p - v.p, Vec2{-v.b, v.a});
        }
        if (orient < 0.0) std::reverse(pl.vertices.begin(), pl.vertices.end());
        out.polylines.push_back(std::move(pl));
    };
    for (long id : ids) {
        const auto& a = adj[id];
        if (a.size() == 1 && !used[a[0]]) emit(walk(id, a[0]), false);
    }
    for (long id : ids) {
        for (size_t k : adj[id]) {
            if (used[k]) continue;
            auto chain = walk(id, k);
            emit(chain, chain.front() == chain.back());
        }
    }
    return out;
}

RealPropertyReport check_real_property(const SingularComponent& c, const Window& w, int samples) {
    RealPropertyReport rep;
    int m = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(samples, 4))))));
    auto fail = [&](const char* what, Vec2 p, double v) {
        if (rep.pass || v > rep.worst) {
            if (rep.pass) rep.failed_condition = what;
            rep.pass = false;
            rep.where = p;
            rep.worst = v;
        }
    };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Vec2 p{w.x0 + (w.x1 - w.x0) * i / (m - 1), w.y0 + (w.y1 - w.y0) * j / (m - 1)};
            Jet jt = c.at(p);
            auto check = [&](const char* what, double bad, cplx ref) {
                if (std::abs(bad) > 1e-12 * std::max(1.0, std::abs(ref))) fail(what, p, std::abs(bad));
            };
            check("Im g = 0", jt.value.imag(), jt.value);
            check("Im dg/dxi1 = 0", jt.d1.imag(), jt.d1);
            check("Im dg/dxi2 = 0", jt.d2.imag(), jt.d2);
            check("Re dg/dkappa = 0", jt.dk.real(), jt.dk);
        }
    }
    if (!rep.pass) return rep;
    double cell = std::max(w.x1 - w.x0, w.y1 - w.y0) / 64.0;
    RealTrace t = trace_real_curves(c, w, cell);
    for (const auto& pl : t.polylines)
        for (const auto& v : pl.vertices)
            if (v.a * v.a + v.b * v.b <= 1e-20) fail("a^2 + b^2 != 0 on the trace", v.p, 0.0);
    return rep;
}

void write_trace_csv(std::ostream& os, const RealTrace& t) {
    os << "x,y,a,b\n";
    for (const auto& pl : t.polylines)
        for (const auto& v : pl.vertices) os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", v.p.x, v.p.y, v.a, v.b);
}

}  // namespace farfield
