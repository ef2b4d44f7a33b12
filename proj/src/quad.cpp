#include "farfield/quad.hpp"

#include <ostream>
#include <vector>

#include <fmt/format.h>

namespace farfield {

namespace {

struct LevelResult {
    cplx value;
    double max_abs = 0.0;
    double edge_max = 0.0;
};

cplx pairwise_sum(const std::vector<cplx>& v, size_t lo, size_t hi) {
    if (hi - lo == 1) return v[lo];
    if (hi == lo) return 0.0;
    size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

LevelResult integrate_level(const WaveFunctionModel& m, const BridgeConfig& bridges, const DeformationField& f, Vec2 x,
                            const QuadConfig& cfg, int step) {
    const int nc1 = f.n1 / step, nc2 = f.n2 / step;
    const double dx = f.hx() * step, dy = f.hy() * step;
    const double eps = cfg.eps_scale;
    std::vector<double> fre(nc1), fim(nc1), e1(nc1), e2(nc1), m11(nc1), m12(nc1), m21(nc1), m22(nc1), pre(nc1), pim(nc1);
    for (int i = 0; i < nc1; ++i) {
        double xc = f.window.x0 + (i + 0.5) * dx;
        pre[i] = std::cos(-x.x * xc);
        pim[i] = std::sin(-x.x * xc);
    }
    std::vector<cplx> rows(nc2);
    LevelResult out;
    for (int j = 0; j < nc2; ++j) {
        const double yc = f.window.y0 + (j + 0.5) * dy;
        for (int i = 0; i < nc1; ++i) {
            Vec2 a = f.at(i * step, j * step), b = f.at((i + 1) * step, j * step);
            Vec2 c = f.at(i * step, (j + 1) * step), d = f.at((i + 1) * step, (j + 1) * step);
            Vec2 ec = (0.25 * eps) * (a + b + c + d);
            Vec2 dxi = (0.5 * eps / dx) * ((b + d) - (a + c));
            Vec2 dyi = (0.5 * eps / dy) * ((c + d) - (a + b));
            double xc = f.window.x0 + (i + 0.5) * dx;
            cplx F;
            try {
                F = evaluate_model(m, bridges, cplx(xc, ec.x), cplx(yc, ec.y), cfg.kappa);
            } catch (const Error& err) {
                throw Error(err.kind(), fmt::format("{} (cell centre {}, {})", err.what(), xc, yc));
            }
            fre[i] = F.real();
            fim[i] = F.imag();
            e1[i] = ec.x;
            e2[i] = ec.y;
            m11[i] = dxi.x;
            m21[i] = dxi.y;
            m12[i] = dyi.x;
            m22[i] = dyi.y;
            double wabs = std::abs(cplx(1.0 - dxi.x * dyi.y + dyi.x * dxi.y, dxi.x + dyi.y));
            double mag = std::abs(F) * wabs * std::exp(dot(x, ec));
            out.max_abs = std::max(out.max_abs, mag);
            if (i == 0 || j == 0 || i == nc1 - 1 || j == nc2 - 1) out.edge_max = std::max(out.edge_max, mag);
        }
        CellRow row{fre.data(), fim.data(), e1.data(), e2.data(), m11.data(), m12.data(),
                    m21.data(), m22.data(), pre.data(), pim.data(), static_cast<size_t>(nc1)};
        rows[j] = row_sum(row, x.x, x.y, cfg.kernel) * std::exp(cplx(0.0, -x.y * yc));
    }
    out.value = pairwise_sum(rows, 0, rows.size()) * (dx * dy);
    return out;
}

}  // namespace

QuadResult integrate_on_surface(const WaveFunctionModel& m, const BridgeConfig& bridges, const DeformationField& f,
                                Vec2 x, const QuadConfig& cfg) {
    if (f.n1 < 1 || f.n2 < 1) throw Error(ErrorKind::Precondition, "empty deformation field");
    LevelResult fine = integrate_level(m, bridges, f, x, cfg, 1);
    QuadResult r;
    r.value = fine.value;
    r.max_abs = fine.max_abs;
    r.edge_max = fine.edge_max;
    if (cfg.coarse_estimate && f.n1 % 2 == 0 && f.n2 % 2 == 0) {
        LevelResult coarse = integrate_level(m, bridges, f, x, cfg, 2);
        r.error_estimate = std::abs(fine.value - coarse.value) / 3.0;
    }
    r.tail_warning = r.edge_max > 1e-3 * r.max_abs;
    return r;
}

QuadResult integrate_reference(const WaveFunctionModel& m, const BridgeConfig& bridges, const Window& w, int n1, int n2,
                               Vec2 x, double kappa, KernelKind kernel) {
    if (!(kappa > 0.0)) throw Error(ErrorKind::Precondition, "reference integral needs kappa > 0");
    DeformationField flat = DeformationField::from_function(w, n1, n2, {1, 0}, [](Vec2) { return Vec2{}; });
    QuadConfig cfg;
    cfg.kappa = kappa;
    cfg.kernel = kernel;
    return integrate_on_surface(m, bridges, flat, x, cfg);
}

void write_integrand_heatmap(std::ostream& os, const WaveFunctionModel& m, const BridgeConfig& bridges,
                             const DeformationField& f, Vec2 x, double eps, int stride) {
    os << "x,y,log10_abs_integrand\n";
    for (int i = 0; i + stride <= f.n1; i += stride)
        for (int j = 0; j + stride <= f.n2; j += stride) {
            Vec2 a = f.at(i, j), b = f.at(i + 1, j), c = f.at(i, j + 1), d = f.at(i + 1, j + 1);
            Vec2 ec = (0.25 * eps) * (a + b + c + d);
            Vec2 dxi = (0.5 * eps / f.hx()) * ((b + d) - (a + c));
            Vec2 dyi = (0.5 * eps / f.hy()) * ((c + d) - (a + b));
            Vec2 p = f.node(i, j) + Vec2{0.5 * f.hx(), 0.5 * f.hy()};
            cplx F = evaluate_model(m, bridges, cplx(p.x, ec.x), cplx(p.y, ec.y), 0.0);
            double wabs = std::abs(cplx(1.0 - dxi.x * dyi.y + dyi.x * dxi.y, dxi.x + dyi.y));
            double v = std::abs(F) * wabs * std::exp(dot(x, ec));
            os << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.x, p.y, v > 0 ? std::log10(v) : -300.0);
        }
}

}  // namespace farfield
