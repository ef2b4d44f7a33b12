#include "farfield/bridge.hpp"

#include <fmt/format.h>

namespace farfield {

const char* bypass_side_name(BypassSide b) { return b == BypassSide::Above ? "above" : "below"; }

int determine_bridge(const SingularComponent& c, Vec2 p) {
    LocalFrame fr = frame_at(c, p);
    cplx dk = c.at(p).dk;
    if (std::abs(dk.real()) > 1e-12 * std::max(1.0, std::abs(dk)))
        throw Error(ErrorKind::Precondition, fmt::format("dg/dkappa of '{}' is not purely imaginary", c.id));
    if (std::abs(dk.imag()) <= 1e-14)
        throw Error(ErrorKind::AmbiguousBridge, fmt::format("Im dg/dkappa = 0 for '{}' at ({}, {})", c.id, p.x, p.y));
    // The root moves off the real axis by -kappa*Im(dg/dkappa)/g_z in the transverse
    // variable z; the surface passes on the other side of it.
    bool use_xi1 = std::abs(fr.a) >= 0.1 * std::abs(fr.b);
    double gz = use_xi1 ? fr.a : fr.b;
    double root_im = -dk.imag() / gz;
    BypassSide side = root_im > 0.0 ? BypassSide::Below : BypassSide::Above;
    int ez_n = sign_of(gz);
    return side == BypassSide::Above ? ez_n : -ez_n;
}

BypassSide bypass_side(int s, Vec2 e_z, Vec2 n) {
    double d = dot(e_z, n);
    if (std::abs(d) <= 1e-12) throw Error(ErrorKind::TangentBypass, "transverse direction is tangent to the trace");
    return sign_of(d) * s > 0 ? BypassSide::Above : BypassSide::Below;
}

BridgeConfig determine_bridges(const WaveFunctionModel& m, const std::vector<RealTrace>& traces, const Window& w) {
    BridgeConfig out;
    for (const auto& c : m.components) {
        const RealTrace* tr = nullptr;
        for (const auto& t : traces)
            if (t.component_id == c.id) tr = &t;
        if (!tr || tr->empty()) {
            cplx dk = c.at({0.5 * (w.x0 + w.x1), 0.5 * (w.y0 + w.y1)}).dk;
            if (std::abs(dk.imag()) <= 1e-14)
                throw Error(ErrorKind::AmbiguousBridge, fmt::format("'{}' has no trace and Im dg/dkappa = 0", c.id));
            out[c.id] = sign_of(dk.imag());
            continue;
        }
        int s = 0;
        for (const auto& pl : tr->polylines) {
            size_t n = pl.vertices.size();
            size_t step = std::max<size_t>(1, n / 20);
            for (size_t k = 0; k < n; k += step) {
                int sk = determine_bridge(c, pl.vertices[k].p);
                if (s != 0 && sk != s)
                    throw Error(ErrorKind::AmbiguousBridge, fmt::format("bridge of '{}' changes sign along its trace", c.id));
                s = sk;
            }
        }
        out[c.id] = s;
    }
    return out;
}

}  // namespace farfield
