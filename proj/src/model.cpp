#include "farfield/model.hpp"

#include <set>

#include <fmt/format.h>

namespace farfield {

int WaveFunctionModel::index_of(const std::string& id) const {
    for (size_t k = 0; k < components.size(); ++k)
        if (components[k].id == id) return static_cast<int>(k);
    return -1;
}

const SingularComponent& WaveFunctionModel::component(const std::string& id) const {
    int k = index_of(id);
    if (k < 0) throw Error(ErrorKind::Precondition, fmt::format("no component '{}'", id));
    return components[static_cast<size_t>(k)];
}

void WaveFunctionModel::validate() const {
    std::set<std::string> ids;
    for (const auto& c : components) {
        if (c.id.empty()) throw Error(ErrorKind::Precondition, "component with empty id");
        if (!ids.insert(c.id).second) throw Error(ErrorKind::Precondition, fmt::format("duplicate component '{}'", c.id));
    }
    if (terms.empty()) throw Error(ErrorKind::Precondition, "model has no terms");
    for (const auto& t : terms) {
        std::set<std::string> seen;
        for (const auto& f : t.factors) {
            int k = index_of(f.component_id);
            if (k < 0) throw Error(ErrorKind::Precondition, fmt::format("term refers to unknown component '{}'", f.component_id));
            if (!seen.insert(f.component_id).second)
                throw Error(ErrorKind::Precondition, fmt::format("component '{}' repeated in a term", f.component_id));
            if (!std::isfinite(f.mu)) throw Error(ErrorKind::Precondition, "non-finite exponent");
            if (components[static_cast<size_t>(k)].kind == ComponentKind::Pole && f.mu != std::round(f.mu))
                throw Error(ErrorKind::Precondition, fmt::format("pole component '{}' with non-integer exponent", f.component_id));
        }
    }
}

cplx branch_power(cplx z, double mu, int s) {
    if (mu == 0.0) return 1.0;
    if (mu == std::round(mu) && std::abs(mu) < 64) {
        int k = static_cast<int>(std::abs(mu));
        cplx r = 1.0;
        for (int i = 0; i < k; ++i) r *= z;
        return mu > 0 ? 1.0 / r : r;
    }
    double m = std::abs(z);
    if (m == 0.0) throw Error(ErrorKind::CutProximity, "branch point hit");
    if (std::abs(z.real()) <= 1e-14 * m && s * z.imag() < 0.0)
        throw Error(ErrorKind::CutProximity, fmt::format("value {}{:+}i on the cut", z.real(), z.imag()));
    double th = std::arg(z);
    if (s > 0) {
        if (th <= -kPi / 2) th += 2 * kPi;
    } else {
        if (th > kPi / 2) th -= 2 * kPi;
    }
    return std::exp(-mu * cplx(std::log(m), th));
}

cplx evaluate_model(const WaveFunctionModel& m, const BridgeConfig& bridges, cplx xi1, cplx xi2, double kappa) {
    cplx gv[16];
    std::vector<cplx> big;
    cplx* g = gv;
    if (m.components.size() > 16) {
        big.resize(m.components.size());
        g = big.data();
    }
    for (size_t k = 0; k < m.components.size(); ++k) g[k] = m.components[k].value(xi1, xi2, kappa);
    cplx total = 0.0;
    Point3 p{xi1, xi2, kappa};
    for (const auto& t : m.terms) {
        cplx v = evaluate(t.amplitude, p);
        for (const auto& f : t.factors) {
            int k = m.index_of(f.component_id);
            auto it = bridges.find(f.component_id);
            int s = it == bridges.end() ? 1 : it->second;
            v *= branch_power(g[k], f.mu, s);
        }
        total += v;
    }
    return total;
}

}  // namespace farfield
