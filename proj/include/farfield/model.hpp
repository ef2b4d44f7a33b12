#pragma once

#include <map>
#include <string>
#include <vector>

#include "farfield/expr.hpp"

namespace farfield {

enum class ComponentKind { Pole, Branch };

struct SingularComponent {
    std::string id;
    Expr g;
    ComponentKind kind = ComponentKind::Branch;
    JetExpr jet;

    SingularComponent() = default;
    SingularComponent(std::string id_, Expr g_, ComponentKind kind_)
        : id(std::move(id_)), g(std::move(g_)), kind(kind_), jet(g) {}

    Jet at(Vec2 xi, double kappa = 0.0) const { return jet.eval({xi.x, xi.y, kappa}); }
    cplx value(cplx xi1, cplx xi2, double kappa = 0.0) const { return jet.value({xi1, xi2, kappa}); }
};

// One factor g_j^(-mu) of a term.
struct Factor {
    std::string component_id;
    double mu = 0.0;
};

struct Term {
    Expr amplitude;
    std::vector<Factor> factors;
};

// F = sum over terms of amplitude * prod g_j^(-mu_j).
struct WaveFunctionModel {
    std::vector<SingularComponent> components;
    std::vector<Term> terms;

    int index_of(const std::string& id) const;
    const SingularComponent& component(const std::string& id) const;
    void validate() const;
};

// Bridge sign per component id.
using BridgeConfig = std::map<std::string, int>;

// z^(-mu) with the cut along arg z = -s*pi/2. Throws CutProximity within 1e-14 of the cut.
cplx branch_power(cplx z, double mu, int s);

// Evaluate F at a complex point, using the bridge of each component for its branch.
cplx evaluate_model(const WaveFunctionModel& m, const BridgeConfig& bridges, cplx xi1, cplx xi2, double kappa);

struct RealPropertyReport {
    bool pass = true;
    std::string failed_condition;
    Vec2 where;
    double worst = 0.0;
};

RealPropertyReport check_real_property(const SingularComponent& c, const Window& window, int samples);

}  // namespace farfield
