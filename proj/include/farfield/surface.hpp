#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "farfield/classify.hpp"

namespace farfield {

struct SurfaceParams {
    double rho = 0.3;         // patch half-width in local coordinates
    double beta = 1.2;        // crossing tent slope; the centre lift is beta*rho
    double sos_beta = 2.5;    // SOS patch scale; the centre lift is |alpha|*sos_beta*rho^2
    double floor = 0.3;       // tent floor for curved components, fraction of the centre lift
    double blend = 1.6;       // patch weight falls from 1 at q = 1 to 0 at q = blend
    double decay_floor = 0.05;
    double decay_gain = 10.0;
    double decay_power = 1.5;
    double band = 0.1;        // distance to a trace below which only the imaginary part may protect it
    double margin = 0.05;     // minimum normal component of the unit rest direction on a trace
    double lift = 0.4;        // minimum normal lift of the rest field on a trace
    double eta_max = 60.0;
    double slope_limit = 30.0;  // Lipschitz bound on the rest field magnitude
    double taper = 0.0;       // if > 0, eta is brought to zero over this distance from the window edge
};

enum class PatchKind { Sos, Crossing };

// Local field around one contributing point, pulled back from local coordinates
// zeta through the Jacobian at each real point.
struct LocalPatch {
    PatchKind kind = PatchKind::Sos;
    Vec2 center;
    SingularComponent c1, c2;
    int s1 = 1, s2 = 1;
    double rho = 0.3;
    double beta = 1.0;
    double blend = 1.6;
    double floor1 = -1.0;  // negative disables the floor
    double floor2 = -1.0;
    // SOS data
    double a = 0, b = 0, alpha = 0;
    // crossing data
    double c_1 = 0, c_2 = 0;

    Vec2 zeta(Vec2 xi) const;
    Vec2 eta_local(Vec2 z) const;
    Vec2 eta(Vec2 xi) const;
    double weight(Vec2 xi) const;
    double support_radius() const;  // conservative real-plane radius of the support
};

LocalPatch sos_patch(const SingularComponent& c, Vec2 where, int s, double rho, double beta, double floor, double blend);
LocalPatch crossing_patch(const SingularComponent& c1, const SingularComponent& c2, Vec2 where, int s1, int s2,
                          Vec2 xt, double rho, double beta, double floor, double blend);

struct DeformationField {
    Window window;
    int n1 = 0;  // cells along xi1
    int n2 = 0;
    Vec2 xt;
    double eta_max = 0.0;
    std::vector<Vec2> eta;             // node values, index i*(n2+1)+j
    std::vector<double> patch_weight;  // per node
    std::vector<LocalPatch> patches;
    int weak_nodes = 0;                // nodes where the rest field could not reach the margin

    double hx() const { return (window.x1 - window.x0) / n1; }
    double hy() const { return (window.y1 - window.y0) / n2; }
    Vec2 node(int i, int j) const { return {window.x0 + hx() * i, window.y0 + hy() * j}; }
    Vec2 at(int i, int j) const { return eta[static_cast<size_t>(i) * (n2 + 1) + j]; }
    Vec2 interpolate(Vec2 p) const;

    static DeformationField from_function(const Window& w, int n1, int n2, Vec2 xt,
                                          const std::function<Vec2(Vec2)>& f);
};

DeformationField build_global_field(const WaveFunctionModel& m, const BridgeConfig& bridges, Vec2 xt,
                                    const std::vector<SpecialPoint>& points, const Window& w, int n1, int n2,
                                    const SurfaceParams& p);

struct FieldReport {
    bool pass = true;
    double min_clearance = 0.0;
    int clearance_failures = 0;
    int cut_crossings = 0;
    Vec2 first_cut_at;
    double max_decay_off_patch = 0.0;  // max of xt.eta where no patch is present
    int decay_failures = 0;
    Vec2 worst_decay_at;
    int bridge_checked = 0;
    int bridge_failures = 0;
    double max_abs_eta = 0.0;
    bool bounded = true;
    std::vector<std::string> messages;
};

FieldReport verify_field(const DeformationField& f, const WaveFunctionModel& m, const BridgeConfig& bridges,
                         double clearance_tol = 1e-6);

void write_field_csv(std::ostream& os, const DeformationField& f, int stride = 1);
void write_decay_heatmap_csv(std::ostream& os, const DeformationField& f, int stride = 1);

}  // namespace farfield
