#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "farfield/bridge.hpp"

namespace farfield {

enum class PointKind { Sos, Crossing, Tangential };

const char* point_kind_name(PointKind k);

struct CrossingPoint {
    Vec2 where;
    std::string comp1;
    std::string comp2;
    bool transverse = true;
    double delta = 0.0;  // a1*b2 - a2*b1 with the components ordered so it is positive
};

// One term of F that is singular at a special point, reduced to its local form
// A * g1^(-mu1) [* g2^(-mu2)].
struct LocalTerm {
    cplx amplitude;
    double mu1 = 0.0;
    double mu2 = 0.0;
};

struct SpecialPoint {
    PointKind kind = PointKind::Sos;
    Vec2 where;
    std::string comp1;
    std::string comp2;
    double a1 = 0, b1 = 0, a2 = 0, b2 = 0;
    double alpha = 0.0;  // SOS only
    double delta = 0.0;  // crossings only
    int s1 = 0;
    int s2 = 0;
    bool active = false;
    bool additive = false;
    bool contributing = false;
    std::string reason;
    std::vector<LocalTerm> terms;
};

std::vector<Vec2> find_sos_points(const SingularComponent& c, Vec2 xt, const RealTrace& trace);
std::vector<CrossingPoint> find_crossings(const SingularComponent& c1, const SingularComponent& c2, const Window& w);

// Activity of an SOS point with bridge s.
bool sos_active(Vec2 xt, Vec2 n, int s);
// Activity of a transverse crossing ordered so that a1*b2 - a2*b1 > 0.
bool crossing_active(Vec2 xt, double a1, double b1, double a2, double b2, int s1, int s2);

bool additivity_structural(const WaveFunctionModel& m, const std::string& c1, const std::string& c2);
// Residual-based test on a probe point near the crossing and off both traces.
bool additivity_monodromy(const WaveFunctionModel& m, const BridgeConfig& bridges, const std::string& c1,
                          const std::string& c2, Vec2 probe, double* residual = nullptr);

// SOS points of every component and crossings of every pair inside the window,
// classified for direction xt and sorted lexicographically by location.
std::vector<SpecialPoint> classify_points(const WaveFunctionModel& m, const BridgeConfig& bridges,
                                          const std::vector<RealTrace>& traces, Vec2 xt, const Window& w);

void write_classification_csv(std::ostream& os, const std::vector<SpecialPoint>& pts);

}  // namespace farfield
