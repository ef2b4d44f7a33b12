#pragma once

#include <string>

#include "farfield/trace.hpp"

namespace farfield {

enum class BypassSide { Above, Below };

const char* bypass_side_name(BypassSide b);

// Bridge sign s at a trace point, from the root of g(xi; kappa) for small kappa.
int determine_bridge(const SingularComponent& c, Vec2 p);

// Side toward which the surface passes in the transverse direction e_z.
BypassSide bypass_side(int s, Vec2 e_z, Vec2 n);

// Bridge per component. Components without a real trace in the window take the
// sign of Im dg/dkappa at the window centre. Throws if the sign varies along a trace.
BridgeConfig determine_bridges(const WaveFunctionModel& m, const std::vector<RealTrace>& traces, const Window& w);

}  // namespace farfield
