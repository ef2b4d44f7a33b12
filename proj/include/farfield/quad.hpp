#pragma once

#include <iosfwd>

#include "farfield/kernels.hpp"
#include "farfield/surface.hpp"

namespace farfield {

struct QuadConfig {
    double eps_scale = 1.0;  // integrate over xi + i*eps*eta
    double kappa = 0.0;
    KernelKind kernel = KernelKind::Auto;
    bool coarse_estimate = true;
};

struct QuadResult {
    cplx value;
    double error_estimate = 0.0;  // |I_h - I_2h| / 3
    double max_abs = 0.0;         // largest |integrand| over cells
    double edge_max = 0.0;        // largest |integrand| over boundary cells
    bool tail_warning = false;
};

QuadResult integrate_on_surface(const WaveFunctionModel& m, const BridgeConfig& bridges, const DeformationField& f,
                                Vec2 x, const QuadConfig& cfg = {});

// Flat integral over the window with kappa > 0.
QuadResult integrate_reference(const WaveFunctionModel& m, const BridgeConfig& bridges, const Window& w, int n1, int n2,
                               Vec2 x, double kappa, KernelKind kernel = KernelKind::Auto);

void write_integrand_heatmap(std::ostream& os, const WaveFunctionModel& m, const BridgeConfig& bridges,
                             const DeformationField& f, Vec2 x, double eps_scale, int stride = 1);

}  // namespace farfield
