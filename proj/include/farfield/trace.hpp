#pragma once

#include <iosfwd>
#include <vector>

#include "farfield/model.hpp"

namespace farfield {

inline constexpr double kTraceTol = 1e-10;

struct TraceVertex {
    Vec2 p;
    double a = 0.0;
    double b = 0.0;
};

// Oriented along t = (-b, a), so the normal n = (a, b) lies to the right.
struct Polyline {
    std::vector<TraceVertex> vertices;
    bool closed = false;
};

struct RealTrace {
    std::string component_id;
    std::vector<Polyline> polylines;

    bool empty() const { return polylines.empty(); }
    size_t vertex_count() const;
};

struct LocalFrame {
    double a = 0.0;
    double b = 0.0;
    Vec2 n;
    Vec2 t;
    double grad_norm = 0.0;
};

RealTrace trace_real_curves(const SingularComponent& c, const Window& window, double cell_size);

// Newton projection of p onto the zero set of Re g(.; 0).
Vec2 polish_onto_trace(const SingularComponent& c, Vec2 p);

LocalFrame frame_at(const SingularComponent& c, Vec2 p);
double alpha_at(const SingularComponent& c, Vec2 p);

void write_trace_csv(std::ostream& os, const RealTrace& t);

}  // namespace farfield
