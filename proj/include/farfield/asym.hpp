#pragma once

#include <iosfwd>
#include <vector>

#include "farfield/classify.hpp"

namespace farfield {

// Integral of exp(-i a z^2) over the real line.
cplx fresnel_I(double a);
// Integral of z^(-mu) exp(-i s a z) over R + i s 0.
cplx power_J(double mu, double a, int s);

struct SosData {
    Vec2 where;
    double a = 0, b = 0;
    double alpha = 0;
    int s = 1;
    double mu = 0;
    cplx amplitude;
};

struct CrossingData {
    Vec2 where;
    double a1 = 0, b1 = 0, a2 = 0, b2 = 0;
    int s1 = 1, s2 = 1;
    double mu1 = 0, mu2 = 0;
    cplx amplitude;
};

cplx sos_contribution(const SosData& d, Vec2 x);
// Zero when x lies outside the active quadrant.
cplx crossing_contribution(const CrossingData& d, Vec2 x);

// Leading term a0/lambda * exp(lambda*phase) of a 2D saddle point with Hessian H of the phase.
cplx saddle2d_estimate(cplx f0, double h11, double h12, double h22, double phase_value, double lambda);

struct Contribution {
    PointKind kind = PointKind::Sos;
    Vec2 where;
    double r_power = 0.0;
    SosData sos;
    CrossingData crossing;

    cplx evaluate(Vec2 x) const;
    // C such that evaluate(r xt) = C exp(-i r xt.where) r^r_power
    cplx coefficient(Vec2 xt) const;
};

std::vector<Contribution> assemble_far_field(const std::vector<SpecialPoint>& points);
cplx evaluate_far_field(const std::vector<Contribution>& cs, Vec2 x);

void write_expansion_csv(std::ostream& os, const std::vector<Contribution>& cs, Vec2 xt);

}  // namespace farfield
