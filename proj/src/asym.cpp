#include "farfield/asym.hpp"

#include <ostream>

#include <fmt/format.h>

namespace farfield {

namespace {

bool nonpositive_integer(double mu) { return mu <= 0.0 && mu == std::round(mu); }

const cplx I(0.0, 1.0);

}  // namespace

cplx fresnel_I(double a) {
    if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorKind::Precondition, "fresnel_I needs a finite nonzero argument");
    if (a > 0) return std::exp(-I * (kPi / 4)) * std::sqrt(kPi / a);
    return std::exp(I * (kPi / 4)) * std::sqrt(-kPi / a);
}

cplx power_J(double mu, double a, int s) {
    if (nonpositive_integer(mu)) throw Error(ErrorKind::Precondition, "power_J: the point is not singular for this exponent");
    if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorKind::Precondition, "power_J needs a finite nonzero argument");
    if (s != 1 && s != -1) throw Error(ErrorKind::Precondition, "power_J needs s = +1 or -1");
    if (a < 0) return 0.0;
    return 2 * kPi * std::exp(-I * (s * mu * kPi / 2)) * std::pow(a, mu - 1) / std::tgamma(mu);
}

cplx sos_contribution(const SosData& d, Vec2 x) {
    double n2 = d.a * d.a + d.b * d.b;
    double r = norm(x);
    double rs = r / std::sqrt(n2);
    return d.amplitude * std::exp(-I * dot(x, d.where)) / n2 * fresnel_I(d.s * rs * d.alpha) * power_J(d.mu, rs, d.s);
}

cplx crossing_contribution(const CrossingData& d, Vec2 x) {
    double delta = d.a1 * d.b2 - d.a2 * d.b1;
    if (!(delta > 0)) throw Error(ErrorKind::Precondition, "crossing must be ordered with positive determinant");
    double e1 = x.x * d.b2 - x.y * d.a2;
    double e2 = -x.x * d.b1 + x.y * d.a1;
    if (sign_of(e1) != d.s1 || sign_of(e2) != d.s2) return 0.0;
    return 4 * kPi * kPi * d.amplitude * std::exp(-I * dot(x, d.where)) *
           std::exp(-I * (kPi * (d.s1 * d.mu1 + d.s2 * d.mu2) / 2)) /
           (std::tgamma(d.mu1) * std::tgamma(d.mu2) * std::pow(delta, d.mu1 + d.mu2 - 1)) *
           std::pow(std::abs(e1), d.mu1 - 1) * std::pow(std::abs(e2), d.mu2 - 1);
}

cplx saddle2d_estimate(cplx f0, double h11, double h12, double h22, double phase_value, double lambda) {
    double det = h11 * h22 - h12 * h12;
    if (det == 0.0) throw Error(ErrorKind::Precondition, "degenerate saddle");
    double tr = h11 + h22;
    int npos = 0, nneg = 0;
    // eigenvalue signs from trace and determinant
    if (det > 0) (tr > 0 ? npos : nneg) = 2;
    else npos = nneg = 1;
    double delta = (npos - nneg) / 2.0;
    cplx a0 = 2 * kPi * f0 * std::exp(I * (kPi / 2) * delta) / std::sqrt(std::abs(det));
    return a0 / lambda * std::exp(lambda * phase_value);
}

cplx Contribution::evaluate(Vec2 x) const {
    return kind == PointKind::Sos ? sos_contribution(sos, x) : crossing_contribution(crossing, x);
}

cplx Contribution::coefficient(Vec2 xt) const {
    return evaluate(xt) * std::exp(I * dot(xt, where));
}

std::vector<Contribution> assemble_far_field(const std::vector<SpecialPoint>& points) {
    std::vector<Contribution> out;
    for (const auto& p : points) {
        if (!p.contributing) continue;
        for (const auto& t : p.terms) {
            Contribution c;
            c.kind = p.kind;
            c.where = p.where;
            if (p.kind == PointKind::Sos) {
                c.r_power = t.mu1 - 1.5;
                c.sos = {p.where, p.a1, p.b1, p.alpha, p.s1, t.mu1, t.amplitude};
            } else if (p.kind == PointKind::Crossing) {
                c.r_power = t.mu1 + t.mu2 - 2.0;
                c.crossing = {p.where, p.a1, p.b1, p.a2, p.b2, p.s1, p.s2, t.mu1, t.mu2, t.amplitude};
            } else {
                throw Error(ErrorKind::Unsupported, "tangential touch contribution");
            }
            out.push_back(c);
        }
    }
    return out;
}

cplx evaluate_far_field(const std::vector<Contribution>& cs, Vec2 x) {
    cplx s = 0.0;
    for (const auto& c : cs) s += c.evaluate(x);
    return s;
}

void write_expansion_csv(std::ostream& os, const std::vector<Contribution>& cs, Vec2 xt) {
    os << "x,y,kind,r_power,re_c,im_c,phase_x,phase_y\n";
    for (const auto& c : cs) {
        cplx k = c.coefficient(xt);
        os << fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", c.where.x, c.where.y,
                          point_kind_name(c.kind), c.r_power, k.real(), k.imag(), c.where.x, c.where.y);
    }
}

}  // namespace farfield
