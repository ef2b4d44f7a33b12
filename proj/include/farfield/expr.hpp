#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "farfield/core.hpp"

namespace farfield {

enum class Var { Xi1, Xi2, Kappa };

// Immutable expression tree over xi1, xi2, kappa with complex constants.
class Expr {
public:
    enum class Op { Const, Variable, Add, Mul, Neg, Pow };

    Expr();  // the constant 0

    static Expr constant(cplx c);
    static Expr variable(Var v);

    Op op() const;
    cplx value() const;          // Const only
    Var var() const;             // Variable only
    int exponent() const;        // Pow only
    Expr lhs() const;     // Add, Mul, Neg, Pow
    Expr rhs() const;     // Add, Mul

    bool is_constant(cplx c) const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& base, int n);

private:
public:
    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Point3 {
    cplx xi1;
    cplx xi2;
    cplx kappa;
};

Expr parse_expression(std::string_view text);
std::string to_string(const Expr& e);

cplx evaluate(const Expr& e, const Point3& p);
Expr derivative(const Expr& e, Var v);
bool depends_on(const Expr& e, Var v);

struct Jet {
    cplx value;
    cplx d1;   // d/dxi1
    cplx d2;   // d/dxi2
    cplx dk;   // d/dkappa
    cplx h11;
    cplx h12;
    cplx h22;
};

// Value, gradient, kappa derivative and xi-Hessian, all from symbolic derivatives.
class JetExpr {
public:
    JetExpr() = default;
    explicit JetExpr(const Expr& e);

    Jet eval(const Point3& p) const;
    cplx value(const Point3& p) const { return evaluate(g_, p); }
    const Expr& expr() const { return g_; }

private:
    Expr g_, g1_, g2_, gk_, g11_, g12_, g22_;
};

Jet evaluate_jet(const Expr& e, Vec2 xi, double kappa);

}  // namespace farfield
