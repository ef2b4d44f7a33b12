#include "farfield/expr.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace farfield {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Syntax: return "syntax error";
        case ErrorKind::UnknownIdentifier: return "unknown identifier";
        case ErrorKind::Precondition: return "precondition violated";
        case ErrorKind::DegenerateGradient: return "degenerate gradient";
        case ErrorKind::AmbiguousBridge: return "ambiguous bridge";
        case ErrorKind::TangentBypass: return "tangent bypass";
        case ErrorKind::BoundaryDirection: return "boundary direction";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::Separation: return "separation violated";
        case ErrorKind::CutProximity: return "branch cut proximity";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::Scenario: return "scenario error";
        case ErrorKind::Io: return "io error";
    }
    return "error";
}

struct Expr::Node {
    Op op = Op::Const;
    cplx c{};
    Var v = Var::Xi1;
    int n = 0;
    std::shared_ptr<const Node> a, b;
};

namespace {

std::shared_ptr<const Expr::Node> zero_node() {
    static const auto z = std::make_shared<const Expr::Node>();
    return z;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(cplx c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->c = c;
    return Expr(std::move(n));
}

Expr Expr::variable(Var v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->v = v;
    return Expr(std::move(n));
}

Expr::Op Expr::op() const { return node_->op; }
cplx Expr::value() const { return node_->c; }
Var Expr::var() const { return node_->v; }
int Expr::exponent() const { return node_->n; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }

bool Expr::is_constant(cplx c) const { return node_->op == Op::Const && node_->c == c; }

Expr operator+(const Expr& a, const Expr& b) {
    if (a.op() == Expr::Op::Const && b.op() == Expr::Op::Const) return Expr::constant(a.value() + b.value());
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    auto n = std::make_shared<Expr::Node>();
    n->op = Expr::Op::Add;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr operator-(const Expr& a) {
    if (a.op() == Expr::Op::Const) return Expr::constant(-a.value());
    if (a.op() == Expr::Op::Neg) return a.lhs();
    auto n = std::make_shared<Expr::Node>();
    n->op = Expr::Op::Neg;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (b.is_constant(0.0)) return a;
    return a + (-b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.op() == Expr::Op::Const && b.op() == Expr::Op::Const) return Expr::constant(a.value() * b.value());
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return -b;
    if (b.is_constant(-1.0)) return -a;
    auto n = std::make_shared<Expr::Node>();
    n->op = Expr::Op::Mul;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr pow(const Expr& base, int k) {
    if (k < 0) throw Error(ErrorKind::Precondition, "negative exponent");
    if (k == 0) return Expr::constant(1.0);
    if (k == 1) return base;
    if (base.op() == Expr::Op::Const) {
        cplx r = 1.0;
        for (int i = 0; i < k; ++i) r *= base.value();
        return Expr::constant(r);
    }
    auto n = std::make_shared<Expr::Node>();
    n->op = Expr::Op::Pow;
    n->a = base.node_;
    n->n = k;
    return Expr(std::move(n));
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr parse() {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail(fmt::format("unexpected '{}'", s_[pos_]));
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Syntax, fmt::format("{} at position {}", msg, pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = unary();
        while (accept('*')) e = e * unary();
        return e;
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (!accept('^')) return base;
        skip();
        accept('+');
        if (pos_ < s_.size() && s_[pos_] == '-') fail("negative exponent");
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer exponent");
        if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E')) fail("exponent must be an integer");
        int k = 0;
        auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, k);
        if (ec != std::errc()) fail("exponent out of range");
        return farfield::pow(base, k);
    }

    Expr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string_view id = s_.substr(start, pos_ - start);
            if (id == "xi1") return Expr::variable(Var::Xi1);
            if (id == "xi2") return Expr::variable(Var::Xi2);
            if (id == "kappa") return Expr::variable(Var::Kappa);
            if (id == "i") return Expr::constant(cplx(0.0, 1.0));
            pos_ = start;
            throw Error(ErrorKind::UnknownIdentifier, fmt::format("'{}' at position {}", id, start));
        }
        fail(fmt::format("unexpected '{}'", c));
    }

    Expr number() {
        size_t start = pos_;
        auto digits = [&] {
            size_t d = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return pos_ - d;
        };
        size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) fail("malformed number");
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (digits() == 0) fail("malformed exponent in number");
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || p != s_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return Expr::constant(v);
    }

    std::string_view s_;
    size_t pos_ = 0;
};

std::string real_text(double v) {
    if (std::signbit(v) && v != 0.0) return fmt::format("(-{})", -v);
    return fmt::format("{}", v == 0.0 ? 0.0 : v);
}

void print(const Expr& e, std::string& out) {
    switch (e.op()) {
        case Expr::Op::Const: {
            cplx c = e.value();
            if (c.imag() == 0.0) out += real_text(c.real());
            else if (c.real() == 0.0) out += "(" + real_text(c.imag()) + "*i)";
            else out += "(" + real_text(c.real()) + " + " + real_text(c.imag()) + "*i)";
            return;
        }
        case Expr::Op::Variable:
            out += e.var() == Var::Xi1 ? "xi1" : (e.var() == Var::Xi2 ? "xi2" : "kappa");
            return;
        case Expr::Op::Add:
            out += "(";
            print(e.lhs(), out);
            out += " + ";
            print(e.rhs(), out);
            out += ")";
            return;
        case Expr::Op::Mul:
            out += "(";
            print(e.lhs(), out);
            out += "*";
            print(e.rhs(), out);
            out += ")";
            return;
        case Expr::Op::Neg:
            out += "(-";
            print(e.lhs(), out);
            out += ")";
            return;
        case Expr::Op::Pow: {
            bool bare = e.lhs().op() == Expr::Op::Variable;
            if (!bare) out += "(";
            print(e.lhs(), out);
            if (!bare) out += ")";
            out += fmt::format("^{}", e.exponent());
            return;
        }
    }
}

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

cplx evaluate(const Expr& e, const Point3& p) {
    switch (e.op()) {
        case Expr::Op::Const: return e.value();
        case Expr::Op::Variable:
            return e.var() == Var::Xi1 ? p.xi1 : (e.var() == Var::Xi2 ? p.xi2 : p.kappa);
        case Expr::Op::Add: return evaluate(e.lhs(), p) + evaluate(e.rhs(), p);
        case Expr::Op::Mul: return evaluate(e.lhs(), p) * evaluate(e.rhs(), p);
        case Expr::Op::Neg: return -evaluate(e.lhs(), p);
        case Expr::Op::Pow: {
            cplx b = evaluate(e.lhs(), p);
            cplx r = 1.0;
            for (int k = e.exponent(); k > 0; k >>= 1) {
                if (k & 1) r *= b;
                b *= b;
            }
            return r;
        }
    }
    return 0.0;
}

Expr derivative(const Expr& e, Var v) {
    switch (e.op()) {
        case Expr::Op::Const: return Expr::constant(0.0);
        case Expr::Op::Variable: return Expr::constant(e.var() == v ? 1.0 : 0.0);
        case Expr::Op::Add: return derivative(e.lhs(), v) + derivative(e.rhs(), v);
        case Expr::Op::Mul:
            return derivative(e.lhs(), v) * e.rhs() + e.lhs() * derivative(e.rhs(), v);
        case Expr::Op::Neg: return -derivative(e.lhs(), v);
        case Expr::Op::Pow:
            return Expr::constant(static_cast<double>(e.exponent())) * pow(e.lhs(), e.exponent() - 1) *
                   derivative(e.lhs(), v);
    }
    return Expr::constant(0.0);
}

bool depends_on(const Expr& e, Var v) {
    switch (e.op()) {
        case Expr::Op::Const: return false;
        case Expr::Op::Variable: return e.var() == v;
        case Expr::Op::Add:
        case Expr::Op::Mul: return depends_on(e.lhs(), v) || depends_on(e.rhs(), v);
        case Expr::Op::Neg:
        case Expr::Op::Pow: return depends_on(e.lhs(), v);
    }
    return false;
}

JetExpr::JetExpr(const Expr& e)
    : g_(e),
      g1_(derivative(e, Var::Xi1)),
      g2_(derivative(e, Var::Xi2)),
      gk_(derivative(e, Var::Kappa)),
      g11_(derivative(g1_, Var::Xi1)),
      g12_(derivative(g1_, Var::Xi2)),
      g22_(derivative(g2_, Var::Xi2)) {}

Jet JetExpr::eval(const Point3& p) const {
    return {evaluate(g_, p),   evaluate(g1_, p),  evaluate(g2_, p), evaluate(gk_, p),
            evaluate(g11_, p), evaluate(g12_, p), evaluate(g22_, p)};
}

Jet evaluate_jet(const Expr& e, Vec2 xi, double kappa) {
    return JetExpr(e).eval({xi.x, xi.y, kappa});
}

}  // namespace farfield
