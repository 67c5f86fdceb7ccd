#include "bend/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bend/errors.hpp"

namespace bend {

struct Expr::Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sqrt, Sin, Cos };
    Op op;
    double value = 0;
    int ipow = 0;
    std::string name;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr constant(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return constant(a->value + b->value);
    return make(Op::Add, std::move(a), std::move(b));
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return constant(a->value - b->value);
    if (is_const(a, 0)) return make(Op::Neg, std::move(b));
    return make(Op::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0) || is_const(b, 0)) return constant(0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return constant(a->value * b->value);
    return make(Op::Mul, std::move(a), std::move(b));
}

NodePtr divide(NodePtr a, NodePtr b) {
    if (is_const(a, 0)) return constant(0);
    if (is_const(b, 1)) return a;
    if (a->op == Op::Const && b->op == Op::Const && b->value != 0)
        return constant(a->value / b->value);
    return make(Op::Div, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
    if (a->op == Op::Const) return constant(-a->value);
    return make(Op::Neg, std::move(a));
}

NodePtr ipow_node(NodePtr a, int k) {
    if (k == 0) return constant(1);
    if (k == 1) return a;
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Pow;
    n->ipow = k;
    n->a = std::move(a);
    return n;
}

struct Parser {
    const std::string& text;
    size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    void skip() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip();
        return pos < text.size() ? text[pos] : '\0';
    }

    NodePtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = add(lhs, parse_term());
            else if (eat('-'))
                lhs = sub(lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            if (eat('*'))
                lhs = mul(lhs, parse_unary());
            else if (eat('/'))
                lhs = divide(lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return neg(parse_unary());
        eat('+');
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        if (eat('^')) {
            skip();
            bool negexp = eat('-');
            size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos == start)
                throw BendError(ErrKind::ConfigError, "expression: '^' needs an integer exponent");
            int k = std::stoi(text.substr(start, pos - start));
            if (negexp) return divide(constant(1), ipow_node(base, k));
            return ipow_node(base, k);
        }
        return base;
    }

    NodePtr parse_atom() {
        skip();
        if (pos >= text.size()) throw BendError(ErrKind::ConfigError, "expression ends unexpectedly");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            auto e = parse_expr();
            if (!eat(')')) throw BendError(ErrKind::ConfigError, "expression: missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v = std::stod(text.substr(pos), &used);
            pos += used;
            return constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            std::string name = text.substr(start, pos - start);
            if (name == "pi") return constant(M_PI);
            if (peek() == '(') {
                ++pos;
                auto arg = parse_expr();
                if (!eat(')')) throw BendError(ErrKind::ConfigError, "expression: missing ')'");
                if (name == "sqrt") return make(Op::Sqrt, arg);
                if (name == "sin") return make(Op::Sin, arg);
                if (name == "cos") return make(Op::Cos, arg);
                throw BendError(ErrKind::ConfigError, "expression: unknown function '" + name + "'");
            }
            auto n = std::make_shared<Expr::Node>();
            n->op = Op::Var;
            n->name = name;
            return n;
        }
        throw BendError(ErrKind::ConfigError,
                        std::string("expression: unexpected character '") + c + "'");
    }
};

double eval_node(const NodePtr& n, const std::map<std::string, double>& vars) {
    switch (n->op) {
        case Op::Const: return n->value;
        case Op::Var: {
            auto it = vars.find(n->name);
            if (it == vars.end())
                throw BendError(ErrKind::ConfigError, "expression: unknown variable '" + n->name + "'");
            return it->second;
        }
        case Op::Add: return eval_node(n->a, vars) + eval_node(n->b, vars);
        case Op::Sub: return eval_node(n->a, vars) - eval_node(n->b, vars);
        case Op::Mul: return eval_node(n->a, vars) * eval_node(n->b, vars);
        case Op::Div: return eval_node(n->a, vars) / eval_node(n->b, vars);
        case Op::Neg: return -eval_node(n->a, vars);
        case Op::Pow: return std::pow(eval_node(n->a, vars), n->ipow);
        case Op::Sqrt: return std::sqrt(eval_node(n->a, vars));
        case Op::Sin: return std::sin(eval_node(n->a, vars));
        case Op::Cos: return std::cos(eval_node(n->a, vars));
    }
    return 0;
}

NodePtr diff_node(const NodePtr& n, const std::string& var) {
    switch (n->op) {
        case Op::Const: return constant(0);
        case Op::Var: return constant(n->name == var ? 1 : 0);
        case Op::Add: return add(diff_node(n->a, var), diff_node(n->b, var));
        case Op::Sub: return sub(diff_node(n->a, var), diff_node(n->b, var));
        case Op::Mul:
            return add(mul(diff_node(n->a, var), n->b), mul(n->a, diff_node(n->b, var)));
        case Op::Div:
            return divide(sub(mul(diff_node(n->a, var), n->b), mul(n->a, diff_node(n->b, var))),
                          ipow_node(n->b, 2));
        case Op::Neg: return neg(diff_node(n->a, var));
        case Op::Pow:
            return mul(mul(constant(n->ipow), ipow_node(n->a, n->ipow - 1)), diff_node(n->a, var));
        case Op::Sqrt:
            return divide(diff_node(n->a, var), mul(constant(2), make(Op::Sqrt, n->a)));
        case Op::Sin: return mul(make(Op::Cos, n->a), diff_node(n->a, var));
        case Op::Cos: return neg(mul(make(Op::Sin, n->a), diff_node(n->a, var)));
    }
    return constant(0);
}

void print_node(const NodePtr& n, std::ostream& os) {
    switch (n->op) {
        case Op::Const: os << n->value; return;
        case Op::Var: os << n->name; return;
        case Op::Add: os << "("; print_node(n->a, os); os << " + "; print_node(n->b, os); os << ")"; return;
        case Op::Sub: os << "("; print_node(n->a, os); os << " - "; print_node(n->b, os); os << ")"; return;
        case Op::Mul: os << "("; print_node(n->a, os); os << " * "; print_node(n->b, os); os << ")"; return;
        case Op::Div: os << "("; print_node(n->a, os); os << " / "; print_node(n->b, os); os << ")"; return;
        case Op::Neg: os << "(-"; print_node(n->a, os); os << ")"; return;
        case Op::Pow: print_node(n->a, os); os << "^" << n->ipow; return;
        case Op::Sqrt: os << "sqrt("; print_node(n->a, os); os << ")"; return;
        case Op::Sin: os << "sin("; print_node(n->a, os); os << ")"; return;
        case Op::Cos: os << "cos("; print_node(n->a, os); os << ")"; return;
    }
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    auto root = p.parse_expr();
    p.skip();
    if (p.pos != text.size())
        throw BendError(ErrKind::ConfigError, "expression: trailing input at '" +
                                                  text.substr(p.pos) + "'");
    return Expr(root);
}

double Expr::eval(const std::map<std::string, double>& vars) const {
    if (!root_) throw BendError(ErrKind::ConfigError, "empty expression");
    return eval_node(root_, vars);
}

Expr Expr::derivative(const std::string& var) const {
    if (!root_) throw BendError(ErrKind::ConfigError, "empty expression");
    return Expr(diff_node(root_, var));
}

std::string Expr::str() const {
    if (!root_) return "";
    std::ostringstream os;
    print_node(root_, os);
    return os.str();
}

} // namespace bend
