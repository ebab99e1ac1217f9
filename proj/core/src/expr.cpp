#include "singlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

#include "singlab/errors.hpp"

namespace singlab {

namespace {

enum class Op {
    Const, VarX, VarY, VarZ,
    Add, Sub, Mul, Div, Pow, Neg,
    Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Min, Max
};

}  // namespace

struct Expression::Node {
    Op op = Op::Const;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        auto e = expr();
        skip_ws();
        if (pos_ != s_.size())
            throw ConfigError("expression '" + s_ + "': trailing input at position " +
                              std::to_string(pos_));
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (consume('+')) lhs = make(Op::Add, lhs, term());
            else if (consume('-')) lhs = make(Op::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        auto lhs = factor();
        for (;;) {
            if (consume('*')) lhs = make(Op::Mul, lhs, factor());
            else if (consume('/')) lhs = make(Op::Div, lhs, factor());
            else return lhs;
        }
    }

    NodePtr factor() {
        if (consume('-')) return make(Op::Neg, factor());
        auto base = primary();
        if (consume('^')) return make(Op::Pow, base, factor());  // right associative
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size())
            throw ConfigError("expression '" + s_ + "': unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (consume('(')) {
            auto e = expr();
            if (!consume(')'))
                throw ConfigError("expression '" + s_ + "': missing ')'");
            return e;
        }
        throw ConfigError("expression '" + s_ + "': unexpected character '" +
                          std::string(1, c) + "'");
    }

    NodePtr number() {
        std::size_t used = 0;
        double v = std::stod(s_.substr(pos_), &used);
        pos_ += used;
        return make_const(v);
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name = s_.substr(start, pos_ - start);
        if (name == "x") return make(Op::VarX);
        if (name == "y") return make(Op::VarY);
        if (name == "z") return make(Op::VarZ);
        if (name == "pi") return make_const(3.14159265358979323846);
        if (name == "e") return make_const(2.71828182845904523536);

        static const struct { const char* name; Op op; int arity; } fns[] = {
            {"sin", Op::Sin, 1},  {"cos", Op::Cos, 1},   {"tan", Op::Tan, 1},
            {"exp", Op::Exp, 1},  {"log", Op::Log, 1},   {"sqrt", Op::Sqrt, 1},
            {"abs", Op::Abs, 1},  {"pow", Op::Pow, 2},   {"min", Op::Min, 2},
            {"max", Op::Max, 2},
        };
        for (const auto& f : fns) {
            if (name != f.name) continue;
            if (!consume('('))
                throw ConfigError("expression '" + s_ + "': expected '(' after " + name);
            auto a = expr();
            NodePtr b;
            if (f.arity == 2) {
                if (!consume(','))
                    throw ConfigError("expression '" + s_ + "': " + name +
                                      " takes two arguments");
                b = expr();
            }
            if (!consume(')'))
                throw ConfigError("expression '" + s_ + "': missing ')' in " + name);
            return make(f.op, a, b);
        }
        throw ConfigError("expression '" + s_ + "': unknown identifier '" + name + "'");
    }
};

double eval_node(const Expression::Node& n, double x, double y, double z) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::VarX: return x;
        case Op::VarY: return y;
        case Op::VarZ: return z;
        case Op::Add: return eval_node(*n.a, x, y, z) + eval_node(*n.b, x, y, z);
        case Op::Sub: return eval_node(*n.a, x, y, z) - eval_node(*n.b, x, y, z);
        case Op::Mul: return eval_node(*n.a, x, y, z) * eval_node(*n.b, x, y, z);
        case Op::Div: return eval_node(*n.a, x, y, z) / eval_node(*n.b, x, y, z);
        case Op::Pow: return std::pow(eval_node(*n.a, x, y, z), eval_node(*n.b, x, y, z));
        case Op::Neg: return -eval_node(*n.a, x, y, z);
        case Op::Sin: return std::sin(eval_node(*n.a, x, y, z));
        case Op::Cos: return std::cos(eval_node(*n.a, x, y, z));
        case Op::Tan: return std::tan(eval_node(*n.a, x, y, z));
        case Op::Exp: return std::exp(eval_node(*n.a, x, y, z));
        case Op::Log: return std::log(eval_node(*n.a, x, y, z));
        case Op::Sqrt: return std::sqrt(eval_node(*n.a, x, y, z));
        case Op::Abs: return std::fabs(eval_node(*n.a, x, y, z));
        case Op::Min: return std::min(eval_node(*n.a, x, y, z), eval_node(*n.b, x, y, z));
        case Op::Max: return std::max(eval_node(*n.a, x, y, z), eval_node(*n.b, x, y, z));
    }
    return 0.0;
}

bool depends_on_vars(const Expression::Node& n) {
    switch (n.op) {
        case Op::VarX:
        case Op::VarY:
        case Op::VarZ: return true;
        case Op::Const: return false;
        default:
            return (n.a && depends_on_vars(*n.a)) || (n.b && depends_on_vars(*n.b));
    }
}

}  // namespace

Expression::Expression() : root_(make_const(0.0)), text_("0") {}

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    e.root_ = make_const(value);
    e.text_ = std::to_string(value);
    return e;
}

double Expression::eval(double x, double y, double z) const {
    return eval_node(*root_, x, y, z);
}

bool Expression::is_constant() const { return !depends_on_vars(*root_); }

}  // namespace singlab
