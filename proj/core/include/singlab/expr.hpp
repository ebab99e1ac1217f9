#pragma once

#include <memory>
#include <string>

namespace singlab {

/// Compiled arithmetic expression in the spatial variables x, y, z.
///
/// Grammar: + - * / ^ (right assoc.), unary minus, parentheses, numeric
/// literals, constants pi and e, and the functions
/// sin cos tan exp log sqrt abs pow min max.
/// Parsing is strict: unknown identifiers or trailing input throw ConfigError.
class Expression {
public:
    Expression();                               // constant 0
    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double eval(double x, double y = 0.0, double z = 0.0) const;
    bool is_constant() const;
    const std::string& text() const { return text_; }

    struct Node;  // opaque AST node

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace singlab
