#pragma once

#include <array>
#include <memory>
#include <string>

namespace mlab {

/// Immutable expression tree over the variables x1, y1, x2, y2.
/// Node set: numbers, variables, + - * / ^, unary minus, and the
/// functions sin, cos, exp, sqrt. Differentiation is closed over this set;
/// to keep it so, '^' can only be differentiated when its exponent folds
/// to a constant.
class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
public:
    enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
    enum class Func { Sin, Cos, Exp, Sqrt };

    Kind kind;
    double number = 0.0;  ///< Kind::Number
    int var = 0;          ///< Kind::Var, index 0..3 for x1, y1, x2, y2
    Func func = Func::Sin;
    ExprPtr a, b;

    double eval(const std::array<double, 4>& x) const;

    /// Derivative with respect to variable index 0..3 (simplified on the fly).
    ExprPtr derivative(int var) const;

    /// Minimal-parentheses rendering that reparses to the same function.
    std::string str() const;

    static ExprPtr make_number(double v);
    static ExprPtr make_var(int index);
    static ExprPtr make_add(ExprPtr a, ExprPtr b);
    static ExprPtr make_sub(ExprPtr a, ExprPtr b);
    static ExprPtr make_mul(ExprPtr a, ExprPtr b);
    static ExprPtr make_div(ExprPtr a, ExprPtr b);
    static ExprPtr make_pow(ExprPtr base, ExprPtr exponent);
    static ExprPtr make_neg(ExprPtr a);
    static ExprPtr make_call(Func f, ExprPtr a);
};

/// Parses a single expression. Positions in errors are 1-based; `line` is
/// the line number reported for this text (column counts within it).
/// Throws ParseError on any syntax problem, unknown identifier, or arity
/// mismatch.
ExprPtr parse_expression(const std::string& text, int line = 1);

}  // namespace mlab
