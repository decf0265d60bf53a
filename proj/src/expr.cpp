#include "mlab/expr.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "mlab/errors.h"

namespace mlab {

namespace {

bool is_number(const ExprPtr& e, double v) {
    return e->kind == Expr::Kind::Number && e->number == v;
}

std::shared_ptr<Expr> node(Expr::Kind k) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    return e;
}

const char* func_name(Expr::Func f) {
    switch (f) {
        case Expr::Func::Sin: return "sin";
        case Expr::Func::Cos: return "cos";
        case Expr::Func::Exp: return "exp";
        case Expr::Func::Sqrt: return "sqrt";
    }
    return "?";
}

}  // namespace

double Expr::eval(const std::array<double, 4>& x) const {
    switch (kind) {
        case Kind::Number: return number;
        case Kind::Var: return x[var];
        case Kind::Add: return a->eval(x) + b->eval(x);
        case Kind::Sub: return a->eval(x) - b->eval(x);
        case Kind::Mul: return a->eval(x) * b->eval(x);
        case Kind::Div: return a->eval(x) / b->eval(x);
        case Kind::Pow: return std::pow(a->eval(x), b->eval(x));
        case Kind::Neg: return -a->eval(x);
        case Kind::Call:
            switch (func) {
                case Func::Sin: return std::sin(a->eval(x));
                case Func::Cos: return std::cos(a->eval(x));
                case Func::Exp: return std::exp(a->eval(x));
                case Func::Sqrt: return std::sqrt(a->eval(x));
            }
    }
    return 0.0;
}

// ---- simplifying constructors ----------------------------------------------

ExprPtr Expr::make_number(double v) {
    auto e = node(Kind::Number);
    e->number = v;
    return e;
}

ExprPtr Expr::make_var(int index) {
    auto e = node(Kind::Var);
    e->var = index;
    return e;
}

ExprPtr Expr::make_add(ExprPtr a, ExprPtr b) {
    if (a->kind == Kind::Number && b->kind == Kind::Number)
        return make_number(a->number + b->number);
    if (is_number(a, 0)) return b;
    if (is_number(b, 0)) return a;
    auto e = node(Kind::Add);
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

ExprPtr Expr::make_sub(ExprPtr a, ExprPtr b) {
    if (a->kind == Kind::Number && b->kind == Kind::Number)
        return make_number(a->number - b->number);
    if (is_number(b, 0)) return a;
    if (is_number(a, 0)) return make_neg(std::move(b));
    auto e = node(Kind::Sub);
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

ExprPtr Expr::make_mul(ExprPtr a, ExprPtr b) {
    if (a->kind == Kind::Number && b->kind == Kind::Number)
        return make_number(a->number * b->number);
    if (is_number(a, 0) || is_number(b, 0)) return make_number(0);
    if (is_number(a, 1)) return b;
    if (is_number(b, 1)) return a;
    auto e = node(Kind::Mul);
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

ExprPtr Expr::make_div(ExprPtr a, ExprPtr b) {
    if (a->kind == Kind::Number && b->kind == Kind::Number && b->number != 0)
        return make_number(a->number / b->number);
    if (is_number(a, 0) && !is_number(b, 0)) return make_number(0);
    if (is_number(b, 1)) return a;
    auto e = node(Kind::Div);
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

ExprPtr Expr::make_pow(ExprPtr base, ExprPtr exponent) {
    if (base->kind == Kind::Number && exponent->kind == Kind::Number)
        return make_number(std::pow(base->number, exponent->number));
    if (is_number(exponent, 1)) return base;
    if (is_number(exponent, 0)) return make_number(1);
    auto e = node(Kind::Pow);
    e->a = std::move(base);
    e->b = std::move(exponent);
    return e;
}

ExprPtr Expr::make_neg(ExprPtr a) {
    if (a->kind == Kind::Number) return make_number(-a->number);
    if (a->kind == Kind::Neg) return a->a;
    auto e = node(Kind::Neg);
    e->a = std::move(a);
    return e;
}

ExprPtr Expr::make_call(Func f, ExprPtr a) {
    auto e = node(Kind::Call);
    e->func = f;
    e->a = std::move(a);
    return e;
}

// ---- differentiation --------------------------------------------------------

ExprPtr Expr::derivative(int v) const {
    switch (kind) {
        case Kind::Number: return make_number(0);
        case Kind::Var: return make_number(var == v ? 1 : 0);
        case Kind::Add: return make_add(a->derivative(v), b->derivative(v));
        case Kind::Sub: return make_sub(a->derivative(v), b->derivative(v));
        case Kind::Mul:
            return make_add(make_mul(a->derivative(v), b),
                            make_mul(a, b->derivative(v)));
        case Kind::Div:
            return make_div(make_sub(make_mul(a->derivative(v), b),
                                     make_mul(a, b->derivative(v))),
                            make_mul(b, b));
        case Kind::Pow: {
            if (b->kind != Kind::Number)
                throw Error("cannot differentiate '" + str() +
                            "': the exponent of '^' must fold to a constant");
            const double c = b->number;
            return make_mul(make_number(c),
                            make_mul(make_pow(a, make_number(c - 1)),
                                     a->derivative(v)));
        }
        case Kind::Neg: return make_neg(a->derivative(v));
        case Kind::Call: {
            const ExprPtr inner = a->derivative(v);
            switch (func) {
                case Func::Sin:
                    return make_mul(make_call(Func::Cos, a), inner);
                case Func::Cos:
                    return make_neg(make_mul(make_call(Func::Sin, a), inner));
                case Func::Exp:
                    return make_mul(make_call(Func::Exp, a), inner);
                case Func::Sqrt:
                    return make_div(inner,
                                    make_mul(make_number(2),
                                             make_call(Func::Sqrt, a)));
            }
        }
    }
    return make_number(0);
}

// ---- printing ---------------------------------------------------------------

namespace {

int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Pow: return 4;
        default: return 5;
    }
}

void print(const Expr& e, std::string& out);

void print_child(const ExprPtr& child, int parent_prec, bool needs_higher,
                 std::string& out) {
    const int p = precedence(child->kind);
    const bool parens = needs_higher ? p <= parent_prec : p < parent_prec;
    if (parens) out += '(';
    print(*child, out);
    if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
    static const char* kVarNames[4] = {"x1", "y1", "x2", "y2"};
    switch (e.kind) {
        case Expr::Kind::Number: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", e.number);
            out += buf;
            return;
        }
        case Expr::Kind::Var: out += kVarNames[e.var]; return;
        case Expr::Kind::Add:
            print_child(e.a, 1, false, out); out += " + ";
            print_child(e.b, 1, true, out);
            return;
        case Expr::Kind::Sub:
            print_child(e.a, 1, false, out); out += " - ";
            print_child(e.b, 1, true, out);
            return;
        case Expr::Kind::Mul:
            print_child(e.a, 2, false, out); out += "*";
            print_child(e.b, 2, true, out);
            return;
        case Expr::Kind::Div:
            print_child(e.a, 2, false, out); out += "/";
            print_child(e.b, 2, true, out);
            return;
        case Expr::Kind::Pow:
            // right-associative: parenthesize the base on ties
            print_child(e.a, 4, true, out); out += "^";
            print_child(e.b, 3, false, out);
            return;
        case Expr::Kind::Neg:
            out += "-";
            print_child(e.a, 3, false, out);
            return;
        case Expr::Kind::Call:
            out += func_name(e.func);
            out += '(';
            print(*e.a, out);
            out += ')';
            return;
    }
}

}  // namespace

std::string Expr::str() const {
    std::string out;
    print(*this, out);
    return out;
}

// ---- parser -----------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(const std::string& text, int line)
        : text_(text), line_(line) {}

    ExprPtr run() {
        skip_ws();
        if (at_end()) fail("empty expression");
        ExprPtr e = parse_sum();
        skip_ws();
        if (!at_end()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& text_;
    int line_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        throw ParseError(what, line_, int(at) + 1);
    }
    [[noreturn]] void fail(const std::string& what) const { fail(what, pos_); }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (peek() == c) { ++pos_; return true; }
        return false;
    }

    // sum := product (('+'|'-') product)*
    ExprPtr parse_sum() {
        ExprPtr e = parse_product();
        for (;;) {
            if (accept('+')) e = Expr::make_add(e, parse_product());
            else if (accept('-')) e = Expr::make_sub(e, parse_product());
            else return e;
        }
    }

    // product := unary (('*'|'/') unary)*
    ExprPtr parse_product() {
        ExprPtr e = parse_unary();
        for (;;) {
            if (accept('*')) e = Expr::make_mul(e, parse_unary());
            else if (accept('/')) e = Expr::make_div(e, parse_unary());
            else return e;
        }
    }

    // unary := '-' unary | power
    ExprPtr parse_unary() {
        if (accept('-')) return Expr::make_neg(parse_unary());
        return parse_power();
    }

    // power := primary ('^' unary)?     (right-associative)
    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (accept('^')) return Expr::make_pow(base, parse_unary());
        return base;
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (at_end()) fail("expected an operand");
        const char c = peek();
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return parse_word();
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr parse_number() {
        const std::size_t start = pos_;
        const char* begin = text_.c_str() + start;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number", start);
        pos_ = start + std::size_t(end - begin);
        // reject forms strtod would stop in the middle of, like "2..5"
        if (!at_end() && (peek() == '.' ))
            fail("malformed number", start);
        if (!std::isfinite(v)) fail("number out of range", start);
        return Expr::make_number(v);
    }

    ExprPtr parse_word() {
        const std::size_t start = pos_;
        while (!at_end() &&
               (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            ++pos_;
        const std::string word = text_.substr(start, pos_ - start);

        static const std::map<std::string, int> kVars = {
            {"x1", 0}, {"y1", 1}, {"x2", 2}, {"y2", 3}};
        if (auto it = kVars.find(word); it != kVars.end())
            return Expr::make_var(it->second);

        static const std::map<std::string, Expr::Func> kFuncs = {
            {"sin", Expr::Func::Sin}, {"cos", Expr::Func::Cos},
            {"exp", Expr::Func::Exp}, {"sqrt", Expr::Func::Sqrt}};
        if (auto it = kFuncs.find(word); it != kFuncs.end()) {
            if (!accept('(')) fail("expected '(' after function name");
            ExprPtr arg = parse_sum();
            skip_ws();
            if (peek() == ',')
                fail(std::string(func_name(it->second)) +
                     " takes exactly one argument");
            if (!accept(')')) fail("expected ')'");
            return Expr::make_call(it->second, arg);
        }
        fail("unknown identifier '" + word + "'", start);
    }
};

}  // namespace

ExprPtr parse_expression(const std::string& text, int line) {
    return Parser(text, line).run();
}

}  // namespace mlab
