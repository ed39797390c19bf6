#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lagflow/errors.hpp"

namespace lagflow {

using Complex = std::complex<double>;

// Variable assignments for expression evaluation. Small and copyable; lookup
// is linear, which beats hashing for the handful of names we ever bind.
class Bindings {
public:
    Bindings() = default;

    Bindings& set(std::string name, Complex value);
    Bindings& set(std::string name, double value) {
        return set(std::move(name), Complex(value, 0.0));
    }
    const Complex* find(std::string_view name) const;

    // Union of the two sets; entries of `other` win on name clashes.
    Bindings merged_with(const Bindings& other) const;

    const std::vector<std::pair<std::string, Complex>>& entries() const {
        return vars_;
    }

private:
    std::vector<std::pair<std::string, Complex>> vars_;
};

enum class ExprKind { Const, Var, Neg, Add, Sub, Mul, Div, PowInt, Exp };

namespace detail {
struct ExprNode;
}

// Immutable AST of an analytic function built from rational operations and
// exp. Construction goes through the factory functions / operators below,
// which fold constants and drop additive/multiplicative identities. Values
// share subtrees; copying is cheap and thread-safe.
class Expr {
public:
    Expr();  // the constant 0

    static Expr constant(Complex c);
    static Expr constant(double re) { return constant(Complex(re, 0.0)); }
    static Expr i();  // the imaginary unit literal
    static Expr variable(std::string name);
    static Expr exp(Expr arg);

    Expr pow(long exponent) const;
    Expr operator-() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);

    Complex eval(const Bindings& bindings) const;

    // Exact symbolic derivative with respect to `var`; other variables are
    // treated as constants.
    Expr derivative(std::string_view var) const;

    // Replaces every constant by its complex conjugate. For f analytic this
    // yields the expression of z -> conj(f(conj z)).
    Expr conjugate_constants() const;

    // Grammar-conformant text; parse(to_string()) rebuilds the same tree.
    std::string to_string() const;

    ExprKind kind() const;
    std::optional<Complex> constant_value() const;
    bool is_zero() const;
    long pow_exponent() const;  // valid only when kind()==PowInt

private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> node);
    std::shared_ptr<const detail::ExprNode> node_;
    friend struct detail::ExprNode;
    friend class ExprBuilder;
};

// Parses the expression grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' int)?
//   base   := number | 'i' | ident | '(' expr ')' | 'exp' '(' expr ')'
// '^' binds tighter than unary minus and is right-associative; exponents are
// (possibly negative) integer literals.
Expr parse_expr(std::string_view source);

// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace lagflow
