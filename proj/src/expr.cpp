#include "lagflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <utility>
#include <variant>

namespace lagflow {

Bindings& Bindings::set(std::string name, Complex value) {
    for (auto& [n, v] : vars_) {
        if (n == name) {
            v = value;
            return *this;
        }
    }
    vars_.emplace_back(std::move(name), value);
    return *this;
}

const Complex* Bindings::find(std::string_view name) const {
    for (const auto& [n, v] : vars_) {
        if (n == name) return &v;
    }
    return nullptr;
}

Bindings Bindings::merged_with(const Bindings& other) const {
    Bindings out = *this;
    for (const auto& [n, v] : other.vars_) out.set(n, v);
    return out;
}

namespace detail {

struct ExprNode {
    using Ptr = std::shared_ptr<const ExprNode>;

    struct Const {
        Complex value;
    };
    struct Var {
        std::string name;
    };
    struct Neg {
        Ptr arg;
    };
    struct Add {
        Ptr lhs, rhs;
    };
    struct Sub {
        Ptr lhs, rhs;
    };
    struct Mul {
        Ptr lhs, rhs;
    };
    struct Div {
        Ptr num, den;
    };
    struct PowInt {
        Ptr base;
        long exponent;
    };
    struct Exp {
        Ptr arg;
    };

    std::variant<Const, Var, Neg, Add, Sub, Mul, Div, PowInt, Exp> v;
};

using NodePtr = ExprNode::Ptr;

template <class T>
NodePtr make_node(T&& payload) {
    auto node = std::make_shared<ExprNode>();
    node->v = std::forward<T>(payload);
    return node;
}

}  // namespace detail

using detail::ExprNode;
using detail::NodePtr;

Expr::Expr() : node_(detail::make_node(ExprNode::Const{Complex(0.0, 0.0)})) {}

Expr::Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

Expr Expr::constant(Complex c) {
    return Expr(detail::make_node(ExprNode::Const{c}));
}

Expr Expr::i() { return constant(Complex(0.0, 1.0)); }

Expr Expr::variable(std::string name) {
    return Expr(detail::make_node(ExprNode::Var{std::move(name)}));
}

ExprKind Expr::kind() const {
    return static_cast<ExprKind>(node_->v.index());
}

std::optional<Complex> Expr::constant_value() const {
    if (const auto* c = std::get_if<ExprNode::Const>(&node_->v)) return c->value;
    return std::nullopt;
}

bool Expr::is_zero() const {
    auto c = constant_value();
    return c && *c == Complex(0.0, 0.0);
}

long Expr::pow_exponent() const {
    return std::get<ExprNode::PowInt>(node_->v).exponent;
}

namespace {

bool is_const_one(const Expr& e) {
    auto c = e.constant_value();
    return c && *c == Complex(1.0, 0.0);
}

Complex int_pow(Complex base, long n) {
    if (n < 0) {
        if (base == Complex(0.0, 0.0)) throw EvalError("division by zero in negative power");
        return Complex(1.0, 0.0) / int_pow(base, -n);
    }
    Complex acc(1.0, 0.0);
    Complex b = base;
    unsigned long e = static_cast<unsigned long>(n);
    while (e != 0) {
        if (e & 1u) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

}  // namespace

Expr Expr::operator-() const {
    if (auto c = constant_value()) return constant(-*c);
    if (kind() == ExprKind::Neg) {
        return Expr(std::get<ExprNode::Neg>(node_->v).arg);
    }
    return Expr(detail::make_node(ExprNode::Neg{node_}));
}

Expr operator+(const Expr& a, const Expr& b) {
    auto ca = a.constant_value();
    auto cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca + *cb);
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return Expr(detail::make_node(ExprNode::Add{a.node_, b.node_}));
}

Expr operator-(const Expr& a, const Expr& b) {
    auto ca = a.constant_value();
    auto cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca - *cb);
    if (b.is_zero()) return a;
    if (a.is_zero()) return -b;
    return Expr(detail::make_node(ExprNode::Sub{a.node_, b.node_}));
}

Expr operator*(const Expr& a, const Expr& b) {
    auto ca = a.constant_value();
    auto cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca * *cb);
    if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
    if (is_const_one(a)) return b;
    if (is_const_one(b)) return a;
    return Expr(detail::make_node(ExprNode::Mul{a.node_, b.node_}));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) {
        throw ValidationError("DivisionByConstantZero",
                              "expression denominator is the constant zero");
    }
    auto ca = a.constant_value();
    auto cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca / *cb);
    if (a.is_zero()) return Expr::constant(0.0);
    if (is_const_one(b)) return a;
    return Expr(detail::make_node(ExprNode::Div{a.node_, b.node_}));
}

Expr Expr::pow(long exponent) const {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return *this;
    if (auto c = constant_value()) return constant(int_pow(*c, exponent));
    return Expr(detail::make_node(ExprNode::PowInt{node_, exponent}));
}

Expr Expr::exp(Expr arg) {
    if (auto c = arg.constant_value()) return constant(std::exp(*c));
    return Expr(detail::make_node(ExprNode::Exp{arg.node_}));
}

namespace {

Complex eval_node(const ExprNode& node, const Bindings& b) {
    struct Visitor {
        const Bindings& b;
        Complex operator()(const ExprNode::Const& n) const { return n.value; }
        Complex operator()(const ExprNode::Var& n) const {
            const Complex* v = b.find(n.name);
            if (!v) throw EvalError("unbound variable '" + n.name + "'");
            return *v;
        }
        Complex operator()(const ExprNode::Neg& n) const { return -eval_node(*n.arg, b); }
        Complex operator()(const ExprNode::Add& n) const {
            return eval_node(*n.lhs, b) + eval_node(*n.rhs, b);
        }
        Complex operator()(const ExprNode::Sub& n) const {
            return eval_node(*n.lhs, b) - eval_node(*n.rhs, b);
        }
        Complex operator()(const ExprNode::Mul& n) const {
            return eval_node(*n.lhs, b) * eval_node(*n.rhs, b);
        }
        Complex operator()(const ExprNode::Div& n) const {
            Complex den = eval_node(*n.den, b);
            if (den == Complex(0.0, 0.0)) throw EvalError("division by zero (pole hit)");
            return eval_node(*n.num, b) / den;
        }
        Complex operator()(const ExprNode::PowInt& n) const {
            return int_pow(eval_node(*n.base, b), n.exponent);
        }
        Complex operator()(const ExprNode::Exp& n) const {
            return std::exp(eval_node(*n.arg, b));
        }
    };
    return std::visit(Visitor{b}, node.v);
}

}  // namespace

Complex Expr::eval(const Bindings& bindings) const {
    Complex result = eval_node(*node_, bindings);
    if (!std::isfinite(result.real()) || !std::isfinite(result.imag())) {
        throw EvalError("non-finite result (pole or overflow)");
    }
    return result;
}

class ExprBuilder {
public:
    static Expr wrap(NodePtr node) { return Expr(std::move(node)); }
};

namespace {

Expr wrap(const NodePtr& node) { return ExprBuilder::wrap(node); }

}  // namespace

Expr Expr::derivative(std::string_view var) const {
    struct Visitor {
        std::string_view var;
        Expr operator()(const ExprNode::Const&) const { return Expr::constant(0.0); }
        Expr operator()(const ExprNode::Var& n) const {
            return Expr::constant(n.name == var ? 1.0 : 0.0);
        }
        Expr operator()(const ExprNode::Neg& n) const { return -wrap(n.arg).derivative(var); }
        Expr operator()(const ExprNode::Add& n) const {
            return wrap(n.lhs).derivative(var) + wrap(n.rhs).derivative(var);
        }
        Expr operator()(const ExprNode::Sub& n) const {
            return wrap(n.lhs).derivative(var) - wrap(n.rhs).derivative(var);
        }
        Expr operator()(const ExprNode::Mul& n) const {
            Expr u = wrap(n.lhs), v = wrap(n.rhs);
            return u.derivative(var) * v + u * v.derivative(var);
        }
        Expr operator()(const ExprNode::Div& n) const {
            Expr u = wrap(n.num), v = wrap(n.den);
            return (u.derivative(var) * v - u * v.derivative(var)) / v.pow(2);
        }
        Expr operator()(const ExprNode::PowInt& n) const {
            Expr base = wrap(n.base);
            return Expr::constant(static_cast<double>(n.exponent)) *
                   base.pow(n.exponent - 1) * base.derivative(var);
        }
        Expr operator()(const ExprNode::Exp& n) const {
            Expr arg = wrap(n.arg);
            return Expr::exp(arg) * arg.derivative(var);
        }
    };
    return std::visit(Visitor{var}, node_->v);
}

Expr Expr::conjugate_constants() const {
    struct Visitor {
        Expr operator()(const ExprNode::Const& n) const {
            return Expr::constant(std::conj(n.value));
        }
        Expr operator()(const ExprNode::Var& n) const { return Expr::variable(n.name); }
        Expr operator()(const ExprNode::Neg& n) const {
            return -wrap(n.arg).conjugate_constants();
        }
        Expr operator()(const ExprNode::Add& n) const {
            return wrap(n.lhs).conjugate_constants() + wrap(n.rhs).conjugate_constants();
        }
        Expr operator()(const ExprNode::Sub& n) const {
            return wrap(n.lhs).conjugate_constants() - wrap(n.rhs).conjugate_constants();
        }
        Expr operator()(const ExprNode::Mul& n) const {
            return wrap(n.lhs).conjugate_constants() * wrap(n.rhs).conjugate_constants();
        }
        Expr operator()(const ExprNode::Div& n) const {
            return wrap(n.num).conjugate_constants() / wrap(n.den).conjugate_constants();
        }
        Expr operator()(const ExprNode::PowInt& n) const {
            return wrap(n.base).conjugate_constants().pow(n.exponent);
        }
        Expr operator()(const ExprNode::Exp& n) const {
            return Expr::exp(wrap(n.arg).conjugate_constants());
        }
    };
    return std::visit(Visitor{}, node_->v);
}

// ---------------------------------------------------------------------------
// Printing

std::string format_double(double x) {
    if (x == 0.0) return "0";  // also normalizes -0
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        double back = 0.0;
        auto [ptr, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
        (void)ptr;
        if (ec == std::errc() && back == x) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// Precedence levels used by the printer. Children are parenthesized so that
// re-parsing reproduces the exact tree shape (and hence bit-identical
// evaluation order).
enum Prec : int { kAdd = 1, kMul = 2, kNeg = 3, kPow = 4, kAtom = 5 };

struct Printed {
    std::string text;
    int prec;
};

Printed print_const(Complex c) {
    double re = c.real(), im = c.imag();
    if (im == 0.0) {
        if (re >= 0.0) return {format_double(re), kAtom};
        return {"-" + format_double(-re), kNeg};
    }
    std::string im_part;
    int im_prec;
    if (im == 1.0) {
        im_part = "i";
        im_prec = kAtom;
    } else if (im == -1.0) {
        im_part = "-i";
        im_prec = kNeg;
    } else if (im > 0.0) {
        im_part = format_double(im) + "*i";
        im_prec = kMul;
    } else {
        im_part = "-" + format_double(-im) + "*i";
        im_prec = kNeg;
    }
    if (re == 0.0) return {im_part, im_prec};
    if (im > 0.0) {
        std::string im_term = (im == 1.0) ? "i" : format_double(im) + "*i";
        return {format_double(re) + "+" + im_term, kAdd};
    }
    std::string im_term = (im == -1.0) ? "i" : format_double(-im) + "*i";
    std::string re_part = (re >= 0.0) ? format_double(re) : "-" + format_double(-re);
    return {re_part + "-" + im_term, kAdd};
}

std::string parenthesize(const Printed& p, int min_prec) {
    if (p.prec < min_prec) return "(" + p.text + ")";
    return p.text;
}

Printed print_node(const ExprNode& node) {
    struct Visitor {
        Printed operator()(const ExprNode::Const& n) const { return print_const(n.value); }
        Printed operator()(const ExprNode::Var& n) const { return {n.name, kAtom}; }
        Printed operator()(const ExprNode::Neg& n) const {
            Printed arg = print_node(*n.arg);
            // keep "-" applying to the whole child: parenthesize +-*/ children
            return {"-" + parenthesize(arg, kNeg), kNeg};
        }
        Printed operator()(const ExprNode::Add& n) const {
            Printed l = print_node(*n.lhs), r = print_node(*n.rhs);
            return {parenthesize(l, kAdd) + "+" + parenthesize(r, kAdd + 1), kAdd};
        }
        Printed operator()(const ExprNode::Sub& n) const {
            Printed l = print_node(*n.lhs), r = print_node(*n.rhs);
            return {parenthesize(l, kAdd) + "-" + parenthesize(r, kAdd + 1), kAdd};
        }
        Printed operator()(const ExprNode::Mul& n) const {
            Printed l = print_node(*n.lhs), r = print_node(*n.rhs);
            return {parenthesize(l, kMul) + "*" + parenthesize(r, kMul + 1), kMul};
        }
        Printed operator()(const ExprNode::Div& n) const {
            Printed l = print_node(*n.num), r = print_node(*n.den);
            return {parenthesize(l, kMul) + "/" + parenthesize(r, kMul + 1), kMul};
        }
        Printed operator()(const ExprNode::PowInt& n) const {
            Printed base = print_node(*n.base);
            return {parenthesize(base, kAtom) + "^" + std::to_string(n.exponent), kPow};
        }
        Printed operator()(const ExprNode::Exp& n) const {
            return {"exp(" + print_node(*n.arg).text + ")", kAtom};
        }
    };
    return std::visit(Visitor{}, node.v);
}

}  // namespace

std::string Expr::to_string() const { return print_node(*node_).text; }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse() {
        Expr e = parse_expression();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool match(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expression() {
        Expr left = parse_term();
        while (true) {
            char c = peek();
            if (c == '+') {
                ++pos_;
                left = left + parse_term();
            } else if (c == '-') {
                ++pos_;
                left = left - parse_term();
            } else {
                return left;
            }
        }
    }

    Expr parse_term() {
        Expr left = parse_factor();
        while (true) {
            char c = peek();
            if (c == '*') {
                ++pos_;
                left = left * parse_factor();
            } else if (c == '/') {
                ++pos_;
                left = left / parse_factor();
            } else {
                return left;
            }
        }
    }

    Expr parse_factor() {
        if (match('-')) return -parse_factor();
        Expr base = parse_base();
        if (peek() == '^') {
            ++pos_;
            long n = parse_exponent_chain();
            base = base.pow(n);
        }
        return base;
    }

    // Right-associative integer exponent chain: z^2^3 == z^(2^3).
    long parse_exponent_chain() {
        long v = parse_int_literal();
        if (peek() == '^') {
            ++pos_;
            long e = parse_exponent_chain();
            if (e < 0) fail("exponent chain yields a non-integer");
            long acc = 1;
            for (long k = 0; k < e; ++k) {
                if (std::abs(acc) > 1000000000L / std::max(std::abs(v), 1L))
                    fail("exponent overflow");
                acc *= v;
            }
            v = acc;
        }
        return v;
    }

    long parse_int_literal() {
        skip_ws();
        std::size_t start = pos_;
        bool negative = false;
        if (pos_ < src_.size() && src_[pos_] == '-') {
            negative = true;
            ++pos_;
        }
        std::size_t digits_start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == digits_start) fail("expected integer exponent");
        if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
            pos_ = start;
            fail("exponent must be an integer");
        }
        long value = 0;
        auto [ptr, ec] =
            std::from_chars(src_.data() + digits_start, src_.data() + pos_, value);
        (void)ptr;
        if (ec != std::errc()) fail("exponent out of range");
        return negative ? -value : value;
    }

    Expr parse_base() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expression();
            if (!match(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (c == '-') {  // permitted by the written grammar: base := '-' base
            ++pos_;
            return -parse_base();
        }
        fail("expected a number, variable, 'i', function call, or '('");
    }

    Expr parse_number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && src_[start] == '.')) {
            pos_ = start;
            fail("expected number");
        }
        // optional scientific exponent, only when it is unambiguous
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() &&
                       std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to something else; not ours
            }
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        (void)ptr;
        if (ec != std::errc()) fail("malformed number");
        return Expr::constant(value);
    }

    Expr parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (peek() == '(') {
            if (name != "exp") {
                pos_ = start;
                fail("unknown function '" + name + "' (only exp is available)");
            }
            ++pos_;
            Expr arg = parse_expression();
            if (!match(')')) fail("expected ')'");
            return Expr::exp(arg);
        }
        if (name == "i") return Expr::i();
        return Expr::variable(std::move(name));
    }
};

}  // namespace

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

}  // namespace lagflow
