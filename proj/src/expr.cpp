#include "cxlag/expr.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

struct Expr::Node {
    Op op = Op::constant;
    complex value{};
    std::string name;
    std::vector<Expr> args;
};

namespace {

const std::array<std::pair<std::string_view, Op>, 6> function_table{{
    {"sin", Op::sin},
    {"cos", Op::cos},
    {"exp", Op::exp},
    {"ln", Op::ln},
    {"sqrt", Op::sqrt},
    {"tanh", Op::tanh},
}};

bool is_real(const complex &z) noexcept { return z.imag() == 0.0; }

// Integer exponents are evaluated with libm pow on real bases (exact for small results) and by
// repeated squaring on complex bases.
std::optional<long> integral_exponent(const complex &b) noexcept
{
    if (!is_real(b)) {
        return std::nullopt;
    }
    const double r = b.real();
    if (!std::isfinite(r) || std::trunc(r) != r || std::abs(r) > 1 << 20) {
        return std::nullopt;
    }
    return static_cast<long>(r);
}

complex complex_ipow(complex base, long n)
{
    const bool invert = n < 0;
    unsigned long k = invert ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    complex acc{1.0, 0.0};
    while (k != 0) {
        if (k & 1UL) {
            acc *= base;
        }
        base *= base;
        k >>= 1U;
    }
    return invert ? complex{1.0, 0.0} / acc : acc;
}

} // namespace

bool is_function(Op op) noexcept
{
    switch (op) {
        case Op::sin:
        case Op::cos:
        case Op::exp:
        case Op::ln:
        case Op::sqrt:
        case Op::tanh:
            return true;
        default:
            return false;
    }
}

std::string_view function_name(Op op)
{
    for (const auto &[name, fop] : function_table) {
        if (fop == op) {
            return name;
        }
    }
    throw Error("not a function operator");
}

std::optional<Op> function_from_name(std::string_view name) noexcept
{
    for (const auto &[fname, fop] : function_table) {
        if (fname == name) {
            return fop;
        }
    }
    return std::nullopt;
}

complex apply_op(Op op, const complex &a, const complex &b)
{
    switch (op) {
        case Op::neg:
            return -a;
        case Op::add:
            return a + b;
        case Op::sub:
            return a - b;
        case Op::mul:
            return a * b;
        case Op::div:
            if (b == complex{}) {
                throw DomainError("division by zero");
            }
            return a / b;
        case Op::pow: {
            if (a == complex{}) {
                if (b == complex{}) {
                    return {1.0, 0.0};
                }
                if (!is_real(b) || b.real() < 0.0) {
                    throw DomainError("zero raised to a negative or complex power");
                }
                return {0.0, 0.0};
            }
            if (is_real(a) && is_real(b) && (a.real() > 0.0 || integral_exponent(b))) {
                return {std::pow(a.real(), b.real()), 0.0};
            }
            if (const auto n = integral_exponent(b)) {
                return complex_ipow(a, *n);
            }
            if (is_real(a) && a.real() < 0.0) {
                throw DomainError(fmt::format("negative real base {} needs an integer exponent", a.real()));
            }
            return std::pow(a, b);
        }
        case Op::sin:
            return is_real(a) ? complex{std::sin(a.real()), 0.0} : std::sin(a);
        case Op::cos:
            return is_real(a) ? complex{std::cos(a.real()), 0.0} : std::cos(a);
        case Op::exp:
            return is_real(a) ? complex{std::exp(a.real()), 0.0} : std::exp(a);
        case Op::tanh:
            return is_real(a) ? complex{std::tanh(a.real()), 0.0} : std::tanh(a);
        case Op::ln:
            if (is_real(a)) {
                if (a.real() <= 0.0) {
                    throw DomainError(fmt::format("ln of nonpositive real {}", a.real()));
                }
                return {std::log(a.real()), 0.0};
            }
            return std::log(a);
        case Op::sqrt:
            if (is_real(a)) {
                if (a.real() < 0.0) {
                    throw DomainError(fmt::format("sqrt of negative real {}", a.real()));
                }
                return {std::sqrt(a.real()), 0.0};
            }
            return std::sqrt(a);
        case Op::constant:
        case Op::symbol:
            break;
    }
    throw Error("apply_op() called on a leaf node");
}

// ---------------------------------------------------------------------------------------------
// Expr

Expr::Expr()
{
    static const auto zero = std::make_shared<const Node>();
    node_ = zero;
}

Expr::Expr(complex value)
{
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = value;
    node_ = std::move(n);
}

Expr Expr::symbol(std::string name)
{
    auto n = std::make_shared<Node>();
    n->op = Op::symbol;
    n->name = std::move(name);
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::unary(Op op, Expr arg)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args.push_back(std::move(arg));
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args.reserve(2);
    n->args.push_back(std::move(lhs));
    n->args.push_back(std::move(rhs));
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const noexcept { return node_->op; }
const complex &Expr::value() const noexcept { return node_->value; }
const std::string &Expr::name() const noexcept { return node_->name; }
std::span<const Expr> Expr::args() const noexcept { return node_->args; }

bool Expr::is_zero() const noexcept { return is_constant() && value() == complex{}; }
bool Expr::is_one() const noexcept { return is_constant() && value() == complex{1.0, 0.0}; }
bool Expr::is_real_constant() const noexcept { return is_constant() && value().imag() == 0.0; }

Expr operator+(const Expr &a, const Expr &b) { return Expr::binary(Op::add, a, b); }
Expr operator-(const Expr &a, const Expr &b) { return Expr::binary(Op::sub, a, b); }
Expr operator*(const Expr &a, const Expr &b) { return Expr::binary(Op::mul, a, b); }
Expr operator/(const Expr &a, const Expr &b) { return Expr::binary(Op::div, a, b); }
Expr operator-(const Expr &a) { return Expr::unary(Op::neg, a); }
Expr pow(const Expr &base, const Expr &exponent) { return Expr::binary(Op::pow, base, exponent); }
Expr sin(const Expr &a) { return Expr::unary(Op::sin, a); }
Expr cos(const Expr &a) { return Expr::unary(Op::cos, a); }
Expr exp(const Expr &a) { return Expr::unary(Op::exp, a); }
Expr ln(const Expr &a) { return Expr::unary(Op::ln, a); }
Expr sqrt(const Expr &a) { return Expr::unary(Op::sqrt, a); }
Expr tanh(const Expr &a) { return Expr::unary(Op::tanh, a); }

bool structurally_equal(const Expr &a, const Expr &b)
{
    if (a.same_node(b)) {
        return true;
    }
    if (a.op() != b.op()) {
        return false;
    }
    switch (a.op()) {
        case Op::constant:
            return a.value() == b.value() && std::signbit(a.value().real()) == std::signbit(b.value().real());
        case Op::symbol:
            return a.name() == b.name();
        default:
            break;
    }
    if (a.args().size() != b.args().size()) {
        return false;
    }
    for (std::size_t k = 0; k < a.args().size(); ++k) {
        if (!structurally_equal(a.arg(k), b.arg(k))) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Simplifying builders

namespace {

std::optional<Expr> try_fold(Op op, const Expr &a, const Expr *b)
{
    if (!a.is_constant() || (b != nullptr && !b->is_constant())) {
        return std::nullopt;
    }
    try {
        return Expr(apply_op(op, a.value(), b != nullptr ? b->value() : complex{}));
    } catch (const DomainError &) {
        return std::nullopt;
    }
}

bool is_minus_one(const Expr &e) noexcept { return e.is_constant() && e.value() == complex{-1.0, 0.0}; }

Expr s_neg(const Expr &a)
{
    if (auto f = try_fold(Op::neg, a, nullptr)) {
        return *f;
    }
    if (a.op() == Op::neg) {
        return a.arg(0);
    }
    return -a;
}

Expr s_add(const Expr &a, const Expr &b)
{
    if (auto f = try_fold(Op::add, a, &b)) {
        return *f;
    }
    if (a.is_zero()) {
        return b;
    }
    if (b.is_zero()) {
        return a;
    }
    return a + b;
}

Expr s_sub(const Expr &a, const Expr &b)
{
    if (auto f = try_fold(Op::sub, a, &b)) {
        return *f;
    }
    if (b.is_zero()) {
        return a;
    }
    if (a.is_zero()) {
        return s_neg(b);
    }
    return a - b;
}

Expr s_mul(const Expr &a, const Expr &b)
{
    if (auto f = try_fold(Op::mul, a, &b)) {
        return *f;
    }
    if (a.is_zero() || b.is_zero()) {
        return Expr{};
    }
    if (a.is_one()) {
        return b;
    }
    if (b.is_one()) {
        return a;
    }
    if (is_minus_one(a)) {
        return s_neg(b);
    }
    if (is_minus_one(b)) {
        return s_neg(a);
    }
    return a * b;
}

Expr s_div(const Expr &a, const Expr &b)
{
    if (auto f = try_fold(Op::div, a, &b)) {
        return *f;
    }
    if (b.is_one()) {
        return a;
    }
    if (a.is_zero() && b.is_constant() && !b.is_zero()) {
        return Expr{};
    }
    return a / b;
}

Expr s_pow(const Expr &a, const Expr &b)
{
    if (auto f = try_fold(Op::pow, a, &b)) {
        return *f;
    }
    if (b.is_one()) {
        return a;
    }
    if (b.is_zero() || a.is_one()) {
        return Expr(1.0);
    }
    return pow(a, b);
}

Expr s_func(Op op, const Expr &a)
{
    if (auto f = try_fold(op, a, nullptr)) {
        return *f;
    }
    return Expr::unary(op, a);
}

Expr rebuild(Op op, const Expr &a, const Expr &b)
{
    switch (op) {
        case Op::add:
            return s_add(a, b);
        case Op::sub:
            return s_sub(a, b);
        case Op::mul:
            return s_mul(a, b);
        case Op::div:
            return s_div(a, b);
        case Op::pow:
            return s_pow(a, b);
        default:
            break;
    }
    throw Error("rebuild() on non-binary operator");
}

} // namespace

Expr simplify(const Expr &e)
{
    switch (e.op()) {
        case Op::constant:
        case Op::symbol:
            return e;
        case Op::neg:
            return s_neg(simplify(e.arg(0)));
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow:
            return rebuild(e.op(), simplify(e.arg(0)), simplify(e.arg(1)));
        default:
            return s_func(e.op(), simplify(e.arg(0)));
    }
}

// ---------------------------------------------------------------------------------------------
// Differentiation

bool depends_on(const Expr &e, std::string_view s)
{
    if (e.is_symbol()) {
        return e.name() == s;
    }
    for (const auto &a : e.args()) {
        if (depends_on(a, s)) {
            return true;
        }
    }
    return false;
}

namespace {

Expr diff_impl(const Expr &e, std::string_view s)
{
    if (!depends_on(e, s)) {
        return Expr{};
    }
    switch (e.op()) {
        case Op::constant:
            return Expr{};
        case Op::symbol:
            return Expr(1.0);
        case Op::neg:
            return s_neg(diff_impl(e.arg(0), s));
        case Op::add:
            return s_add(diff_impl(e.arg(0), s), diff_impl(e.arg(1), s));
        case Op::sub:
            return s_sub(diff_impl(e.arg(0), s), diff_impl(e.arg(1), s));
        case Op::mul: {
            const auto &a = e.arg(0);
            const auto &b = e.arg(1);
            return s_add(s_mul(diff_impl(a, s), b), s_mul(a, diff_impl(b, s)));
        }
        case Op::div: {
            const auto &a = e.arg(0);
            const auto &b = e.arg(1);
            if (!depends_on(b, s)) {
                return s_div(diff_impl(a, s), b);
            }
            return s_div(s_sub(s_mul(diff_impl(a, s), b), s_mul(a, diff_impl(b, s))), s_pow(b, Expr(2.0)));
        }
        case Op::pow: {
            const auto &a = e.arg(0);
            const auto &b = e.arg(1);
            if (!depends_on(b, s)) {
                return s_mul(s_mul(b, s_pow(a, s_sub(b, Expr(1.0)))), diff_impl(a, s));
            }
            if (!depends_on(a, s)) {
                return s_mul(s_mul(e, s_func(Op::ln, a)), diff_impl(b, s));
            }
            return s_mul(e, s_add(s_mul(diff_impl(b, s), s_func(Op::ln, a)),
                                  s_div(s_mul(b, diff_impl(a, s)), a)));
        }
        case Op::sin:
            return s_mul(s_func(Op::cos, e.arg(0)), diff_impl(e.arg(0), s));
        case Op::cos:
            return s_mul(s_neg(s_func(Op::sin, e.arg(0))), diff_impl(e.arg(0), s));
        case Op::exp:
            return s_mul(e, diff_impl(e.arg(0), s));
        case Op::ln:
            return s_div(diff_impl(e.arg(0), s), e.arg(0));
        case Op::sqrt:
            return s_div(diff_impl(e.arg(0), s), s_mul(Expr(2.0), e));
        case Op::tanh:
            return s_mul(s_sub(Expr(1.0), s_pow(e, Expr(2.0))), diff_impl(e.arg(0), s));
    }
    throw Error("diff(): unhandled operator");
}

} // namespace

Expr diff(const Expr &e, std::string_view s) { return simplify(diff_impl(e, s)); }

// ---------------------------------------------------------------------------------------------
// Printing and inspection

namespace {

std::string print_real(double x)
{
    auto text = fmt::format("{:.17g}", x);
    if (std::signbit(x)) {
        return "(" + text + ")";
    }
    return text;
}

void print_into(const Expr &e, std::string &out)
{
    switch (e.op()) {
        case Op::constant: {
            const auto &z = e.value();
            if (z.imag() == 0.0) {
                out += print_real(z.real());
            } else if (z.real() == 0.0 && !std::signbit(z.real())) {
                out += fmt::format("({:.17g}*i)", z.imag());
            } else {
                out += fmt::format("({}+({:.17g}*i))", print_real(z.real()), z.imag());
            }
            return;
        }
        case Op::symbol:
            out += e.name();
            return;
        case Op::neg:
            out += "(-";
            print_into(e.arg(0), out);
            out += ')';
            return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow: {
            static constexpr std::string_view symbols = "+-*/^";
            const auto idx = static_cast<std::size_t>(e.op()) - static_cast<std::size_t>(Op::add);
            out += '(';
            print_into(e.arg(0), out);
            out += symbols[idx];
            print_into(e.arg(1), out);
            out += ')';
            return;
        }
        default:
            out += function_name(e.op());
            out += '(';
            print_into(e.arg(0), out);
            out += ')';
            return;
    }
}

void collect_symbols(const Expr &e, std::set<std::string> &out)
{
    if (e.is_symbol()) {
        out.insert(e.name());
        return;
    }
    for (const auto &a : e.args()) {
        collect_symbols(a, out);
    }
}

} // namespace

std::string print(const Expr &e)
{
    std::string out;
    print_into(e, out);
    return out;
}

std::set<std::string> free_symbols(const Expr &e)
{
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

std::size_t node_count(const Expr &e)
{
    std::size_t n = 1;
    for (const auto &a : e.args()) {
        n += node_count(a);
    }
    return n;
}

Expr substitute(const Expr &e, const std::map<std::string, Expr, std::less<>> &replacements)
{
    switch (e.op()) {
        case Op::constant:
            return e;
        case Op::symbol: {
            const auto it = replacements.find(e.name());
            return it == replacements.end() ? e : it->second;
        }
        case Op::neg:
            return -substitute(e.arg(0), replacements);
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow:
            return Expr::binary(e.op(), substitute(e.arg(0), replacements), substitute(e.arg(1), replacements));
        default:
            return Expr::unary(e.op(), substitute(e.arg(0), replacements));
    }
}

// ---------------------------------------------------------------------------------------------
// Real/imaginary split

std::optional<std::pair<Expr, Expr>> split_complex(const Expr &e)
{
    using Parts = std::pair<Expr, Expr>;
    const auto cosh = [](const Expr &b) {
        return s_div(s_add(s_func(Op::exp, b), s_func(Op::exp, s_neg(b))), Expr(2.0));
    };
    const auto sinh = [](const Expr &b) {
        return s_div(s_sub(s_func(Op::exp, b), s_func(Op::exp, s_neg(b))), Expr(2.0));
    };

    switch (e.op()) {
        case Op::constant:
            return Parts{Expr(e.value().real()), Expr(e.value().imag())};
        case Op::symbol:
            return Parts{e, Expr{}};
        default:
            break;
    }

    std::vector<Parts> parts;
    for (const auto &a : e.args()) {
        auto p = split_complex(a);
        if (!p) {
            return std::nullopt;
        }
        parts.push_back(std::move(*p));
    }
    const auto &[a, b] = parts[0];

    switch (e.op()) {
        case Op::neg:
            return Parts{s_neg(a), s_neg(b)};
        case Op::add:
            return Parts{s_add(a, parts[1].first), s_add(b, parts[1].second)};
        case Op::sub:
            return Parts{s_sub(a, parts[1].first), s_sub(b, parts[1].second)};
        case Op::mul: {
            const auto &[c, d] = parts[1];
            return Parts{s_sub(s_mul(a, c), s_mul(b, d)), s_add(s_mul(a, d), s_mul(b, c))};
        }
        case Op::div: {
            const auto &[c, d] = parts[1];
            if (d.is_zero()) {
                return Parts{s_div(a, c), s_div(b, c)};
            }
            const auto den = s_add(s_mul(c, c), s_mul(d, d));
            return Parts{s_div(s_add(s_mul(a, c), s_mul(b, d)), den), s_div(s_sub(s_mul(b, c), s_mul(a, d)), den)};
        }
        case Op::pow: {
            const auto &[c, d] = parts[1];
            if (b.is_zero() && d.is_zero()) {
                return Parts{s_pow(a, c), Expr{}};
            }
            const auto &exponent = e.arg(1);
            if (exponent.is_real_constant()) {
                const double r = exponent.value().real();
                if (r >= 0.0 && r <= 16.0 && std::trunc(r) == r) {
                    Parts acc{Expr(1.0), Expr{}};
                    for (int k = 0; k < static_cast<int>(r); ++k) {
                        acc = Parts{s_sub(s_mul(acc.first, a), s_mul(acc.second, b)),
                                    s_add(s_mul(acc.first, b), s_mul(acc.second, a))};
                    }
                    return acc;
                }
            }
            if (b.is_zero()) {
                // a^(c + i d) = a^c (cos(d ln a) + i sin(d ln a)), a > 0
                const auto mag = s_pow(a, c);
                const auto phase = s_mul(d, s_func(Op::ln, a));
                return Parts{s_mul(mag, s_func(Op::cos, phase)), s_mul(mag, s_func(Op::sin, phase))};
            }
            return std::nullopt;
        }
        case Op::sin:
            if (b.is_zero()) {
                return Parts{s_func(Op::sin, a), Expr{}};
            }
            return Parts{s_mul(s_func(Op::sin, a), cosh(b)), s_mul(s_func(Op::cos, a), sinh(b))};
        case Op::cos:
            if (b.is_zero()) {
                return Parts{s_func(Op::cos, a), Expr{}};
            }
            return Parts{s_mul(s_func(Op::cos, a), cosh(b)), s_neg(s_mul(s_func(Op::sin, a), sinh(b)))};
        case Op::exp: {
            if (b.is_zero()) {
                return Parts{s_func(Op::exp, a), Expr{}};
            }
            const auto mag = s_func(Op::exp, a);
            return Parts{s_mul(mag, s_func(Op::cos, b)), s_mul(mag, s_func(Op::sin, b))};
        }
        case Op::ln:
        case Op::sqrt:
        case Op::tanh:
            if (b.is_zero()) {
                return Parts{s_func(e.op(), a), Expr{}};
            }
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

// ---------------------------------------------------------------------------------------------
// Evaluation

complex eval(const Expr &e, const Bindings &bindings)
{
    switch (e.op()) {
        case Op::constant:
            return e.value();
        case Op::symbol: {
            const auto it = bindings.find(e.name());
            if (it == bindings.end()) {
                throw UnboundSymbol(e.name());
            }
            if (!std::isfinite(it->second)) {
                throw DomainError(fmt::format("binding '{}' is not finite", e.name()));
            }
            return {it->second, 0.0};
        }
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow: {
            const auto lhs = eval(e.arg(0), bindings);
            const auto rhs = eval(e.arg(1), bindings);
            return apply_op(e.op(), lhs, rhs);
        }
        default:
            return apply_op(e.op(), eval(e.arg(0), bindings));
    }
}

SymbolLayout::SymbolLayout(std::vector<std::string> names) : names_(std::move(names)) {}

std::optional<std::size_t> SymbolLayout::index_of(std::string_view name) const noexcept
{
    for (std::size_t k = 0; k < names_.size(); ++k) {
        if (names_[k] == name) {
            return k;
        }
    }
    return std::nullopt;
}

namespace {

std::size_t compile_into(const Expr &e, const SymbolLayout &layout, auto &code, std::size_t depth)
{
    using Instr = std::remove_cvref_t<decltype(code.front())>;
    switch (e.op()) {
        case Op::constant:
            code.push_back(Instr{Op::constant, 0, e.value()});
            return depth + 1;
        case Op::symbol: {
            const auto slot = layout.index_of(e.name());
            if (!slot) {
                throw UnboundSymbol(e.name());
            }
            code.push_back(Instr{Op::symbol, static_cast<std::uint32_t>(*slot), {}});
            return depth + 1;
        }
        default:
            break;
    }
    std::size_t peak = depth;
    std::size_t current = depth;
    for (const auto &a : e.args()) {
        peak = std::max(peak, compile_into(a, layout, code, current));
        ++current;
    }
    code.push_back(Instr{e.op(), 0, {}});
    return peak;
}

} // namespace

Program::Program(const Expr &e, const SymbolLayout &layout)
{
    max_depth_ = compile_into(e, layout, code_, 0);
}

complex Program::operator()(std::span<const double> slots) const
{
    constexpr std::size_t inline_capacity = 48;
    std::array<complex, inline_capacity> inline_stack;
    std::vector<complex> heap_stack;
    complex *stack = inline_stack.data();
    if (max_depth_ > inline_capacity) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    for (const auto &ins : code_) {
        switch (ins.op) {
            case Op::constant:
                stack[top++] = ins.value;
                break;
            case Op::symbol:
                stack[top++] = complex{slots[ins.slot], 0.0};
                break;
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
            case Op::pow:
                --top;
                stack[top - 1] = apply_op(ins.op, stack[top - 1], stack[top]);
                break;
            default:
                stack[top - 1] = apply_op(ins.op, stack[top - 1]);
                break;
        }
    }
    return top == 0 ? complex{} : stack[0];
}

} // namespace cxlag
