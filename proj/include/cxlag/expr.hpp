#pragma once

// Expression engine: immutable trees over real symbols with complex constants.
//
// Grammar accepted by parse():
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right-associative, binds tighter than unary minus)
//   primary := number | 'i' | identifier | identifier '(' expr ')' | '(' expr ')'
// Functions: sin cos exp ln sqrt tanh.  The bare identifier `i` is the imaginary unit.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cxlag {

using complex = std::complex<double>;

enum class Op : std::uint8_t { constant, symbol, neg, add, sub, mul, div, pow, sin, cos, exp, ln, sqrt, tanh };

[[nodiscard]] bool is_function(Op op) noexcept;
[[nodiscard]] std::string_view function_name(Op op);
[[nodiscard]] std::optional<Op> function_from_name(std::string_view name) noexcept;

class Expr {
public:
    /// The zero constant.
    Expr();
    Expr(complex value);
    Expr(double value) : Expr(complex{value, 0.0}) {}
    Expr(int value) : Expr(complex{static_cast<double>(value), 0.0}) {}

    static Expr symbol(std::string name);
    static Expr imaginary_unit() { return Expr(complex{0.0, 1.0}); }

    /// Structural constructors; no simplification is applied.
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);

    [[nodiscard]] Op op() const noexcept;
    [[nodiscard]] const complex &value() const noexcept;
    [[nodiscard]] const std::string &name() const noexcept;
    [[nodiscard]] std::span<const Expr> args() const noexcept;
    [[nodiscard]] const Expr &arg(std::size_t k) const { return args()[k]; }

    [[nodiscard]] bool is_constant() const noexcept { return op() == Op::constant; }
    [[nodiscard]] bool is_symbol() const noexcept { return op() == Op::symbol; }
    [[nodiscard]] bool is_zero() const noexcept;
    [[nodiscard]] bool is_one() const noexcept;
    [[nodiscard]] bool is_real_constant() const noexcept;

    /// Node identity (shared subtrees compare equal without a deep walk).
    [[nodiscard]] bool same_node(const Expr &other) const noexcept { return node_ == other.node_; }

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// Structural builders.  These do not simplify; use simplify() or diff() for folded trees.
Expr operator+(const Expr &a, const Expr &b);
Expr operator-(const Expr &a, const Expr &b);
Expr operator*(const Expr &a, const Expr &b);
Expr operator/(const Expr &a, const Expr &b);
Expr operator-(const Expr &a);
Expr pow(const Expr &base, const Expr &exponent);
Expr sin(const Expr &a);
Expr cos(const Expr &a);
Expr exp(const Expr &a);
Expr ln(const Expr &a);
Expr sqrt(const Expr &a);
Expr tanh(const Expr &a);

/// Deep structural equality (constants compared bitwise).
[[nodiscard]] bool structurally_equal(const Expr &a, const Expr &b);

Expr parse(std::string_view source);

/// Exact partial derivative with respect to the real symbol `s`, returned simplified.
Expr diff(const Expr &e, std::string_view s);

/// Constant folding and identity elimination (x+0, x*1, x*0, x^1, --x).  No algebraic rewriting.
Expr simplify(const Expr &e);

/// Fully parenthesised text that parse() accepts; constants carry 17 significant digits.
std::string print(const Expr &e);

std::set<std::string> free_symbols(const Expr &e);
bool depends_on(const Expr &e, std::string_view s);
std::size_t node_count(const Expr &e);

/// Replace symbols by expressions (used to bind parameters or rename coordinates).
Expr substitute(const Expr &e, const std::map<std::string, Expr, std::less<>> &replacements);

/// Real and imaginary parts as real-valued trees, when they can be expressed in the supported
/// operator set.  Returns nullopt for e.g. ln or sqrt of a complex-valued argument.
std::optional<std::pair<Expr, Expr>> split_complex(const Expr &e);

using Bindings = std::map<std::string, double, std::less<>>;

/// Reference tree-walking evaluator.
complex eval(const Expr &e, const Bindings &bindings);

/// Evaluation rule shared by every evaluator, so the tree walker and compiled programs round
/// identically.  Throws DomainError.
complex apply_op(Op op, const complex &a, const complex &b = {});

/// Ordered symbol slots for compiled evaluation.
class SymbolLayout {
public:
    SymbolLayout() = default;
    explicit SymbolLayout(std::vector<std::string> names);

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const noexcept;
    [[nodiscard]] const std::vector<std::string> &names() const noexcept { return names_; }
    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
};

/// Expression compiled to a postfix program over a SymbolLayout.  Immutable and thread-safe.
class Program {
public:
    Program() = default;
    Program(const Expr &e, const SymbolLayout &layout);

    [[nodiscard]] complex operator()(std::span<const double> slots) const;
    [[nodiscard]] double real(std::span<const double> slots) const { return (*this)(slots).real(); }

    [[nodiscard]] std::size_t size() const noexcept { return code_.size(); }

private:
    struct Instr {
        Op op;
        std::uint32_t slot;
        complex value;
    };
    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
};

} // namespace cxlag
