#include <cctype>
#include <charconv>

#include "cxlag/errors.hpp"
#include "cxlag/expr.hpp"

namespace cxlag {

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse_all()
    {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) {
            fail({"operator", "end of input"});
        }
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])) != 0) {
            ++pos_;
        }
    }

    [[nodiscard]] char peek()
    {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    [[noreturn]] void fail(std::vector<std::string> expected)
    {
        std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
        throw SyntaxError(pos_, std::move(expected), found);
    }

    Expr parse_expr()
    {
        auto lhs = parse_term();
        for (;;) {
            const char c = peek();
            if (c != '+' && c != '-') {
                return lhs;
            }
            ++pos_;
            auto rhs = parse_term();
            lhs = Expr::binary(c == '+' ? Op::add : Op::sub, std::move(lhs), std::move(rhs));
        }
    }

    Expr parse_term()
    {
        auto lhs = parse_unary();
        for (;;) {
            const char c = peek();
            if (c != '*' && c != '/') {
                return lhs;
            }
            ++pos_;
            auto rhs = parse_unary();
            lhs = Expr::binary(c == '*' ? Op::mul : Op::div, std::move(lhs), std::move(rhs));
        }
    }

    Expr parse_unary()
    {
        if (peek() == '-') {
            ++pos_;
            return -parse_unary();
        }
        return parse_power();
    }

    Expr parse_power()
    {
        auto base = parse_primary();
        if (peek() == '^') {
            ++pos_;
            return pow(base, parse_unary());
        }
        return base;
    }

    Expr parse_primary()
    {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            auto inner = parse_expr();
            if (peek() != ')') {
                fail({"')'", "operator"});
            }
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
            return parse_identifier();
        }
        fail({"number", "identifier", "'('", "'-'"});
    }

    Expr parse_number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            pos_ = start;
            fail({"number"});
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                ++pos_;
            }
            if (digits() == 0) {
                fail({"exponent digits"});
            }
        }
        double value = 0.0;
        const auto *first = src_.data() + start;
        const auto *last = src_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) {
            pos_ = start;
            fail({"number"});
        }
        return Expr(value);
    }

    Expr parse_identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) != 0 || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));
        if (peek() == '(') {
            const auto op = function_from_name(name);
            if (!op) {
                throw UnknownFunction(name);
            }
            ++pos_;
            auto arg = parse_expr();
            if (peek() != ')') {
                fail({"')'", "operator"});
            }
            ++pos_;
            return Expr::unary(*op, std::move(arg));
        }
        if (name == "i") {
            return Expr::imaginary_unit();
        }
        return Expr::symbol(name);
    }
};

} // namespace

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

} // namespace cxlag
