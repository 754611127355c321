#include <cmath>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "cxlag/errors.hpp"
#include "cxlag/expr.hpp"
#include "cxlag/sampling.hpp"
#include "support.hpp"

using namespace cxlag;
using testing_support::close;
using testing_support::fd4;

namespace {

complex at(const std::string &text, const Bindings &b) { return eval(parse(text), b); }

} // namespace

TEST(Parse, OscillatorLagrangian)
{
    const auto e = parse("0.5*m*qd^2 - 0.5*k*q^2");
    EXPECT_EQ(free_symbols(e), (std::set<std::string>{"k", "m", "q", "qd"}));
    EXPECT_EQ(eval(e, {{"m", 2}, {"k", 3}, {"q", 1}, {"qd", 2}}), complex(4.0 - 1.5, 0.0));
}

TEST(Parse, PureImaginaryLagrangianHasNoRealPart)
{
    const auto e = parse("i*(0.5*m*qd^2 - 0.5*k*q^2)");
    Lcg64 rng(7);
    for (int k = 0; k < 20; ++k) {
        const Bindings b{{"m", rng.uniform(0.5, 2)}, {"k", rng.uniform(0.5, 2)}, {"q", rng.uniform(-2, 2)},
                         {"qd", rng.uniform(-2, 2)}};
        EXPECT_EQ(eval(e, b).real(), 0.0);
    }
}

TEST(Parse, SyntaxErrorReportsOffset)
{
    try {
        (void)parse("q*(");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError &e) {
        EXPECT_EQ(e.position(), 3U);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(Parse, MalformedInputs)
{
    for (const char *bad : {"", "q +", "(q", "q)", "2**q", "sin()", "q qd", "1e", "."}) {
        EXPECT_THROW((void)parse(bad), SyntaxError) << bad;
    }
}

TEST(Parse, UnknownFunction)
{
    try {
        (void)parse("foo(q)");
        FAIL() << "expected UnknownFunction";
    } catch (const UnknownFunction &e) {
        EXPECT_EQ(e.name(), "foo");
    }
}

TEST(Parse, Precedence)
{
    EXPECT_EQ(at("2^3^2", {}), complex(512.0));   // right-associative
    EXPECT_EQ(at("-2^2", {}), complex(-4.0));     // ^ binds tighter than unary minus
    EXPECT_EQ(at("2^-1", {}), complex(0.5));
    EXPECT_EQ(at("1 - 2 - 3", {}), complex(-4.0));
    EXPECT_EQ(at("8 / 4 / 2", {}), complex(1.0));
    EXPECT_EQ(at("1 + 2*3", {}), complex(7.0));
    EXPECT_EQ(at("1.5e2 + 2E-1", {}), complex(150.2));
}

TEST(Eval, Examples)
{
    EXPECT_EQ(at("i*i", {}), complex(-1.0, 0.0));
    EXPECT_EQ(at("0.5*m*qd^2", {{"m", 1}, {"qd", 2}}), complex(2.0));
    EXPECT_EQ(at("i*0.5*(m*qd^2 - k*q^2)", {{"m", 1}, {"k", 1}, {"q", 1}, {"qd", 0}}), complex(0.0, -0.5));
}

TEST(Eval, Errors)
{
    EXPECT_THROW((void)at("ln(q)", {{"q", 0.0}}), DomainError);
    EXPECT_THROW((void)at("ln(q)", {{"q", -1.0}}), DomainError);
    EXPECT_THROW((void)at("1/q", {{"q", 0.0}}), DomainError);
    EXPECT_THROW((void)at("q^(-1)", {{"q", 0.0}}), DomainError);
    EXPECT_THROW((void)at("q + qd", {{"q", 1.0}}), UnboundSymbol);
    EXPECT_THROW((void)at("q", {{"q", std::nan("")}}), DomainError);
    EXPECT_THROW((void)at("q", {{"q", INFINITY}}), DomainError);
    EXPECT_THROW((void)at("sqrt(q)", {{"q", -1.0}}), DomainError);
    EXPECT_THROW((void)at("q^0.5", {{"q", -1.0}}), DomainError);
    EXPECT_EQ(at("q^3", {{"q", -2.0}}), complex(-8.0));
    EXPECT_EQ(at("sqrt(i*i*q)", {{"q", -4.0}}), complex(2.0));
}

TEST(Diff, Examples)
{
    EXPECT_EQ(print(diff(parse("q^2"), "q")), "(2*q)");
    const auto d = diff(parse("i*a0*q*qd"), "qd");
    EXPECT_EQ(eval(d, {{"a0", 1.5}, {"q", 2}}), complex(0.0, 3.0));
}

TEST(Simplify, Examples)
{
    EXPECT_EQ(print(simplify(parse("0*qd + q*1"))), "q");
    const auto d = diff(parse("q^2"), "q");
    EXPECT_TRUE(structurally_equal(d, simplify(parse("2*q"))));
    EXPECT_EQ(print(simplify(parse("x^1 + 0"))), "x");
    EXPECT_EQ(print(simplify(parse("--x"))), "x");
    EXPECT_EQ(print(simplify(parse("(2+3)*x"))), "(5*x)");
}

namespace {

// Random tree over {q, qd, t} and small constants, with function arguments kept in their domains.
Expr random_expr(Lcg64 &rng, int depth, bool complex_ok = true)
{
    const auto leaf = [&]() -> Expr {
        switch (rng.below(6)) {
            case 0:
                return Expr::symbol("q");
            case 1:
                return Expr::symbol("qd");
            case 2:
                return Expr::symbol("t");
            case 3:
                return Expr(0.0);
            case 4:
                return Expr(1.0);
            default:
                return Expr(std::round(rng.uniform(-3, 3) * 4) / 4);
        }
    };
    if (depth == 0) {
        return leaf();
    }
    const auto a = random_expr(rng, depth - 1, complex_ok);
    const auto b = random_expr(rng, depth - 1, complex_ok);
    const auto r = random_expr(rng, depth - 1, false);
    switch (rng.below(12)) {
        case 0:
            return a + b;
        case 1:
            return a - b;
        case 2:
        case 3:
            return a * b;
        case 4:
            return a / (Expr(2.0) + a * a);
        case 5:
            return pow(a, Expr(static_cast<double>(rng.below(4))));
        case 6:
            return sin(a);
        case 7:
            return cos(b);
        case 8:
            return exp(tanh(a));
        case 9:
            return ln(Expr(1.0) + r * r);
        case 10:
            return sqrt(Expr(1.0) + r * r);
        default:
            return complex_ok ? -a + Expr::imaginary_unit() * b : -a;
    }
}

} // namespace

TEST(Simplify, PreservesValueOnRandomExpressions)
{
    Lcg64 rng(0xC0FFEE);
    int evaluated = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto e = random_expr(rng, 1 + static_cast<int>(rng.below(4)));
        const Bindings b{{"q", rng.uniform(-2, 2)}, {"qd", rng.uniform(-2, 2)}, {"t", rng.uniform(-2, 2)}};
        const auto s = simplify(e);
        complex want;
        try {
            want = eval(e, b);
        } catch (const DomainError &) {
            EXPECT_THROW((void)eval(s, b), DomainError);
            continue;
        }
        ++evaluated;
        const complex got = eval(s, b);
        EXPECT_LE(std::abs(got - want), 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(want)))
            << print(e) << " -> " << print(s);
        EXPECT_LE(node_count(s), node_count(e));
    }
    EXPECT_GT(evaluated, 900);
}

TEST(Print, RoundTripOnRandomExpressions)
{
    Lcg64 rng(11);
    for (int k = 0; k < 300; ++k) {
        const auto e = random_expr(rng, 3);
        const auto back = parse(print(e));
        const Bindings b{{"q", rng.uniform(-2, 2)}, {"qd", rng.uniform(-2, 2)}, {"t", rng.uniform(-2, 2)}};
        EXPECT_TRUE(close(eval(back, b), eval(e, b), 1e-12)) << print(e);
    }
}

TEST(Print, ComplexAndNegativeConstants)
{
    for (const char *src : {"(-2)*q", "3.25 - 1.5*i", "i*q", "-q", "1e-300*q", "0.1"}) {
        const auto e = parse(src);
        const auto back = parse(print(e));
        EXPECT_EQ(eval(back, {{"q", 0.7}}), eval(e, {{"q", 0.7}})) << src;
    }
}

namespace {

struct OracleCase {
    const char *text;
    double lo;
    double hi;
};

// One expression per node type, arguments restricted to where the function is smooth.
const OracleCase oracle_cases[] = {
    {"q + 3*qd", -2, 2},        {"q - qd*q", -2, 2},        {"q*qd*t", -2, 2},
    {"(q + 1)/(2 + qd^2)", -2, 2}, {"q^3 - qd^4", -2, 2},    {"q^2.5 + qd", 0.2, 2},
    {"2^q", -2, 2},             {"q^qd", 0.2, 2},           {"sin(q*qd)", -2, 2},
    {"cos(2*q - t)", -2, 2},    {"exp(q)*sin(qd)", -2, 2},  {"ln(q + qd^2)", 0.2, 2},
    {"sqrt(q + 3)", -2, 2},     {"tanh(q*qd)", -2, 2},      {"-q*i + exp(i*qd)", -2, 2},
};

} // namespace

TEST(Diff, FourthOrderFiniteDifferenceOracle)
{
    Lcg64 rng(0xC0FFEE);
    for (const auto &c : oracle_cases) {
        const auto e = parse(c.text);
        for (const char *s : {"q", "qd", "t"}) {
            const auto d = diff(e, s);
            for (int k = 0; k < 100; ++k) {
                Bindings b{{"q", rng.uniform(c.lo, c.hi)}, {"qd", rng.uniform(c.lo, c.hi)}, {"t", rng.uniform(-2, 2)}};
                const auto f = [&](double x) {
                    auto bb = b;
                    bb[s] = x;
                    return eval(e, bb);
                };
                EXPECT_TRUE(close(eval(d, b), fd4(f, b.at(s)), 1e-6)) << c.text << " d/d" << s;
            }
        }
    }
}

TEST(Diff, CentralDifferenceOnSpecExample)
{
    const auto e = parse("exp(q)*sin(qd)");
    const auto d = diff(e, "q");
    Lcg64 rng(3);
    for (int k = 0; k < 100; ++k) {
        const double q = rng.uniform(-2, 2);
        const double qd = rng.uniform(-2, 2);
        const double h = 1e-5;
        const complex fd = (eval(e, {{"q", q + h}, {"qd", qd}}) - eval(e, {{"q", q - h}, {"qd", qd}})) / (2 * h);
        EXPECT_TRUE(close(eval(d, {{"q", q}, {"qd", qd}}), fd, 1e-6));
    }
}

TEST(Diff, ClairautSymmetry)
{
    Lcg64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto e = random_expr(rng, 3);
        const auto a = diff(diff(e, "q"), "qd");
        const auto b = diff(diff(e, "qd"), "q");
        const Bindings x{{"q", rng.uniform(-2, 2)}, {"qd", rng.uniform(-2, 2)}, {"t", rng.uniform(-2, 2)}};
        EXPECT_TRUE(close(eval(a, x), eval(b, x), 1e-12)) << print(e);
    }
}

TEST(Diff, Linearity)
{
    Lcg64 rng(9);
    for (int k = 0; k < 200; ++k) {
        const auto e1 = random_expr(rng, 2);
        const auto e2 = random_expr(rng, 2);
        const double a = rng.uniform(-3, 3);
        const double b = rng.uniform(-3, 3);
        const auto combined = diff(Expr(a) * e1 + Expr(b) * e2, "q");
        const Bindings x{{"q", rng.uniform(-2, 2)}, {"qd", rng.uniform(-2, 2)}, {"t", rng.uniform(-2, 2)}};
        const complex want = a * eval(diff(e1, "q"), x) + b * eval(diff(e2, "q"), x);
        EXPECT_TRUE(close(eval(combined, x), want, 1e-12));
    }
}

TEST(Diff, UnrelatedSymbolGivesZero)
{
    EXPECT_TRUE(diff(parse("sin(q)*m"), "qd").is_zero());
}

TEST(SplitComplex, MatchesEvaluation)
{
    Lcg64 rng(13);
    int split = 0;
    for (int k = 0; k < 300; ++k) {
        const auto e = random_expr(rng, 3);
        const auto parts = split_complex(e);
        if (!parts) {
            continue;
        }
        const Bindings x{{"q", rng.uniform(-2, 2)}, {"qd", rng.uniform(-2, 2)}, {"t", rng.uniform(-2, 2)}};
        complex v;
        try {
            v = eval(e, x);
        } catch (const DomainError &) {
            continue;
        }
        ++split;
        const complex re = eval(parts->first, x);
        const complex im = eval(parts->second, x);
        EXPECT_NEAR(re.imag(), 0.0, 1e-12);
        EXPECT_NEAR(im.imag(), 0.0, 1e-12);
        EXPECT_TRUE(close(complex(re.real(), im.real()), v, 1e-10)) << print(e);
    }
    EXPECT_GT(split, 200);
}

TEST(Program, AgreesWithTreeWalk)
{
    Lcg64 rng(17);
    const SymbolLayout layout({"t", "q", "qd"});
    for (int k = 0; k < 300; ++k) {
        const auto e = random_expr(rng, 4);
        const Program p(e, layout);
        const std::vector<double> slots{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const complex want = eval(e, {{"t", slots[0]}, {"q", slots[1]}, {"qd", slots[2]}});
        EXPECT_EQ(p(slots), want) << print(e);
    }
}

TEST(Program, DeepTreeUsesHeapStack)
{
    Expr e = Expr::symbol("q");
    for (int k = 0; k < 200; ++k) {
        e = Expr(1.0) + e * Expr(0.5);
    }
    const Program p(e, SymbolLayout({"q"}));
    const std::vector<double> slot{2.0};
    EXPECT_EQ(p(slot), eval(e, {{"q", 2.0}}));
}

TEST(Program, UnboundSymbol)
{
    EXPECT_THROW(Program(parse("q + m"), SymbolLayout({"q"})), UnboundSymbol);
}

TEST(Substitute, ReplacesSymbols)
{
    const auto e = substitute(parse("m*q^2"), {{"m", Expr(3.0)}, {"q", parse("2*t")}});
    EXPECT_EQ(eval(e, {{"t", 1.0}}), complex(12.0));
}
