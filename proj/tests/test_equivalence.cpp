#include <cmath>

#include <gtest/gtest.h>

#include "cxlag/dynamics.hpp"
#include "cxlag/equivalence.hpp"
#include "cxlag/errors.hpp"

using namespace cxlag;

namespace {

MechState state(double q, double qd, double t = 0.0) { return {t, {q}, {qd}}; }

const Bindings params{{"m", 1}, {"k", 1}};

ComplexLagrangian lc(const char *text, double w0 = 1.0) { return ComplexLagrangian::from_text(text, w0, 1, params); }

ComplexLagrangian oscillator() { return lc("0.5*(m*qd^2 - k*q^2)"); }

} // namespace

TEST(Pair, Construction)
{
    EXPECT_THROW(LagrangianPair(oscillator(), lc("0.5*(m*qd^2 - k*q^2)", 2.0)), ConfigError);
    EXPECT_THROW(LagrangianPair(oscillator(), ComplexLagrangian::from_text("0.5*qd^2", 1.0)), ConfigError);
    const LagrangianPair pair(oscillator(), lc("0.5*(m*qd^2 - k*q^2) + q"));
    EXPECT_NEAR(std::abs(eval(pair.difference(), {{"m", 1}, {"k", 1}, {"q", 2.5}, {"qd", 0.3}}) - complex(2.5)), 0.0, 1e-14);
}

TEST(Gauge, AddsTotalDerivative)
{
    const auto g = gauge_add(oscillator(), parse("q^2 + t*q"));
    const auto s = state(0.5, 2.0, 3.0);
    EXPECT_NEAR(std::abs(g.value(s) - oscillator().value(s) - complex(2 * 0.5 * 2.0 + 0.5 + 3.0 * 2.0)), 0.0, 1e-14);
    EXPECT_THROW((void)gauge_add(oscillator(), parse("q*qd")), GaugeDependsOnVelocity);
}

TEST(Gauge, LinearInTimeAddsConstant)
{
    const auto g = gauge_add(oscillator(), parse("2.5*t"));
    const auto s = state(0.4, -1.2, 0.7);
    EXPECT_NEAR(std::abs(g.value(s) - oscillator().value(s) - complex(2.5)), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(derive_eom(g, s).accel(s)[0], derive_eom(oscillator(), s).accel(s)[0]);
}

TEST(Verdict, GaugePairIsEquivalent)
{
    const auto samples = sample_states(1, {}, 256);
    for (const char *lambda : {"q^2", "q^2 + t*q", "sin(q)*t", "i*0*q"}) {
        const LagrangianPair pair(oscillator(), gauge_add(oscillator(), parse(lambda)));
        const auto r = eom_equivalent(pair, samples);
        EXPECT_EQ(r.verdict, Verdict::equivalent) << lambda;
        EXPECT_LE(r.max_residual, 1e-10 * r.scale) << lambda;
        ASSERT_TRUE(r.accel_gap.has_value());
        EXPECT_LE(*r.accel_gap, 1e-9 * r.scale);
        EXPECT_EQ(r.samples, 256U);
        EXPECT_EQ(r.skipped, 0U);
    }
}

TEST(Verdict, ExtraPotentialIsNotEquivalent)
{
    const LagrangianPair pair(oscillator(), lc("0.5*(m*qd^2 - k*q^2) + q"));
    const auto r = eom_equivalent(pair, sample_states(1, {}, 256));
    EXPECT_EQ(r.verdict, Verdict::not_equivalent);
    EXPECT_NEAR(r.max_residual, 1.0, 1e-12);
}

TEST(Verdict, ImaginaryOscillatorMatchesRealOscillator)
{
    const auto real = ComplexLagrangian::from_text("0.5*(m*qd^2 - k*q^2)", 1.0, 1, {{"m", 1}, {"k", 1}, {"a0", 1}});
    const auto imag = ComplexLagrangian::from_text("i*a0*q*qd", 1.0, 1, {{"m", 1}, {"k", 1}, {"a0", 1}});
    const auto r = eom_equivalent(LagrangianPair(real, imag), sample_states(1, {}, 256));
    EXPECT_EQ(r.verdict, Verdict::equivalent);
    ASSERT_TRUE(r.accel_gap.has_value());
    EXPECT_LE(*r.accel_gap, 1e-9);
}

TEST(Verdict, ComplexGaugeChangesDynamics)
{
    const LagrangianPair pair(oscillator(), gauge_add(oscillator(), parse("i*q")));
    EXPECT_EQ(eom_equivalent(pair, sample_states(1, {}, 256)).verdict, Verdict::not_equivalent);
}

TEST(Verdict, TooFewSamples)
{
    const LagrangianPair pair(oscillator(), oscillator());
    EXPECT_THROW((void)eom_equivalent(pair, sample_states(1, {}, 99)), BadSampling);
}

TEST(Verdict, MostlySingularIsInconclusive)
{
    // the first mass vanishes identically while F still depends on qd
    const auto first = lc("q*qd");
    const auto second = lc("q*qd + q*qd^2");
    const auto r = eom_equivalent(LagrangianPair(first, second), sample_states(1, {}, 128));
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_GT(r.skipped, 25U);
}

TEST(Verdict, SerialAndParallelAgree)
{
    const LagrangianPair pair(oscillator(), lc("0.5*(m*qd^2 - k*q^2) + i*0.05*qd^2*q"));
    const auto samples = sample_states(1, {}, 300);
    const auto a = eom_equivalent(pair, samples, Execution::serial);
    const auto b = eom_equivalent(pair, samples, Execution::parallel);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.max_residual, b.max_residual);
    EXPECT_EQ(a.scale, b.scale);
}

TEST(Residual, LinearInAcceleration)
{
    const LagrangianPair pair(oscillator(), lc("0.5*(m*qd^2 - k*q^2) + 0.3*q^2*qd^2 + i*0.2*q*qd^3"));
    const auto f = Ffunction::from_pair(pair);
    const auto dfdqd = simplify(diff(f.components[0], "qd"));
    for (const auto &s : sample_states(1, {}, 100, 77)) {
        const std::vector<double> a1{0.3};
        const std::vector<double> a2{-1.1};
        const double r1 = equivalence_residual(pair, s, a1)[0];
        const double r2 = equivalence_residual(pair, s, a2)[0];
        const double coeff = eval(dfdqd, pair.first().bindings(s)).real();
        EXPECT_NEAR(r2 - r1, coeff * (a2[0] - a1[0]), 1e-12 * std::max(1.0, std::abs(r1)));
    }
}

TEST(Soundness, EquivalentRegularPairsIntegrateAlike)
{
    const auto first = oscillator();
    const auto second = gauge_add(first, parse("q^3*t"));
    ASSERT_EQ(eom_equivalent(LagrangianPair(first, second), sample_states(1, {}, 256)).verdict, Verdict::equivalent);
    const IntegratorConfig cfg{1e-3, 0.0, 6.0, 10'000'000};
    const auto a = integrate(derive_eom(first, state(1, 0)), state(1, 0.2), cfg);
    const auto b = integrate(derive_eom(second, state(1, 0)), state(1, 0.2), cfg);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        EXPECT_NEAR(a.samples[k].q[0], b.samples[k].q[0], 1e-7);
    }
}

TEST(Integrability, Examples)
{
    const auto samples = sample_states(1, {}, 128);
    const auto sin_f = Ffunction::single(parse("sin(t)"), 1.0);
    EXPECT_LE(integrability_residual(sin_f, Expr(0.0), samples), 1e-12);

    const auto sin_w = Ffunction::single(parse("sin(2*t)"), 2.0);
    EXPECT_LE(integrability_residual(sin_w, Expr(0.0), samples), 1e-12);

    const auto t2 = Ffunction::single(parse("t^2"), 1.0);
    const double r = integrability_residual(t2, Expr(0.0), samples);
    double want = 0.0;
    for (const auto &s : samples) {
        want = std::max(want, std::abs(2 + s.t * s.t));
    }
    EXPECT_NEAR(r, want, 1e-12);

    const auto q2 = Ffunction::single(parse("q^2"), 1.0);
    EXPECT_LE(integrability_residual(q2, parse("q^4/12"), samples), 1e-12);
}

TEST(Integrability, SingleDofOnly)
{
    Ffunction f;
    f.components = {parse("q_1"), parse("q_2")};
    EXPECT_THROW((void)integrability_residual(f, Expr(0.0), sample_states(1, {}, 100)), UnsupportedDimension);
}

TEST(Sampling, StratifiedAndReproducible)
{
    const auto a = sample_states(2, {}, 200, 42);
    const auto b = sample_states(2, {}, 200, 42);
    ASSERT_EQ(a.size(), 200U);
    std::vector<int> strata(200, 0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].q, b[k].q);
        EXPECT_EQ(a[k].qd, b[k].qd);
        EXPECT_EQ(a[k].t, b[k].t);
        ASSERT_EQ(a[k].q.size(), 2U);
        strata[static_cast<std::size_t>((a[k].t + 2.0) / 4.0 * 200)]++;
    }
    for (const int c : strata) {
        EXPECT_EQ(c, 1);
    }
}
