#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cxlag/equivalence.hpp"
#include "cxlag/errors.hpp"
#include "cxlag/variational.hpp"

using namespace cxlag;

namespace {

constexpr double pi = std::numbers::pi;

MechState state(double q, double qd, double t = 0.0) { return {t, {q}, {qd}}; }

IntegratorConfig span(double t0, double t1, double h = 1e-3) { return {h, t0, t1, 10'000'000}; }

ComplexLagrangian oscillator() { return ComplexLagrangian::from_text("0.5*(m*qd^2 - k*q^2)", 1.0, 1, {{"m", 1}, {"k", 1}}); }

ComplexLagrangian free_particle() { return ComplexLagrangian::from_text("0.5*m*qd^2", 1.0, 1, {{"m", 1}}); }

ComplexLagrangian damped()
{
    return ComplexLagrangian::from_text("0.5*(m*qd^2 - k*q^2) + i*0.5*lam*qd^2", 1.0, 1,
                                        {{"m", 1}, {"k", 1}, {"lam", 0.1}});
}

ComplexLagrangian zero_force(double w0 = 1.3)
{
    return ComplexLagrangian::from_text("0.5*qd^2 + w0*b*q*qd + i*0.5*b*qd^2", w0, 1, {{"w0", w0}, {"b", 0.7}});
}

std::vector<double> slopes_of(const ComplexLagrangian &lag, const Trajectory &traj, int mode)
{
    const std::vector<double> eps{1e-2, 1e-3, 1e-4};
    std::vector<double> mags;
    for (const double e : eps) {
        const VariationField var{traj.samples.front().t, traj.back().t, mode, e, 0};
        mags.push_back(std::abs(first_variation(lag, traj, var).real()));
    }
    return {loglog_slope(eps, mags), mags[1]};
}

} // namespace

TEST(Simpson, Examples)
{
    const std::vector<double> ones(5, 1.0);
    EXPECT_DOUBLE_EQ(simpson(std::span<const double>(ones), 0.5), 2.0);
    const std::vector<double> cubic{0, 1.0 / 8, 1, 27.0 / 8, 8};
    EXPECT_DOUBLE_EQ(simpson(std::span<const double>(cubic), 0.5), 4.0);
    const std::vector<complex> z{complex(0, 1), complex(0, 1), complex(0, 1)};
    EXPECT_EQ(simpson(std::span<const complex>(z), 1.0), complex(0, 2));
    const std::vector<double> even(4, 1.0);
    EXPECT_THROW((void)simpson(std::span<const double>(even), 1.0), BadSampling);
    const std::vector<double> two(2, 1.0);
    EXPECT_THROW((void)simpson(std::span<const double>(two), 1.0), BadSampling);
}

TEST(Action, ConstantLagrangian)
{
    const auto lag = ComplexLagrangian::from_text("1", 1.0);
    const auto traj = tabulate(
        1, 0.0, 2.0, 20, [](double) { return std::vector<double>{0.0}; },
        [](double) { return std::vector<double>{0.0}; });
    EXPECT_NEAR(std::abs(action(lag, traj) - complex(2.0)), 0.0, 1e-14);
}

TEST(Action, ExponentialSolutionOfInvertedOscillator)
{
    const auto lag = ComplexLagrangian::from_text("i*0.5*(m*qd^2 - k*q^2)", 1.0, 1, {{"m", 1}, {"k", 1}});
    const auto traj = integrate(derive_eom(lag, state(1, 0), std::vector<double>{1.0}), state(1, 0), span(0, 1));
    EXPECT_LE(std::abs(action(lag, traj)), 1e-8);
}

TEST(Action, OscillatorOverOnePeriod)
{
    const auto lag = oscillator();
    const auto traj = integrate(derive_eom(lag, state(1, 0)), state(1, 0), span(0, 2 * pi));
    EXPECT_LE(std::abs(action(lag, traj)), 1e-8);
}

TEST(Action, RejectsNonUniformGrid)
{
    auto traj = tabulate(
        1, 0.0, 1.0, 4, [](double) { return std::vector<double>{0.0}; },
        [](double) { return std::vector<double>{0.0}; });
    traj.samples[2].t += 1e-3;
    EXPECT_THROW(check_uniform(traj), BadSampling);
    EXPECT_THROW((void)action(free_particle(), traj), BadSampling);
}

TEST(VariationField, EndpointsAreExactZeros)
{
    for (int mode = 1; mode <= 5; ++mode) {
        const VariationField var{0.3, 1.7, mode, 0.01, 0};
        EXPECT_EQ(var.eta(0.3), 0.0);
        EXPECT_EQ(var.eta(1.7), 0.0);
        const double t = 0.9;
        const double h = 1e-5;
        EXPECT_NEAR(var.eta_dot(t), (var.eta(t + h) - var.eta(t - h)) / (2 * h), 1e-9);
    }
}

TEST(InnerProduct, Examples)
{
    const complex i(0, 1);
    const std::vector<complex> a{i};
    const std::vector<complex> one{complex(1)};
    const std::vector<complex> z{complex(3, 4)};
    EXPECT_DOUBLE_EQ(real_inner(a, a), 1.0);
    EXPECT_DOUBLE_EQ(real_inner(one, a), 0.0);
    EXPECT_DOUBLE_EQ(real_inner(z, z), 25.0);
    EXPECT_DOUBLE_EQ(pair(z, z), -7.0);
    const std::vector<complex> two(2);
    EXPECT_THROW((void)real_inner(a, two), LengthMismatch);
    EXPECT_THROW((void)pair(a, two), LengthMismatch);
}

TEST(InnerProduct, PairIsRealInnerWithConjugate)
{
    Lcg64 rng(4);
    for (int k = 0; k < 100; ++k) {
        const std::vector<complex> z{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, {rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const std::vector<complex> v{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, {rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const std::vector<complex> vc{std::conj(v[0]), std::conj(v[1])};
        EXPECT_NEAR(pair(z, v), real_inner(z, vc), 1e-14);
    }
}

TEST(Pairing, ExpandedIntegrandMatchesWirtingerForm)
{
    const std::vector<ComplexLagrangian> lags{
        oscillator(), damped(), ComplexLagrangian::from_text("i*a0*q*qd", 2.0, 1, {{"a0", 2}}),
        ComplexLagrangian::from_text("i*0.5*(qd^2 - q^2)", 1.0),
        ComplexLagrangian::from_text("sin(q)*qd^2 + i*exp(0.3*q)*qd*t", 0.7)};
    Lcg64 rng(31);
    for (const auto &lag : lags) {
        for (const auto &s : sample_states(1, {}, 100, 9)) {
            const std::vector<double> dq{rng.uniform(-1, 1)};
            const std::vector<double> dqd{rng.uniform(-1, 1)};
            const double expanded = variation_integrand(lag, s, dq, dqd).real();
            EXPECT_NEAR(expanded, pairing_integrand(lag, s, dq, dqd), 1e-12 * std::max(1.0, std::abs(expanded)));
        }
    }
}

TEST(FirstVariation, ClassicalOscillatorIsStationary)
{
    const auto lag = oscillator();
    const double T = 1.0;
    const auto traj = integrate(derive_eom(lag, state(1, 0)), state(1, 0), span(0, T));
    const VariationField var{0.0, T, 1, 1e-3, 0};
    const double scale = 1.0 + pi * pi / (T * T);
    EXPECT_LE(std::abs(first_variation(lag, traj, var).real()), 1e-6 * T * scale);
}

TEST(FirstVariation, SecondOrderOnSolutions)
{
    for (const auto &lag : {oscillator(), damped(), ComplexLagrangian::from_text("i*a0*q*qd", 1.0, 1, {{"a0", 1}})}) {
        const auto traj = integrate(derive_eom(lag, state(1, 0)), state(1, 0.3), span(0, 1));
        for (int mode = 1; mode <= 5; ++mode) {
            const double slope = slopes_of(lag, traj, mode)[0];
            EXPECT_GE(slope, 1.9) << mode;
            EXPECT_LE(slope, 2.1) << mode;
        }
    }
}

TEST(FirstVariation, FirstOrderOffShell)
{
    const auto lag = free_particle();
    const auto traj = tabulate(
        1, 0.0, 1.0, 1000, [](double t) { return std::vector<double>{t * t / 4}; },
        [](double t) { return std::vector<double>{t / 2}; });
    const auto r = slopes_of(lag, traj, 1);
    EXPECT_NEAR(r[0], 1.0, 0.1);
    EXPECT_GE(r[1] / 1e-3, 0.1);
}

TEST(FirstVariation, WindowMustMatch)
{
    const auto traj = tabulate(
        1, 0.0, 1.0, 10, [](double) { return std::vector<double>{0.0}; },
        [](double) { return std::vector<double>{0.0}; });
    EXPECT_THROW((void)first_variation(free_particle(), traj, VariationField{0.0, 0.5, 1, 1e-3, 0}), BadSampling);
}

TEST(LogLogSlope, Examples)
{
    const std::vector<double> x{1, 10, 100};
    const std::vector<double> y{3, 300, 30000};
    EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
    const std::vector<double> bad{1, 0, 3};
    EXPECT_THROW((void)loglog_slope(x, bad), BadSampling);
}

TEST(Noether, ConservedForFreeParticleAndZeroForce)
{
    const Displacement shift(std::vector<double>{1.0});
    for (const auto &lag : {free_particle(), zero_force()}) {
        const auto eom = derive_eom(lag, state(0, 1));
        const auto traj = integrate(eom, state(0.2, 1), span(0, 2));
        const auto r = charge_drift(eom, traj, shift);
        EXPECT_LE(r.max_drift, 1e-8);
        EXPECT_LE(r.max_force, 1e-10);
    }
}

TEST(Noether, ZeroForceSyntheticHasVanishingForceEverywhere)
{
    const auto lag = zero_force();
    const auto eom = derive_eom(lag, state(0, 1));
    for (const auto &s : sample_states(1, {}, 100, 2)) {
        EXPECT_LE(std::abs(eom.force(s)[0]), 1e-14);
    }
}

TEST(Noether, OscillatorDriftsWithinQuarterPeriod)
{
    const auto eom = derive_eom(oscillator(), state(0, 1));
    const auto traj = integrate(eom, state(0, 1), span(0, pi / 2));
    const auto r = charge_drift(eom, traj, Displacement(std::vector<double>{1.0}));
    EXPECT_GE(r.max_drift, 0.1 * std::abs(r.initial));
    EXPECT_GT(r.max_force, 1e-10);
}

TEST(Noether, ConservationIffForceVanishes)
{
    const Displacement shift(std::vector<double>{1.0});
    for (const auto &lag : {free_particle(), zero_force(), oscillator(), damped()}) {
        const auto eom = derive_eom(lag, state(0, 1));
        const auto traj = integrate(eom, state(0.5, 1), span(0, 2));
        const auto r = charge_drift(eom, traj, shift);
        EXPECT_EQ(r.max_drift <= 1e-8, r.max_force <= 1e-10);
    }
}

TEST(Noether, ExpressionDisplacement)
{
    const auto lag = free_particle();
    EXPECT_THROW(Displacement(lag, {parse("qd")}), UnboundSymbol);
    const Displacement d(lag, {parse("2*q + t")});
    EXPECT_DOUBLE_EQ(d.at(lag, state(1.5, 9.0, 0.5))[0], 3.5);
    EXPECT_DOUBLE_EQ(noether_charge(derive_eom(lag, state(0, 1)), state(0, 2), std::vector<double>{3.0}), 6.0);
}

TEST(IsSolution, UsesStoredResiduals)
{
    const auto eom = derive_eom(oscillator(), state(1, 0));
    auto traj = integrate(eom, state(1, 0), span(0, 1, 0.01));
    EXPECT_TRUE(is_solution(traj));
    traj.samples[3].el_residual = 1e-3;
    EXPECT_FALSE(is_solution(traj));
}
