#include <cmath>

#include <gtest/gtest.h>

#include "cxlag/dynamics.hpp"
#include "cxlag/equivalence.hpp"
#include "cxlag/errors.hpp"
#include "cxlag/hamiltonian.hpp"

using namespace cxlag;

namespace {

MechState state(double q, double qd, double t = 0.0) { return {t, {q}, {qd}}; }

HamiltonianField field_of(const char *text, double omega0, const Bindings &params, double kappa0 = 1.0)
{
    const auto lag = ComplexLagrangian::from_text(text, omega0, 1, params);
    return HamiltonianField(derive_eom(lag, state(1, 0)), kappa0);
}

HamiltonianField damped(double kappa0 = 1.0)
{
    return field_of("0.5*(m*qd^2 - k*q^2) + i*0.5*lam*qd^2", 1.0, {{"m", 2}, {"k", 1}, {"lam", 0.1}}, kappa0);
}

} // namespace

TEST(Invert, Examples)
{
    EXPECT_NEAR(field_of("0.5*m*qd^2", 1.0, {{"m", 2}}).invert_velocity(0.0, 3.0, 0.0), 1.5, 1e-14);
    const auto ho = field_of("i*a0*q*qd", 2.0, {{"a0", 2}});
    EXPECT_NEAR(ho.invert_velocity(0.4, -0.9, 0.0), -0.9, 1e-14);
    EXPECT_NEAR(damped().invert_velocity(0.3, 0.8, 0.0), 0.4, 1e-14);
}

TEST(Invert, Nonlinear)
{
    const auto f = field_of("qd^4/12 + qd^2/2", 1.0, {});
    const double qd = f.invert_velocity(0.0, 2.0, 0.0);
    EXPECT_NEAR(qd * qd * qd / 3 + qd, 2.0, 1e-12);
}

TEST(Invert, Failure)
{
    // p = cos(qd + 1) has no solution for p = 2
    EXPECT_THROW((void)field_of("sin(qd + 1)", 1.0, {}).invert_velocity(0.0, 2.0, 0.0), InversionFailure);
}

TEST(Legendre, Examples)
{
    const auto osc = field_of("0.5*(m*qd^2 - k*q^2)", 1.0, {{"m", 2}, {"k", 3}});
    EXPECT_NEAR(osc.legendre_H(1.0, 4.0, 0.0), 16.0 / 4.0 + 1.5, 1e-13);
    const auto g = osc.h_gradient(1.0, 4.0, 0.0);
    EXPECT_NEAR(g.dq, 3.0, 1e-13);
    EXPECT_NEAR(g.dp, 2.0, 1e-13);
}

TEST(KGradient, DampedClosedForm)
{
    for (const double k0 : {0.5, 1.0, 2.0}) {
        const auto f = damped(k0);
        for (const double p : {-1.3, 0.2, 0.9}) {
            const auto k = f.k_gradient(0.7, p, 0.0);
            EXPECT_NEAR(k.dq, 0.0, 1e-14);
            EXPECT_NEAR(k.dp, k0 * 1.0 * 0.1 * p / 2.0, 1e-14);
        }
    }
}

TEST(Flow, ClassicalOscillator)
{
    const auto osc = field_of("0.5*(qd^2 - q^2)", 1.0, {});
    const auto [qdot, pdot] = osc.flow_field({0.0, 1.0, 0.0});
    EXPECT_NEAR(qdot, 0.0, 1e-15);
    EXPECT_NEAR(pdot, -1.0, 1e-15);
}

TEST(Flow, ClassicalLimit)
{
    const auto f = field_of("0.5*qd^2*(1 + q^2) - q^4", 1.0, {});
    for (const auto &s : sample_states(1, {}, 100, 4)) {
        const double q = s.q[0];
        const double p = s.qd[0];
        const auto k = f.k_gradient(q, p, s.t);
        EXPECT_EQ(k.dq, 0.0);
        EXPECT_EQ(k.dp, 0.0);
        const auto [qdot, pdot] = f.flow_field({s.t, q, p});
        const double v = p / (1 + q * q);
        EXPECT_NEAR(qdot, v, 1e-12);
        EXPECT_NEAR(pdot, q * v * v - 4 * q * q * q, 1e-12);
    }
}

TEST(Flow, KappaInvariance)
{
    const char *texts[] = {"0.5*(qd^2 - q^2) + i*0.05*qd^2", "i*a0*q*qd",
                           "0.5*qd^2*(2 + sin(q)) + i*(0.05*q^2*qd^2 + 0.05*t*q*qd)"};
    for (const char *text : texts) {
        const auto base = field_of(text, 1.3, {{"a0", 1.3}});
        for (const auto &s : sample_states(1, {}, 100, 10)) {
            const PhaseState ps{s.t, s.q[0], s.qd[0]};
            const auto ref = base.flow_field(ps);
            for (const double k0 : {0.5, 2.0}) {
                const auto other = base.with_kappa0(k0).flow_field(ps);
                EXPECT_NEAR(other.first, ref.first, 1e-12 * std::max(1.0, std::abs(ref.first))) << text;
                EXPECT_NEAR(other.second, ref.second, 1e-12 * std::max(1.0, std::abs(ref.second))) << text;
            }
        }
    }
}

TEST(ImplicitFunction, MatchesDifferencedInverse)
{
    const auto f = field_of("0.5*qd^2*(2 + sin(q)) + qd^4/20 + i*0.1*q*qd^3", 0.9, {});
    for (const auto &s : sample_states(1, {}, 100, 14)) {
        const double q = s.q[0];
        const double p = s.qd[0];
        const auto j = f.velocity_jacobian(q, p, s.t);
        const double h = 1e-5;
        const double dq = (f.invert_velocity(q + h, p, s.t, j.qd) - f.invert_velocity(q - h, p, s.t, j.qd)) / (2 * h);
        const double dp = (f.invert_velocity(q, p + h, s.t, j.qd) - f.invert_velocity(q, p - h, s.t, j.qd)) / (2 * h);
        EXPECT_NEAR(j.dqd_dq, dq, 1e-6 * std::max(1.0, std::abs(dq)));
        EXPECT_NEAR(j.dqd_dp, dp, 1e-6 * std::max(1.0, std::abs(dp)));
    }
}

TEST(Trajectories, MatchLagrangianSide)
{
    struct Case {
        const char *text;
        Bindings params;
        double t_end;
    };
    const Case cases[] = {{"0.5*(m*qd^2 - k*q^2)", {{"m", 1}, {"k", 1}}, 6.283185307179586},
                          {"0.5*(m*qd^2 - k*q^2) + i*0.5*lam*qd^2", {{"m", 1}, {"k", 1}, {"lam", 0.1}}, 10.0},
                          {"i*a0*q*qd", {{"a0", 1}}, 6.283185307179586}};
    for (const auto &c : cases) {
        const auto lag = ComplexLagrangian::from_text(c.text, 1.0, 1, c.params);
        const auto eom = derive_eom(lag, state(1, 0));
        const IntegratorConfig cfg{1e-3, 0.0, c.t_end, 10'000'000};
        const auto lt = integrate(eom, state(1, 0), cfg);
        const HamiltonianField field(eom);
        const auto ht = integrate_hamiltonian(field, {0.0, 1.0, eom.momentum(state(1, 0))[0]}, cfg);
        ASSERT_EQ(lt.samples.size(), ht.samples.size());
        EXPECT_EQ(ht.kind, FlowKind::hamiltonian);
        for (std::size_t k = 0; k < lt.samples.size(); ++k) {
            EXPECT_NEAR(lt.samples[k].q[0], ht.samples[k].q[0], 1e-6);
        }
    }
}

TEST(FieldConstruction, Errors)
{
    const auto lag2 = ComplexLagrangian::from_text("0.5*(qd_1^2 + qd_2^2)", 1.0, 2);
    const MechState s{0.0, {0, 0}, {1, 1}};
    EXPECT_THROW(HamiltonianField(derive_eom(lag2, s)), UnsupportedDimension);
    const auto lag = ComplexLagrangian::from_text("0.5*qd^2", 1.0);
    EXPECT_THROW(HamiltonianField(derive_eom(lag, state(0, 1)), 0.0), ConfigError);
    EXPECT_THROW(HamiltonianField(derive_eom(lag, state(0, 1)), INFINITY), ConfigError);
}

TEST(Diagnostics, KIntegrabilityGapIsFinite)
{
    const auto f = damped();
    EXPECT_TRUE(std::isfinite(f.k_integrability_gap(0.4, 0.3, 0.0)));
}
