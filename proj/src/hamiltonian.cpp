#include "cxlag/hamiltonian.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

struct LocalPartials {
    complex d_q;  // dLc/dq
    complex d_qd; // dLc/dqd
};

LocalPartials partials_at(const ComplexLagrangian &lag, double q, double qd, double t)
{
    const auto x = lag.slots(MechState{t, {q}, {qd}});
    return {lag.d_coordinate(0, x), lag.d_velocity(0, x)};
}

} // namespace

HamiltonianField::HamiltonianField(EomSystem eom, double kappa0) : eom_(std::move(eom)), kappa0_(kappa0)
{
    if (eom_.dim() != 1) {
        throw UnsupportedDimension(
            fmt::format("the Hamiltonian correspondence is single-DOF; got dimension {}", eom_.dim()));
    }
    if (!std::isfinite(kappa0_) || kappa0_ == 0.0) {
        throw ConfigError("kappa0 must be finite and nonzero");
    }
}

double HamiltonianField::invert_velocity(double q, double p, double t, double guess) const
{
    constexpr int max_iterations = 50;
    const double tolerance = 1e-12 * (1.0 + std::abs(p));
    double v = std::isfinite(guess) ? guess : 0.0;
    auto residual = [&](double vel) { return eom_.momentum(MechState{t, {q}, {vel}})[0] - p; };

    double r = residual(v);
    for (int iter = 0; iter < max_iterations; ++iter) {
        if (std::abs(r) <= tolerance) {
            return v;
        }
        const double slope = eom_.mass_matrix(MechState{t, {q}, {v}})(0, 0);
        if (!std::isfinite(slope) || slope == 0.0) {
            throw InversionFailure(fmt::format("df/dqd vanishes at q = {}, qd = {}", q, v));
        }
        const double step = -r / slope;
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
            const double trial = v + lambda * step;
            const double r_trial = residual(trial);
            if (std::abs(r_trial) < std::abs(r) || std::abs(r_trial) <= tolerance) {
                v = trial;
                r = r_trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    if (std::abs(r) <= tolerance) {
        return v;
    }
    throw InversionFailure(fmt::format("velocity inversion did not converge at q = {}, p = {}", q, p));
}

VelocityJacobian HamiltonianField::velocity_jacobian(double q, double p, double t, double guess) const
{
    const double qd = invert_velocity(q, p, t, guess);
    const MechState s{t, {q}, {qd}};
    const double f_qd = eom_.mass_matrix(s)(0, 0);
    const double f_q = eom_.momentum_q_jacobian(s)(0, 0);
    if (f_qd == 0.0) {
        throw InversionFailure("df/dqd vanishes at the inverted velocity");
    }
    return {qd, -f_q / f_qd, 1.0 / f_qd};
}

double HamiltonianField::legendre_H(double q, double p, double t, double guess) const
{
    const double qd = invert_velocity(q, p, t, guess);
    return p * qd - eom_.lagrangian().value(MechState{t, {q}, {qd}}).real();
}

Gradient HamiltonianField::h_gradient(double q, double p, double t, double guess) const
{
    const auto jac = velocity_jacobian(q, p, t, guess);
    const auto d = partials_at(eom_.lagrangian(), q, jac.qd, t);
    const double excess = p - d.d_qd.real(); // (1/w0) dM/dq on the constraint
    return {excess * jac.dqd_dq - d.d_q.real(), jac.qd + excess * jac.dqd_dp};
}

Gradient HamiltonianField::m_gradient(double q, double p, double t, double guess) const
{
    const auto jac = velocity_jacobian(q, p, t, guess);
    const auto d = partials_at(eom_.lagrangian(), q, jac.qd, t);
    const double m_q = d.d_q.imag();
    const double m_qd = d.d_qd.imag();
    return {m_q + m_qd * jac.dqd_dq, m_qd * jac.dqd_dp};
}

Gradient HamiltonianField::k_gradient(double q, double p, double t, double guess) const
{
    const auto jac = velocity_jacobian(q, p, t, guess);
    if (jac.dqd_dp == 0.0 || !std::isfinite(jac.dqd_dp)) {
        throw DegenerateJacobian("dqd/dp vanishes");
    }
    const auto m = m_gradient(q, p, t, jac.qd);
    const double w0 = eom_.lagrangian().omega0();
    const double dk_dq = (jac.dqd_dp * m.dq - jac.dqd_dq * m.dp) / (kappa0_ * w0);
    const double dk_dp =
        kappa0_ * (-(jac.dqd_dq * m.dq) / w0 + (w0 + jac.dqd_dq * jac.dqd_dq / w0) / jac.dqd_dp * m.dp);
    return {dk_dq, dk_dp};
}

std::pair<double, double> HamiltonianField::flow_field(const PhaseState &s, double guess) const
{
    const double qd = invert_velocity(s.q, s.p, s.t, guess);
    const auto h = h_gradient(s.q, s.p, s.t, qd);
    const auto k = k_gradient(s.q, s.p, s.t, qd);
    return {h.dp - kappa0_ * k.dq, -h.dq - k.dp / kappa0_};
}

double HamiltonianField::k_integrability_gap(double q, double p, double t, double guess, double step) const
{
    const double qd = invert_velocity(q, p, t, guess);
    const double dkq_dp = (k_gradient(q, p + step, t, qd).dq - k_gradient(q, p - step, t, qd).dq) / (2.0 * step);
    const double dkp_dq = (k_gradient(q + step, p, t, qd).dp - k_gradient(q - step, p, t, qd).dp) / (2.0 * step);
    return std::abs(dkq_dp - dkp_dq);
}

} // namespace cxlag
