#pragma once

// Hamiltonian side of a one-dimensional complex Lagrangian.
//
// With qd(q, p, t) the inverse of the momentum map p = f(q, qd, t):
//   H = p qd - L(q, qd, t)
//   dK/dq = 1/(k0 w0) [ qd_p dM/dq - qd_q dM/dp ]
//   dK/dp = k0 [ -(1/w0) qd_q dM/dq + (w0 + qd_q^2 / w0) / qd_p * dM/dp ]
//   qdot = dH/dp - k0 dK/dq,    pdot = -dH/dq - (1/k0) dK/dp
// where the M derivatives are taken in (q, p) coordinates and qd_q, qd_p come from the implicit
// function theorem: qd_p = 1/f_qd, qd_q = -f_q/f_qd.

#include <utility>

#include "cxlag/lagrangian.hpp"

namespace cxlag {

struct PhaseState {
    double t = 0.0;
    double q = 0.0;
    double p = 0.0;
};

struct VelocityJacobian {
    double qd = 0.0;
    double dqd_dq = 0.0;
    double dqd_dp = 0.0;
};

struct Gradient {
    double dq = 0.0;
    double dp = 0.0;
};

class HamiltonianField {
public:
    /// Throws UnsupportedDimension for dim != 1 and ConfigError for a zero or non-finite k0.
    explicit HamiltonianField(EomSystem eom, double kappa0 = 1.0);

    [[nodiscard]] const EomSystem &eom() const noexcept { return eom_; }
    [[nodiscard]] double kappa0() const noexcept { return kappa0_; }
    [[nodiscard]] HamiltonianField with_kappa0(double kappa0) const { return HamiltonianField(eom_, kappa0); }

    /// Newton iteration on f(q, qd, t) = p from `guess`; tolerance 1e-12, at most 50 iterations.
    /// Throws InversionFailure.
    [[nodiscard]] double invert_velocity(double q, double p, double t, double guess = 0.0) const;

    [[nodiscard]] VelocityJacobian velocity_jacobian(double q, double p, double t, double guess = 0.0) const;

    [[nodiscard]] double legendre_H(double q, double p, double t, double guess = 0.0) const;

    /// Exact chain rule through the inverse velocity map.
    [[nodiscard]] Gradient h_gradient(double q, double p, double t, double guess = 0.0) const;

    /// dMsf/dq and dMsf/dp, with Msf(q, p, t) = M(q, qd(q, p, t), t).
    [[nodiscard]] Gradient m_gradient(double q, double p, double t, double guess = 0.0) const;

    /// Throws DegenerateJacobian when dqd/dp vanishes.
    [[nodiscard]] Gradient k_gradient(double q, double p, double t, double guess = 0.0) const;

    /// (qdot, pdot).
    [[nodiscard]] std::pair<double, double> flow_field(const PhaseState &s, double guess = 0.0) const;

    /// |d(dK/dq)/dp - d(dK/dp)/dq| by central differences.  Diagnostic only: a single-valued K
    /// need not exist for an arbitrary complex Lagrangian.
    [[nodiscard]] double k_integrability_gap(double q, double p, double t, double guess = 0.0,
                                             double step = 1e-5) const;

private:
    EomSystem eom_;
    double kappa0_;
};

} // namespace cxlag
