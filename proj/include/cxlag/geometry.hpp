#pragma once

// One-forms on (q, qd) space attached to a state, the Lagrangian one-form
//   Theta = f_a dq^a
// and its Lie derivative along the dynamical field (qd, qdd):
//   L Theta = g_a dq^a + f_a dqd^a.
// The pairing side expands 2 pair(dLc/dw_a, dw_a) with dw_a = (dqd_a + i w0 dq_a)/sqrt2.

#include <vector>

#include "cxlag/lagrangian.hpp"

namespace cxlag {

struct OneForm {
    std::vector<double> dq;
    std::vector<double> dqd;
    MechState at;
};

OneForm theta(const EomSystem &eom, const MechState &s);

/// Closed form (g, f).  Needs no acceleration, so it is defined for degenerate systems too.
OneForm lie_theta(const EomSystem &eom, const MechState &s);

/// Independent evaluation: five-point central difference of f along RK4 micro-arcs of the flow
/// through s, plus the transport terms f_b dX^b/d(q, qd) of the field component X = qd, taken by
/// finite differences.  Throws SingularMass for a degenerate system.
OneForm lie_theta_cartan(const EomSystem &eom, const MechState &s, double delta = 1e-3);

OneForm rhs_pairing_form(const ComplexLagrangian &lag, const MechState &s);

/// dL = dL/dq dq + dL/dqd dqd (real part only).
OneForm differential(const ComplexLagrangian &lag, const MechState &s);

/// Componentwise max |a - b|.  Throws LengthMismatch.
double max_deviation(const OneForm &a, const OneForm &b);

} // namespace cxlag
