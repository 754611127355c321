#pragma once

// Complex action, first variation along half-sine perturbations, the real inner product and the
// Noether charge.
//
// Pairing convention: the expanded first variation is
//   Re dLc = g.dq + f.dqd = 2 Re[(dLc/dw) dw],   dw = (dqd + i w0 dq)/sqrt2,
// i.e. pair(z, v) = Re[z v] = real_inner(z, conj v).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cxlag/dynamics.hpp"
#include "cxlag/lagrangian.hpp"

namespace cxlag {

/// Composite Simpson over uniformly spaced values.  Throws BadSampling for fewer than 3 values
/// or an even count.
complex simpson(std::span<const complex> values, double h);
double simpson(std::span<const double> values, double h);

/// Throws BadSampling when the samples are not uniform at traj.h.
void check_uniform(const Trajectory &traj);

/// S = int Lc dt by composite Simpson.
complex action(const ComplexLagrangian &lag, const Trajectory &traj);

/// eta_a(t) = amplitude * sin(mode pi (t - t0)/(t1 - t0)) on component `direction`, zero elsewhere.
struct VariationField {
    double t0 = 0.0;
    double t1 = 1.0;
    int mode = 1;
    double amplitude = 1e-3;
    std::size_t direction = 0;

    [[nodiscard]] double eta(double t) const;
    [[nodiscard]] double eta_dot(double t) const;
};

/// Expanded integrand at one state: real part g.dq + f.dqd, imaginary part w0 f.dq - g.dqd / w0.
complex variation_integrand(const ComplexLagrangian &lag, const MechState &s, std::span<const double> dq,
                            std::span<const double> dqd);

/// 2 sum_a pair(dLc/dw_a, dw_a), the same real quantity through the Wirtinger derivative.
double pairing_integrand(const ComplexLagrangian &lag, const MechState &s, std::span<const double> dq,
                         std::span<const double> dqd);

/// dS at finite amplitude: the expanded integrand with dq = eta, evaluated on the varied path
/// q + eta, integrated by Simpson.  The field window must match the trajectory span.
/// Re dS = O(eps^2) on solutions, Theta(eps) otherwise.  Throws BadSampling.
complex first_variation(const ComplexLagrangian &lag, const Trajectory &traj, const VariationField &var);

/// sum_a Re[z_a conj(v_a)].  Throws LengthMismatch.
double real_inner(std::span<const complex> z, std::span<const complex> v);

/// sum_a Re[z_a v_a].  Throws LengthMismatch.
double pair(std::span<const complex> z, std::span<const complex> v);

/// Gamma = f . dq.
double noether_charge(const EomSystem &eom, const MechState &s, std::span<const double> dq);

/// Displacement field dq(q, t) given as one expression per coordinate.
class Displacement {
public:
    /// Constant displacement.
    explicit Displacement(std::vector<double> constant);
    /// Expressions in t and the coordinates.  Throws UnboundSymbol for velocity or unknown symbols.
    Displacement(const ComplexLagrangian &lag, std::vector<Expr> components);

    [[nodiscard]] std::vector<double> at(const ComplexLagrangian &lag, const MechState &s) const;
    [[nodiscard]] std::size_t size() const noexcept { return size_; }

private:
    std::size_t size_ = 0;
    std::vector<double> constant_;
    std::vector<Program> programs_;
};

struct ChargeReport {
    double initial = 0.0;
    double max_drift = 0.0;   ///< max_k |Gamma_k - Gamma_0|
    double max_force = 0.0;   ///< max_k |g . dq|, the rate of change of Gamma for constant dq
};

ChargeReport charge_drift(const EomSystem &eom, const Trajectory &traj, const Displacement &dq);

/// True when every stored EL residual is within tol.
bool is_solution(const Trajectory &traj, double tol = 1e-6);

/// Least-squares slope of log|y| against log x.  Non-positive or non-finite points throw BadSampling.
double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace cxlag
