#pragma once

// Sampled decision of whether two complex Lagrangians give the same equations of motion.
//
// With D = Lc2 - Lc1 = dL + i dM:
//   F_a = d(dL)/dqd_a + (1/w0) d(dM)/dq_a
//   residual_a = dF_a/dqd . qdd + dF_a/dq . qd + dF_a/dt - d(dL)/dq_a + w0 d(dM)/dqd_a
// with qdd taken from the first Lagrangian's acceleration.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cxlag/lagrangian.hpp"
#include "cxlag/parallel.hpp"
#include "cxlag/sampling.hpp"

namespace cxlag {

class LagrangianPair {
public:
    /// Throws ConfigError when w0, dim or parameters differ.
    LagrangianPair(ComplexLagrangian first, ComplexLagrangian second);

    [[nodiscard]] const ComplexLagrangian &first() const noexcept { return first_; }
    [[nodiscard]] const ComplexLagrangian &second() const noexcept { return second_; }

    /// Complex difference Lc2 - Lc1, simplified.
    [[nodiscard]] const Expr &difference() const noexcept { return delta_; }
    /// Real and imaginary parts of the difference when they separate symbolically.
    [[nodiscard]] std::optional<std::pair<Expr, Expr>> split_difference() const { return split_complex(delta_); }

private:
    ComplexLagrangian first_;
    ComplexLagrangian second_;
    Expr delta_;
};

/// F_a for a pair, stored as complex trees whose real parts are F_a.
struct Ffunction {
    std::vector<Expr> components;
    double omega0 = 1.0;
    Bindings params;

    static Ffunction from_pair(const LagrangianPair &pair);
    /// A single-DOF F given directly (for integrability checks).
    static Ffunction single(Expr f, double omega0, Bindings params = {});
};

enum class Verdict { equivalent, not_equivalent, inconclusive };

std::string_view to_string(Verdict v);

struct EquivalenceReport {
    Verdict verdict = Verdict::inconclusive;
    double max_residual = 0.0;
    double scale = 1.0;             ///< max(1, largest term magnitude)
    std::size_t samples = 0;
    std::size_t skipped = 0;        ///< samples where the first Lagrangian's mass matrix is singular
    std::optional<double> accel_gap; ///< max |qdd1 - qdd2| over samples where both are regular
};

inline constexpr double equivalence_tolerance = 1e-9;
inline constexpr double max_skip_fraction = 0.2;

/// Throws BadSampling for fewer than 100 samples.
EquivalenceReport eom_equivalent(const LagrangianPair &pair, const std::vector<MechState> &samples,
                                 Execution exec = Execution::parallel);

/// Residual vector at one state with a caller-supplied qdd (for the qdd-linearity property).
std::vector<double> equivalence_residual(const LagrangianPair &pair, const MechState &s, std::span<const double> qdd);

/// Lc + dLambda/dt with dLambda/dt = dLambda/dt|explicit + sum_a dLambda/dq_a qd_a.
/// Throws GaugeDependsOnVelocity.
ComplexLagrangian gauge_add(const ComplexLagrangian &lag, const Expr &lambda);

/// max over samples of |(d2/dt2 + w0^2) F - (d2/dq2 + w0^2 d2/dqd2) Phi|, single DOF.
double integrability_residual(const Ffunction &f, const Expr &phi, const std::vector<MechState> &samples,
                              Execution exec = Execution::parallel);

struct SampleBox {
    Interval t{-2.0, 2.0};
    Interval q{-2.0, 2.0};
    Interval qd{-2.0, 2.0};
};

/// Stratified states in the box (every coordinate and velocity uses the same interval).
std::vector<MechState> sample_states(std::size_t dim, const SampleBox &box, std::size_t n,
                                     std::uint64_t seed = default_seed);

} // namespace cxlag
