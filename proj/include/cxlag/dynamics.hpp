#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "cxlag/hamiltonian.hpp"
#include "cxlag/lagrangian.hpp"

namespace cxlag {

enum class FlowKind { second_order, closure, hamiltonian };

std::string_view to_string(FlowKind kind);

struct IntegratorConfig {
    double h = 1e-3;  ///< maximum step; the run uses ceil(span/h) equal steps
    double t_start = 0.0;
    double t_end = 1.0;
    std::size_t max_steps = 10'000'000;
};

/// Uniform step count and effective step for a config.  Throws ConfigError.
std::pair<std::size_t, double> step_plan(const IntegratorConfig &cfg);

struct Sample {
    double t = 0.0;
    std::vector<double> q;
    std::vector<double> qd;
    std::vector<double> p;
    double el_residual = 0.0;
};

struct Trajectory {
    FlowKind kind = FlowKind::second_order;
    std::size_t dim = 1;
    double h = 0.0;
    std::vector<Sample> samples;

    [[nodiscard]] MechState state(std::size_t k) const { return {samples[k].t, samples[k].q, samples[k].qd}; }
    [[nodiscard]] const Sample &back() const { return samples.back(); }
    [[nodiscard]] double max_el_residual() const;
};

/// Blow-up guard: integration aborts when any component exceeds this magnitude.
inline constexpr double blow_up_limit = 1e12;

/// Classical RK4 on (q, qd) -> (qd, accel) for Regular systems, or q -> closure velocity for
/// Degenerate ones.  Throws SingularMass, ClosureInconsistent, StepBlowUp, ConfigError.
Trajectory integrate(const EomSystem &eom, const MechState &init, const IntegratorConfig &cfg);

/// RK4 on (q, p) with the Hamiltonian field.  The Newton guess for the inverse velocity map is the
/// previous stage's velocity.  Throws InversionFailure, StepBlowUp, ConfigError.
Trajectory integrate_hamiltonian(const HamiltonianField &field, const PhaseState &init, const IntegratorConfig &cfg);

/// Trajectory sampled from closed-form q(t), qd(t) on a uniform grid of `steps` intervals.  Used for
/// reference paths and deliberately non-stationary trials; el_residual is left at zero.
Trajectory tabulate(std::size_t dim, double t_start, double t_end, std::size_t steps,
                    const std::function<std::vector<double>(double)> &q,
                    const std::function<std::vector<double>(double)> &qd);

/// CSV: `t,q_1..q_N,qd_1..qd_N,p_1..p_N,el_residual`, 17 significant digits, LF endings.
void write_csv(const Trajectory &traj, std::ostream &out);

} // namespace cxlag
