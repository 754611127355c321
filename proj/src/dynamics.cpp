#include "cxlag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

using Vec = std::vector<double>;

template <class Deriv>
void rk4_step(Vec &y, double t, double h, Deriv &&f)
{
    const auto n = y.size();
    Vec tmp(n);
    const Vec k1 = f(t, y);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    const Vec k2 = f(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    const Vec k3 = f(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + h * k3[i];
    }
    const Vec k4 = f(t + h, tmp);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

void guard(const Vec &y, double t)
{
    for (const double v : y) {
        if (!std::isfinite(v) || std::abs(v) > blow_up_limit) {
            throw StepBlowUp(fmt::format("state component {} exceeds the blow-up limit at t = {}", v, t));
        }
    }
}

Vec head(const Vec &y, std::size_t n) { return {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)}; }
Vec tail(const Vec &y, std::size_t n) { return {y.begin() + static_cast<std::ptrdiff_t>(n), y.end()}; }

} // namespace

std::string_view to_string(FlowKind kind)
{
    switch (kind) {
        case FlowKind::second_order:
            return "second-order";
        case FlowKind::closure:
            return "closure";
        case FlowKind::hamiltonian:
            return "hamiltonian";
    }
    return "unknown";
}

std::pair<std::size_t, double> step_plan(const IntegratorConfig &cfg)
{
    if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) {
        throw ConfigError("integrator step h must be positive");
    }
    if (!(cfg.t_end > cfg.t_start) || !std::isfinite(cfg.t_start) || !std::isfinite(cfg.t_end)) {
        throw ConfigError("integrator needs t_end > t_start");
    }
    const double span = cfg.t_end - cfg.t_start;
    const double ratio = span / cfg.h;
    if (ratio > static_cast<double>(cfg.max_steps)) {
        throw ConfigError(fmt::format("run needs {:.0f} steps, more than max_steps = {}", std::ceil(ratio), cfg.max_steps));
    }
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
    return {steps, span / static_cast<double>(steps)};
}

double Trajectory::max_el_residual() const
{
    double worst = 0.0;
    for (const auto &s : samples) {
        worst = std::max(worst, s.el_residual);
    }
    return worst;
}

Trajectory integrate(const EomSystem &eom, const MechState &init, const IntegratorConfig &cfg)
{
    const auto &lag = eom.lagrangian();
    lag.check_state(init);
    const auto [steps, h] = step_plan(cfg);
    const auto n = eom.dim();

    Trajectory traj;
    traj.dim = n;
    traj.h = h;
    traj.samples.reserve(steps + 1);

    if (eom.regular()) {
        traj.kind = FlowKind::second_order;
        auto record = [&](double t, const Vec &y) {
            MechState s{t, head(y, n), tail(y, n)};
            const auto qdd = eom.accel(s);
            traj.samples.push_back(Sample{t, s.q, s.qd, eom.momentum(s), eom.el_residual(s, qdd)});
        };
        auto deriv = [&](double t, const Vec &y) {
            MechState s{t, head(y, n), tail(y, n)};
            auto out = s.qd;
            const auto qdd = eom.accel(s);
            out.insert(out.end(), qdd.begin(), qdd.end());
            return out;
        };
        Vec y = init.q;
        y.insert(y.end(), init.qd.begin(), init.qd.end());
        record(cfg.t_start, y);
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = cfg.t_start + static_cast<double>(k) * h;
            rk4_step(y, t, h, deriv);
            const double t_next = cfg.t_start + static_cast<double>(k + 1) * h;
            guard(y, t_next);
            record(t_next, y);
        }
        return traj;
    }

    traj.kind = FlowKind::closure;
    Vec guess = init.qd;
    auto velocity = [&](double t, const Vec &q) {
        auto v = eom.closure_velocity(t, q, guess);
        guess = v;
        return v;
    };
    auto record = [&](double t, const Vec &q) {
        MechState s{t, q, velocity(t, q)};
        const auto qdd = eom.closure_accel(s);
        traj.samples.push_back(Sample{t, s.q, s.qd, eom.momentum(s), eom.el_residual(s, qdd)});
    };
    Vec y = init.q;
    record(cfg.t_start, y);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = cfg.t_start + static_cast<double>(k) * h;
        rk4_step(y, t, h, velocity);
        const double t_next = cfg.t_start + static_cast<double>(k + 1) * h;
        guard(y, t_next);
        record(t_next, y);
    }
    return traj;
}

Trajectory integrate_hamiltonian(const HamiltonianField &field, const PhaseState &init, const IntegratorConfig &cfg)
{
    const auto [steps, h] = step_plan(cfg);
    const auto &eom = field.eom();

    Trajectory traj;
    traj.kind = FlowKind::hamiltonian;
    traj.dim = 1;
    traj.h = h;
    traj.samples.reserve(steps + 1);

    double guess = 0.0;
    guess = field.invert_velocity(init.q, init.p, init.t, guess);
    auto deriv = [&](double t, const Vec &y) {
        const auto [qdot, pdot] = field.flow_field(PhaseState{t, y[0], y[1]}, guess);
        guess = qdot;
        return Vec{qdot, pdot};
    };
    auto record = [&](double t, const Vec &y) {
        const double qd = field.invert_velocity(y[0], y[1], t, guess);
        guess = qd;
        MechState s{t, {y[0]}, {qd}};
        const double residual = eom.regular() ? eom.el_residual(s, eom.accel(s)) : 0.0;
        traj.samples.push_back(Sample{t, s.q, s.qd, {y[1]}, residual});
    };

    Vec y{init.q, init.p};
    guard(y, cfg.t_start);
    record(cfg.t_start, y);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = cfg.t_start + static_cast<double>(k) * h;
        rk4_step(y, t, h, deriv);
        const double t_next = cfg.t_start + static_cast<double>(k + 1) * h;
        guard(y, t_next);
        record(t_next, y);
    }
    return traj;
}

Trajectory tabulate(std::size_t dim, double t_start, double t_end, std::size_t steps,
                    const std::function<std::vector<double>(double)> &q,
                    const std::function<std::vector<double>(double)> &qd)
{
    if (steps == 0 || !(t_end > t_start)) {
        throw ConfigError("tabulate needs at least one step over a positive span");
    }
    Trajectory traj;
    traj.kind = FlowKind::second_order;
    traj.dim = dim;
    traj.h = (t_end - t_start) / static_cast<double>(steps);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = t_start + static_cast<double>(k) * traj.h;
        Sample s{t, q(t), qd(t), std::vector<double>(dim, 0.0), 0.0};
        if (s.q.size() != dim || s.qd.size() != dim) {
            throw LengthMismatch("tabulate: path function returned the wrong length");
        }
        traj.samples.push_back(std::move(s));
    }
    return traj;
}

void write_csv(const Trajectory &traj, std::ostream &out)
{
    std::string line = "t";
    for (const char *prefix : {"q", "qd", "p"}) {
        for (std::size_t a = 0; a < traj.dim; ++a) {
            line += fmt::format(",{}_{}", prefix, a + 1);
        }
    }
    line += ",el_residual\n";
    out << line;
    for (const auto &s : traj.samples) {
        line = fmt::format("{:.17g}", s.t);
        for (const auto *column : {&s.q, &s.qd, &s.p}) {
            for (const double v : *column) {
                line += fmt::format(",{:.17g}", v);
            }
        }
        line += fmt::format(",{:.17g}\n", s.el_residual);
        out << line;
    }
}

} // namespace cxlag
