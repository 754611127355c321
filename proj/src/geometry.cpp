#include "cxlag/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

using Vec = std::vector<double>;

// Field X = (qd, qdd) on the state vector y = [q, qd].
Vec field(const EomSystem &eom, double t, const Vec &y)
{
    const auto n = eom.dim();
    MechState s{t, Vec(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)),
                Vec(y.begin() + static_cast<std::ptrdiff_t>(n), y.end())};
    Vec out = s.qd;
    const auto qdd = eom.accel(s);
    out.insert(out.end(), qdd.begin(), qdd.end());
    return out;
}

MechState flow(const EomSystem &eom, const MechState &s, double span, int substeps)
{
    const auto n = eom.dim();
    Vec y = s.q;
    y.insert(y.end(), s.qd.begin(), s.qd.end());
    const double h = span / substeps;
    double t = s.t;
    Vec tmp(y.size());
    for (int k = 0; k < substeps; ++k, t = s.t + k * h) {
        const Vec k1 = field(eom, t, y);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        const Vec k2 = field(eom, t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        const Vec k3 = field(eom, t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
        const Vec k4 = field(eom, t + h, tmp);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return {s.t + span, Vec(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)),
            Vec(y.begin() + static_cast<std::ptrdiff_t>(n), y.end())};
}

} // namespace

OneForm theta(const EomSystem &eom, const MechState &s)
{
    return {eom.momentum(s), Vec(eom.dim(), 0.0), s};
}

OneForm lie_theta(const EomSystem &eom, const MechState &s)
{
    return {eom.force(s), eom.momentum(s), s};
}

OneForm lie_theta_cartan(const EomSystem &eom, const MechState &s, double delta)
{
    if (!eom.regular()) {
        throw SingularMass("the micro-arc evaluation needs a regular system");
    }
    const auto n = eom.dim();
    constexpr int substeps = 4;
    const auto f_m2 = eom.momentum(flow(eom, s, -2.0 * delta, 2 * substeps));
    const auto f_m1 = eom.momentum(flow(eom, s, -delta, substeps));
    const auto f_p1 = eom.momentum(flow(eom, s, delta, substeps));
    const auto f_p2 = eom.momentum(flow(eom, s, 2.0 * delta, 2 * substeps));
    const auto f0 = eom.momentum(s);

    OneForm out{Vec(n, 0.0), Vec(n, 0.0), s};
    for (std::size_t a = 0; a < n; ++a) {
        out.dq[a] = (-f_p2[a] + 8.0 * f_p1[a] - 8.0 * f_m1[a] + f_m2[a]) / (12.0 * delta);
    }

    // transport: f_b dX^b/dq_a on the dq slot, f_b dX^b/dqd_a on the dqd slot, with X^b = qd_b
    const double step = 1e-4;
    for (std::size_t a = 0; a < n; ++a) {
        for (const bool velocity_slot : {false, true}) {
            MechState up = s;
            MechState down = s;
            auto &coord_up = velocity_slot ? up.qd : up.q;
            auto &coord_down = velocity_slot ? down.qd : down.q;
            coord_up[a] += step;
            coord_down[a] -= step;
            double transport = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                transport += f0[b] * (up.qd[b] - down.qd[b]) / (2.0 * step);
            }
            (velocity_slot ? out.dqd : out.dq)[a] += transport;
        }
    }
    return out;
}

OneForm rhs_pairing_form(const ComplexLagrangian &lag, const MechState &s)
{
    lag.check_state(s);
    const auto n = lag.dim();
    const double w0 = lag.omega0();
    OneForm out{Vec(n, 0.0), Vec(n, 0.0), s};
    for (std::size_t a = 0; a < n; ++a) {
        const complex z = wirtinger(lag, s, a);
        out.dq[a] = 2.0 * (z * complex(0.0, w0 / std::numbers::sqrt2)).real();
        out.dqd[a] = 2.0 * (z / std::numbers::sqrt2).real();
    }
    return out;
}

OneForm differential(const ComplexLagrangian &lag, const MechState &s)
{
    lag.check_state(s);
    const auto x = lag.slots(s);
    OneForm out{Vec(lag.dim()), Vec(lag.dim()), s};
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        out.dq[a] = lag.d_coordinate(a, x).real();
        out.dqd[a] = lag.d_velocity(a, x).real();
    }
    return out;
}

double max_deviation(const OneForm &a, const OneForm &b)
{
    if (a.dq.size() != b.dq.size() || a.dqd.size() != b.dqd.size()) {
        throw LengthMismatch("one-forms of different dimension");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.dq.size(); ++i) {
        worst = std::max(worst, std::abs(a.dq[i] - b.dq[i]));
    }
    for (std::size_t i = 0; i < a.dqd.size(); ++i) {
        worst = std::max(worst, std::abs(a.dqd[i] - b.dqd[i]));
    }
    return worst;
}

} // namespace cxlag
