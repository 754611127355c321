#include "cxlag/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

template <class T>
T simpson_impl(std::span<const T> values, double h)
{
    const auto n = values.size();
    if (n < 3 || n % 2 == 0) {
        throw BadSampling(fmt::format("Simpson's rule needs an odd sample count >= 3, got {}", n));
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw BadSampling("Simpson's rule needs a positive step");
    }
    T odd{};
    T even{};
    for (std::size_t k = 1; k + 1 < n; ++k) {
        (k % 2 == 1 ? odd : even) += values[k];
    }
    return h / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

struct Maps {
    std::vector<double> f, g;
};

// f and g straight from the partials of Lc, so degenerate systems need no closure here.
Maps maps_at(const ComplexLagrangian &lag, const MechState &s)
{
    const auto x = lag.slots(s);
    const double w0 = lag.omega0();
    Maps m;
    m.f.resize(lag.dim());
    m.g.resize(lag.dim());
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        const complex p = lag.d_velocity(a, x);
        const complex q = lag.d_coordinate(a, x);
        m.f[a] = p.real() + q.imag() / w0;
        m.g[a] = q.real() - w0 * p.imag();
    }
    return m;
}

void check_lengths(std::size_t expected, std::size_t a, std::size_t b)
{
    if (a != expected || b != expected) {
        throw LengthMismatch(fmt::format("expected vectors of length {}, got {} and {}", expected, a, b));
    }
}

} // namespace

complex simpson(std::span<const complex> values, double h) { return simpson_impl(values, h); }
double simpson(std::span<const double> values, double h) { return simpson_impl(values, h); }

void check_uniform(const Trajectory &traj)
{
    if (traj.samples.empty()) {
        throw BadSampling("empty trajectory");
    }
    const double t0 = traj.samples.front().t;
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const double expected = t0 + static_cast<double>(k) * traj.h;
        if (std::abs(traj.samples[k].t - expected) > 1e-9 * (1.0 + std::abs(expected))) {
            throw BadSampling(fmt::format("sample {} at t = {} is off the uniform grid", k, traj.samples[k].t));
        }
    }
}

complex action(const ComplexLagrangian &lag, const Trajectory &traj)
{
    check_uniform(traj);
    std::vector<complex> values;
    values.reserve(traj.samples.size());
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        values.push_back(lag.value(traj.state(k)));
    }
    return simpson(values, traj.h);
}

double VariationField::eta(double t) const
{
    if (t <= t0 || t >= t1) {
        return 0.0;
    }
    return amplitude * std::sin(mode * std::numbers::pi * (t - t0) / (t1 - t0));
}

double VariationField::eta_dot(double t) const
{
    if (t < t0 || t > t1) {
        return 0.0;
    }
    const double k = mode * std::numbers::pi / (t1 - t0);
    return amplitude * k * std::cos(k * (t - t0));
}

complex variation_integrand(const ComplexLagrangian &lag, const MechState &s, std::span<const double> dq,
                            std::span<const double> dqd)
{
    check_lengths(lag.dim(), dq.size(), dqd.size());
    const auto m = maps_at(lag, s);
    const double w0 = lag.omega0();
    double re = 0.0;
    double im = 0.0;
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        re += m.g[a] * dq[a] + m.f[a] * dqd[a];
        im += w0 * m.f[a] * dq[a] - m.g[a] * dqd[a] / w0;
    }
    return {re, im};
}

double pairing_integrand(const ComplexLagrangian &lag, const MechState &s, std::span<const double> dq,
                         std::span<const double> dqd)
{
    check_lengths(lag.dim(), dq.size(), dqd.size());
    const double w0 = lag.omega0();
    std::vector<complex> z(lag.dim());
    std::vector<complex> dw(lag.dim());
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        z[a] = wirtinger(lag, s, a);
        dw[a] = complex(dqd[a], w0 * dq[a]) / std::numbers::sqrt2;
    }
    return 2.0 * pair(z, dw);
}

complex first_variation(const ComplexLagrangian &lag, const Trajectory &traj, const VariationField &var)
{
    check_uniform(traj);
    if (var.direction >= lag.dim()) {
        throw ConfigError(fmt::format("variation direction {} out of range", var.direction));
    }
    if (!(var.t1 > var.t0) || var.mode < 1) {
        throw ConfigError("variation needs t1 > t0 and mode >= 1");
    }
    const double span = traj.back().t - traj.samples.front().t;
    const double tol = 1e-9 * (1.0 + span);
    if (std::abs(traj.samples.front().t - var.t0) > tol || std::abs(traj.back().t - var.t1) > tol) {
        throw BadSampling(fmt::format("variation window [{}, {}] does not match the trajectory span [{}, {}]",
                                      var.t0, var.t1, traj.samples.front().t, traj.back().t));
    }
    std::vector<complex> values;
    values.reserve(traj.samples.size());
    std::vector<double> dq(lag.dim(), 0.0);
    std::vector<double> dqd(lag.dim(), 0.0);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        auto s = traj.state(k);
        dq[var.direction] = var.eta(s.t);
        dqd[var.direction] = var.eta_dot(s.t);
        s.q[var.direction] += dq[var.direction];
        s.qd[var.direction] += dqd[var.direction];
        values.push_back(variation_integrand(lag, s, dq, dqd));
    }
    return simpson(values, traj.h);
}

double real_inner(std::span<const complex> z, std::span<const complex> v)
{
    check_lengths(z.size(), z.size(), v.size());
    double sum = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
        sum += (z[a] * std::conj(v[a])).real();
    }
    return sum;
}

double pair(std::span<const complex> z, std::span<const complex> v)
{
    check_lengths(z.size(), z.size(), v.size());
    double sum = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
        sum += (z[a] * v[a]).real();
    }
    return sum;
}

double noether_charge(const EomSystem &eom, const MechState &s, std::span<const double> dq)
{
    check_lengths(eom.dim(), dq.size(), dq.size());
    const auto f = eom.momentum(s);
    double gamma = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) {
        gamma += f[a] * dq[a];
    }
    return gamma;
}

Displacement::Displacement(std::vector<double> constant) : size_(constant.size()), constant_(std::move(constant)) {}

Displacement::Displacement(const ComplexLagrangian &lag, std::vector<Expr> components) : size_(components.size())
{
    for (const auto &e : components) {
        for (std::size_t a = 0; a < lag.dim(); ++a) {
            if (depends_on(e, lag.velocity(a))) {
                throw UnboundSymbol(lag.velocity(a));
            }
        }
        programs_.push_back(lag.compile(e));
    }
}

std::vector<double> Displacement::at(const ComplexLagrangian &lag, const MechState &s) const
{
    if (programs_.empty()) {
        return constant_;
    }
    const auto x = lag.slots(s);
    std::vector<double> out;
    out.reserve(programs_.size());
    for (const auto &p : programs_) {
        out.push_back(p.real(x));
    }
    return out;
}

ChargeReport charge_drift(const EomSystem &eom, const Trajectory &traj, const Displacement &dq)
{
    ChargeReport report;
    if (traj.samples.empty()) {
        return report;
    }
    const auto &lag = eom.lagrangian();
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const auto s = traj.state(k);
        const auto d = dq.at(lag, s);
        const double gamma = noether_charge(eom, s, d);
        if (k == 0) {
            report.initial = gamma;
        }
        report.max_drift = std::max(report.max_drift, std::abs(gamma - report.initial));
        const auto g = eom.force(s);
        double rate = 0.0;
        for (std::size_t a = 0; a < g.size(); ++a) {
            rate += g[a] * d[a];
        }
        report.max_force = std::max(report.max_force, std::abs(rate));
    }
    return report;
}

bool is_solution(const Trajectory &traj, double tol) { return traj.max_el_residual() <= tol; }

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    check_lengths(x.size(), x.size(), y.size());
    if (x.size() < 2) {
        throw BadSampling("slope fit needs at least two points");
    }
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double ax = std::abs(x[k]);
        const double ay = std::abs(y[k]);
        if (!(ax > 0.0) || !(ay > 0.0) || !std::isfinite(ax) || !std::isfinite(ay)) {
            throw BadSampling(fmt::format("log-log fit point ({}, {}) is not positive and finite", x[k], y[k]));
        }
        const double lx = std::log(ax);
        const double ly = std::log(ay);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw BadSampling("slope fit needs distinct abscissae");
    }
    return (n * sxy - sx * sy) / denom;
}

} // namespace cxlag
