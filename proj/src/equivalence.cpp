#include "cxlag/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

const complex I{0.0, 1.0};

// f, g, A = df/dqd, df/dq, df/dt for one Lagrangian, as programs whose real parts are the maps.
struct MapPrograms {
    std::size_t n = 0;
    std::vector<Program> g, mass, fq, ft;

    explicit MapPrograms(const ComplexLagrangian &lag) : n(lag.dim())
    {
        const double w0 = lag.omega0();
        for (std::size_t a = 0; a < n; ++a) {
            const Expr f = simplify(lag.d_velocity(a) - Expr(I / w0) * lag.d_coordinate(a));
            g.push_back(lag.compile(simplify(lag.d_coordinate(a) + Expr(I * w0) * lag.d_velocity(a))));
            ft.push_back(lag.compile(diff(f, "t")));
            for (std::size_t b = 0; b < n; ++b) {
                mass.push_back(lag.compile(diff(f, lag.velocity(b))));
                fq.push_back(lag.compile(diff(f, lag.coordinate(b))));
            }
        }
    }

    // nullopt when the mass matrix is singular
    [[nodiscard]] std::optional<std::vector<double>> accel(std::span<const double> x, const MechState &s) const
    {
        Matrix a(n);
        std::vector<double> rhs(n);
        for (std::size_t r = 0; r < n; ++r) {
            double acc = g[r].real(x) - ft[r].real(x);
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) = mass[r * n + c].real(x);
                acc -= fq[r * n + c].real(x) * s.qd[c];
            }
            rhs[r] = acc;
        }
        try {
            return solve(a, rhs);
        } catch (const SingularMass &) {
            return std::nullopt;
        }
    }
};

struct ResidualPrograms {
    std::size_t n = 0;
    std::vector<Program> f_qd, f_q, f_t, g;

    ResidualPrograms(const ComplexLagrangian &layout_owner, const Ffunction &F, const Expr &delta)
        : n(layout_owner.dim())
    {
        const double w0 = layout_owner.omega0();
        for (std::size_t a = 0; a < n; ++a) {
            const auto &fa = F.components[a];
            f_t.push_back(layout_owner.compile(diff(fa, "t")));
            const Expr ga = simplify(diff(delta, layout_owner.coordinate(a)) +
                                     Expr(I * w0) * diff(delta, layout_owner.velocity(a)));
            g.push_back(layout_owner.compile(ga));
            for (std::size_t b = 0; b < n; ++b) {
                f_qd.push_back(layout_owner.compile(diff(fa, layout_owner.velocity(b))));
                f_q.push_back(layout_owner.compile(diff(fa, layout_owner.coordinate(b))));
            }
        }
    }

    struct Terms {
        double residual = 0.0;
        double largest = 0.0;
    };

    [[nodiscard]] std::vector<Terms> evaluate(std::span<const double> x, const MechState &s,
                                              std::span<const double> qdd) const
    {
        std::vector<Terms> out(n);
        for (std::size_t a = 0; a < n; ++a) {
            double sum = 0.0;
            double largest = 0.0;
            auto add = [&](double term) {
                sum += term;
                largest = std::max(largest, std::abs(term));
            };
            for (std::size_t b = 0; b < n; ++b) {
                add(f_qd[a * n + b].real(x) * qdd[b]);
                add(f_q[a * n + b].real(x) * s.qd[b]);
            }
            add(f_t[a].real(x));
            add(-g[a].real(x));
            out[a] = {sum, largest};
        }
        return out;
    }

    [[nodiscard]] bool qdd_free(std::span<const double> x) const
    {
        return std::all_of(f_qd.begin(), f_qd.end(), [&](const Program &p) { return p.real(x) == 0.0; });
    }
};

struct SampleOutcome {
    double residual = 0.0;
    double largest = 0.0;
    bool skipped = false;
    double accel_gap = std::numeric_limits<double>::quiet_NaN();
};

} // namespace

LagrangianPair::LagrangianPair(ComplexLagrangian first, ComplexLagrangian second)
    : first_(std::move(first)), second_(std::move(second))
{
    if (first_.omega0() != second_.omega0()) {
        throw ConfigError(fmt::format("pair frequencies differ: {} vs {}", first_.omega0(), second_.omega0()));
    }
    if (first_.dim() != second_.dim()) {
        throw ConfigError(fmt::format("pair dimensions differ: {} vs {}", first_.dim(), second_.dim()));
    }
    if (first_.params() != second_.params()) {
        throw ConfigError("pair members must share the same parameter bindings");
    }
    delta_ = simplify(second_.expr() - first_.expr());
}

Ffunction Ffunction::from_pair(const LagrangianPair &pair)
{
    const auto &lag = pair.first();
    Ffunction F;
    F.omega0 = lag.omega0();
    F.params = lag.params();
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        F.components.push_back(simplify(diff(pair.difference(), lag.velocity(a)) -
                                        Expr(I / F.omega0) * diff(pair.difference(), lag.coordinate(a))));
    }
    return F;
}

Ffunction Ffunction::single(Expr f, double omega0, Bindings params)
{
    return Ffunction{{std::move(f)}, omega0, std::move(params)};
}

std::string_view to_string(Verdict v)
{
    switch (v) {
        case Verdict::equivalent:
            return "equivalent";
        case Verdict::not_equivalent:
            return "not_equivalent";
        case Verdict::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

std::vector<double> equivalence_residual(const LagrangianPair &pair, const MechState &s, std::span<const double> qdd)
{
    const auto &lag = pair.first();
    lag.check_state(s);
    if (qdd.size() != lag.dim()) {
        throw LengthMismatch("qdd length differs from the dimension");
    }
    const ResidualPrograms res(lag, Ffunction::from_pair(pair), pair.difference());
    const auto x = lag.slots(s);
    std::vector<double> out;
    for (const auto &terms : res.evaluate(x, s, qdd)) {
        out.push_back(terms.residual);
    }
    return out;
}

EquivalenceReport eom_equivalent(const LagrangianPair &pair, const std::vector<MechState> &samples, Execution exec)
{
    if (samples.size() < 100) {
        throw BadSampling(fmt::format("equivalence needs at least 100 samples, got {}", samples.size()));
    }
    const auto &lag1 = pair.first();
    const auto &lag2 = pair.second();
    for (const auto &s : samples) {
        lag1.check_state(s);
    }
    const MapPrograms maps1(lag1);
    const MapPrograms maps2(lag2);
    const ResidualPrograms res(lag1, Ffunction::from_pair(pair), pair.difference());
    const auto n = lag1.dim();

    const auto outcomes = sweep<SampleOutcome>(
        samples.size(),
        [&](std::size_t i) {
            const auto &s = samples[i];
            const auto x = lag1.slots(s);
            SampleOutcome out;
            auto qdd1 = maps1.accel(x, s);
            if (!qdd1) {
                if (!res.qdd_free(x)) {
                    out.skipped = true;
                    return out;
                }
                qdd1 = std::vector<double>(n, 0.0);
            }
            for (const auto &terms : res.evaluate(x, s, *qdd1)) {
                out.residual = std::max(out.residual, std::abs(terms.residual));
                out.largest = std::max(out.largest, terms.largest);
            }
            if (const auto qdd2 = maps2.accel(lag2.slots(s), s); qdd2 && maps1.accel(x, s)) {
                double gap = 0.0;
                for (std::size_t a = 0; a < n; ++a) {
                    gap = std::max(gap, std::abs((*qdd1)[a] - (*qdd2)[a]));
                }
                out.accel_gap = gap;
            }
            return out;
        },
        exec);

    EquivalenceReport report;
    report.samples = samples.size();
    double largest = 0.0;
    for (const auto &o : outcomes) {
        if (o.skipped) {
            ++report.skipped;
            continue;
        }
        report.max_residual = std::max(report.max_residual, o.residual);
        largest = std::max(largest, o.largest);
        if (!std::isnan(o.accel_gap)) {
            report.accel_gap = std::max(report.accel_gap.value_or(0.0), o.accel_gap);
        }
    }
    report.scale = std::max(1.0, largest);
    if (static_cast<double>(report.skipped) > max_skip_fraction * static_cast<double>(report.samples)) {
        report.verdict = Verdict::inconclusive;
    } else if (report.max_residual <= equivalence_tolerance * report.scale) {
        report.verdict = Verdict::equivalent;
    } else {
        report.verdict = Verdict::not_equivalent;
    }
    return report;
}

ComplexLagrangian gauge_add(const ComplexLagrangian &lag, const Expr &lambda)
{
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        if (depends_on(lambda, lag.velocity(a))) {
            throw GaugeDependsOnVelocity(
                fmt::format("gauge function must depend on coordinates and time only; found {}", lag.velocity(a)));
        }
    }
    Expr total = diff(lambda, "t");
    for (std::size_t a = 0; a < lag.dim(); ++a) {
        total = total + diff(lambda, lag.coordinate(a)) * Expr::symbol(lag.velocity(a));
    }
    return lag.with_expr(simplify(lag.expr() + total));
}

double integrability_residual(const Ffunction &f, const Expr &phi, const std::vector<MechState> &samples,
                              Execution exec)
{
    if (f.components.size() != 1) {
        throw UnsupportedDimension("the integrability condition is stated for one degree of freedom");
    }
    const ComplexLagrangian layout_owner(Expr(0.0), f.omega0, 1, f.params);
    const double w2 = f.omega0 * f.omega0;
    const auto &F = f.components[0];
    const Expr lhs = simplify(diff(diff(F, "t"), "t") + Expr(w2) * F);
    const Expr rhs = simplify(diff(diff(phi, "q"), "q") + Expr(w2) * diff(diff(phi, "qd"), "qd"));
    const Program program = layout_owner.compile(simplify(lhs - rhs));
    for (const auto &s : samples) {
        layout_owner.check_state(s);
    }
    return sweep_max(
        samples.size(), [&](std::size_t i) { return std::abs(program.real(layout_owner.slots(samples[i]))); }, exec);
}

std::vector<MechState> sample_states(std::size_t dim, const SampleBox &box, std::size_t n, std::uint64_t seed)
{
    std::vector<Interval> axes{box.t};
    axes.insert(axes.end(), dim, box.q);
    axes.insert(axes.end(), dim, box.qd);
    const auto rows = stratified_points(axes, n, seed);
    std::vector<MechState> out;
    out.reserve(rows.size());
    for (const auto &row : rows) {
        MechState s;
        s.t = row[0];
        s.q.assign(row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(dim));
        s.qd.assign(row.begin() + 1 + static_cast<std::ptrdiff_t>(dim), row.end());
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace cxlag
