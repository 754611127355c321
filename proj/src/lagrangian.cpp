#include "cxlag/lagrangian.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

constexpr double pivot_tolerance = 1e-13;
constexpr double closure_tolerance = 1e-12;
constexpr int closure_max_iterations = 50;

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (const double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

bool valid_identifier(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) != 0 || s[0] == '_')) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; });
}

std::string coordinate_name(std::size_t a, std::size_t dim) { return dim == 1 ? "q" : fmt::format("q_{}", a + 1); }
std::string velocity_name(std::size_t a, std::size_t dim) { return dim == 1 ? "qd" : fmt::format("qd_{}", a + 1); }

} // namespace

double Matrix::max_abs() const noexcept { return cxlag::max_abs(data); }

double determinant(Matrix m)
{
    const auto n = m.n;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) {
                piv = r;
            }
        }
        if (m(piv, col) == 0.0) {
            return 0.0;
        }
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m(piv, c), m(col, c));
            }
            det = -det;
        }
        det *= m(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = m(r, col) / m(col, col);
            for (std::size_t c = col; c < n; ++c) {
                m(r, c) -= factor * m(col, c);
            }
        }
    }
    return det;
}

std::vector<double> solve(const Matrix &a, std::span<const double> b)
{
    const auto n = a.n;
    if (b.size() != n) {
        throw LengthMismatch("solve: right-hand side length does not match matrix size");
    }
    Matrix m = a;
    std::vector<double> x(b.begin(), b.end());
    std::vector<double> scale(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            scale[r] = std::max(scale[r], std::abs(m(r, c)));
        }
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) {
                piv = r;
            }
        }
        if (!(std::abs(m(piv, col)) > pivot_tolerance * scale[piv]) || scale[piv] == 0.0) {
            throw SingularMass(fmt::format("mass matrix is singular (pivot {:.3e} in column {})", m(piv, col), col));
        }
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m(piv, c), m(col, c));
            }
            std::swap(x[piv], x[col]);
            std::swap(scale[piv], scale[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = m(r, col) / m(col, col);
            for (std::size_t c = col; c < n; ++c) {
                m(r, c) -= factor * m(col, c);
            }
            x[r] -= factor * x[col];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double acc = x[k];
        for (std::size_t c = k + 1; c < n; ++c) {
            acc -= m(k, c) * x[c];
        }
        x[k] = acc / m(k, k);
    }

    double residual = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double acc = -b[r];
        for (std::size_t c = 0; c < n; ++c) {
            acc += a(r, c) * x[c];
        }
        residual = std::max(residual, std::abs(acc));
    }
    if (!(residual <= 1e-10 * (1.0 + max_abs(b)))) {
        throw SingularMass(fmt::format("mass matrix is ill-conditioned (solve residual {:.3e})", residual));
    }
    return x;
}

// ---------------------------------------------------------------------------------------------
// ComplexLagrangian

ComplexLagrangian::ComplexLagrangian(Expr expr, double omega0, std::size_t dim, Bindings params)
    : expr_(std::move(expr)), omega0_(omega0), dim_(dim), params_(std::move(params))
{
    if (!std::isfinite(omega0_) || omega0_ == 0.0) {
        throw InvalidLagrangian("omega0 must be finite and nonzero");
    }
    if (dim_ == 0) {
        throw InvalidLagrangian("dimension must be positive");
    }

    std::vector<std::string> names{"t"};
    for (std::size_t a = 0; a < dim_; ++a) {
        names.push_back(coordinate_name(a, dim_));
    }
    for (std::size_t a = 0; a < dim_; ++a) {
        names.push_back(velocity_name(a, dim_));
    }
    for (const auto &[name, value] : params_) {
        if (!valid_identifier(name) || name == "i" || function_from_name(name)) {
            throw InvalidLagrangian(fmt::format("'{}' cannot be used as a parameter name", name));
        }
        if (std::find(names.begin(), names.end(), name) != names.end()) {
            throw InvalidLagrangian(fmt::format("parameter '{}' shadows a state variable", name));
        }
        if (!std::isfinite(value)) {
            throw InvalidLagrangian(fmt::format("parameter '{}' is not finite", name));
        }
        names.push_back(name);
    }
    layout_ = SymbolLayout(std::move(names));

    value_prog_ = compile(expr_);
    for (std::size_t a = 0; a < dim_; ++a) {
        d_q_.push_back(diff(expr_, coordinate(a)));
        d_qd_.push_back(diff(expr_, velocity(a)));
        d_q_prog_.push_back(compile(d_q_.back()));
        d_qd_prog_.push_back(compile(d_qd_.back()));
    }
    d_t_ = diff(expr_, "t");
}

ComplexLagrangian ComplexLagrangian::from_text(std::string_view text, double omega0, std::size_t dim, Bindings params)
{
    return ComplexLagrangian(parse(text), omega0, dim, std::move(params));
}

std::string ComplexLagrangian::coordinate(std::size_t a) const { return coordinate_name(a, dim_); }
std::string ComplexLagrangian::velocity(std::size_t a) const { return velocity_name(a, dim_); }

ComplexLagrangian ComplexLagrangian::with_expr(Expr expr) const
{
    return ComplexLagrangian(std::move(expr), omega0_, dim_, params_);
}

void ComplexLagrangian::check_state(const MechState &s) const
{
    if (s.q.size() != dim_ || s.qd.size() != dim_) {
        throw LengthMismatch(fmt::format("state has {} coordinates and {} velocities, expected {}", s.q.size(),
                                         s.qd.size(), dim_));
    }
    const bool finite = std::isfinite(s.t) && std::all_of(s.q.begin(), s.q.end(), [](double x) { return std::isfinite(x); }) &&
                        std::all_of(s.qd.begin(), s.qd.end(), [](double x) { return std::isfinite(x); });
    if (!finite) {
        throw DomainError("state contains a non-finite entry");
    }
}

void ComplexLagrangian::fill_slots(const MechState &s, std::span<double> out) const
{
    out[0] = s.t;
    std::copy(s.q.begin(), s.q.end(), out.begin() + 1);
    std::copy(s.qd.begin(), s.qd.end(), out.begin() + 1 + static_cast<std::ptrdiff_t>(dim_));
    std::size_t k = 1 + 2 * dim_;
    for (const auto &[name, value] : params_) {
        out[k++] = value;
    }
}

std::vector<double> ComplexLagrangian::slots(const MechState &s) const
{
    check_state(s);
    std::vector<double> out(layout_.size());
    fill_slots(s, out);
    return out;
}

Bindings ComplexLagrangian::bindings(const MechState &s) const
{
    check_state(s);
    Bindings b = params_;
    b["t"] = s.t;
    for (std::size_t a = 0; a < dim_; ++a) {
        b[coordinate(a)] = s.q[a];
        b[velocity(a)] = s.qd[a];
    }
    return b;
}

complex ComplexLagrangian::value(const MechState &s) const { return value_prog_(slots(s)); }

complex wirtinger(const ComplexLagrangian &lag, const MechState &s, std::size_t a)
{
    const auto x = lag.slots(s);
    const complex i_over_w0{0.0, 1.0 / lag.omega0()};
    return (lag.d_velocity(a, x) - i_over_w0 * lag.d_coordinate(a, x)) / std::numbers::sqrt2;
}

// ---------------------------------------------------------------------------------------------
// EomSystem

EomSystem::EomSystem(ComplexLagrangian lag) : lag_(std::move(lag))
{
    const auto n = lag_.dim();
    const double w0 = lag_.omega0();
    const Expr minus_i_over_w0(complex{0.0, -1.0 / w0});
    const Expr i_w0(complex{0.0, w0});

    for (std::size_t a = 0; a < n; ++a) {
        const auto &p = lag_.d_velocity(a);
        const auto &q = lag_.d_coordinate(a);
        f_.push_back(simplify(p + minus_i_over_w0 * q));
        g_.push_back(simplify(q + i_w0 * p));
    }
    for (std::size_t a = 0; a < n; ++a) {
        f_prog_.push_back(lag_.compile(f_[a]));
        g_prog_.push_back(lag_.compile(g_[a]));
        ft_prog_.push_back(lag_.compile(diff(f_[a], "t")));
        const auto &p = lag_.d_velocity(a);
        const auto &q = lag_.d_coordinate(a);
        p_t_.push_back(lag_.compile(diff(p, "t")));
        q_t_.push_back(lag_.compile(diff(q, "t")));
        for (std::size_t b = 0; b < n; ++b) {
            mass_.push_back(diff(f_[a], lag_.velocity(b)));
            mass_prog_.push_back(lag_.compile(mass_.back()));
            fq_prog_.push_back(lag_.compile(diff(f_[a], lag_.coordinate(b))));
            p_q_.push_back(lag_.compile(diff(p, lag_.coordinate(b))));
            p_qd_.push_back(lag_.compile(diff(p, lag_.velocity(b))));
            q_q_.push_back(lag_.compile(diff(q, lag_.coordinate(b))));
            q_qd_.push_back(lag_.compile(diff(q, lag_.velocity(b))));
        }
    }
}

std::vector<double> EomSystem::momentum(const MechState &s) const
{
    const auto x = lag_.slots(s);
    std::vector<double> out(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
        out[a] = f_prog_[a].real(x);
    }
    return out;
}

std::vector<double> EomSystem::force(const MechState &s) const
{
    const auto x = lag_.slots(s);
    std::vector<double> out(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
        out[a] = g_prog_[a].real(x);
    }
    return out;
}

Matrix EomSystem::mass_matrix(const MechState &s) const
{
    const auto x = lag_.slots(s);
    Matrix m(dim());
    for (std::size_t k = 0; k < m.data.size(); ++k) {
        m.data[k] = mass_prog_[k].real(x);
    }
    return m;
}

Matrix EomSystem::momentum_q_jacobian(const MechState &s) const
{
    const auto x = lag_.slots(s);
    Matrix m(dim());
    for (std::size_t k = 0; k < m.data.size(); ++k) {
        m.data[k] = fq_prog_[k].real(x);
    }
    return m;
}

std::vector<double> EomSystem::momentum_t(const MechState &s) const
{
    const auto x = lag_.slots(s);
    std::vector<double> out(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
        out[a] = ft_prog_[a].real(x);
    }
    return out;
}

std::vector<double> EomSystem::accel(const MechState &s) const
{
    const auto n = dim();
    const auto x = lag_.slots(s);
    Matrix a(n);
    std::vector<double> rhs(n);
    for (std::size_t r = 0; r < n; ++r) {
        double acc = g_prog_[r].real(x) - ft_prog_[r].real(x);
        for (std::size_t c = 0; c < n; ++c) {
            a(r, c) = mass_prog_[r * n + c].real(x);
            acc -= fq_prog_[r * n + c].real(x) * s.qd[c];
        }
        rhs[r] = acc;
    }
    return solve(a, rhs);
}

std::vector<double> EomSystem::closure_velocity(double t, std::span<const double> q, std::span<const double> guess) const
{
    if (!closure_mass_) {
        throw DegenerateWithoutClosure("closure velocity requested but no closure mass was supplied");
    }
    const auto n = dim();
    const auto &mass = *closure_mass_;
    MechState s{t, std::vector<double>(q.begin(), q.end()),
                guess.size() == n ? std::vector<double>(guess.begin(), guess.end()) : std::vector<double>(n, 0.0)};

    auto residual = [&](const MechState &st) {
        auto f = momentum(st);
        for (std::size_t a = 0; a < n; ++a) {
            f[a] -= mass[a] * st.qd[a];
        }
        return f;
    };
    auto tolerance = [&](const MechState &st) {
        double scale = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            scale = std::max(scale, std::abs(mass[a] * st.qd[a]));
        }
        return closure_tolerance * (1.0 + scale);
    };

    auto r = residual(s);
    for (int iter = 0; iter <= closure_max_iterations; ++iter) {
        const double norm = max_abs(r);
        if (norm <= tolerance(s)) {
            return s.qd;
        }
        if (iter == closure_max_iterations) {
            break;
        }
        Matrix jac = mass_matrix(s);
        for (std::size_t a = 0; a < n; ++a) {
            jac(a, a) -= mass[a];
        }
        std::vector<double> minus_r(n);
        std::transform(r.begin(), r.end(), minus_r.begin(), [](double v) { return -v; });
        std::vector<double> step;
        try {
            step = solve(jac, minus_r);
        } catch (const SingularMass &) {
            throw ClosureInconsistent("closure Jacobian A - diag(m) is singular");
        }
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
            MechState trial = s;
            for (std::size_t a = 0; a < n; ++a) {
                trial.qd[a] += lambda * step[a];
            }
            auto r_trial = residual(trial);
            const double trial_norm = max_abs(r_trial);
            if (trial_norm < norm || trial_norm <= tolerance(trial)) {
                s = std::move(trial);
                r = std::move(r_trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    throw ClosureInconsistent(fmt::format("closure relation f(q, qd, t) = m qd did not converge at t = {}", t));
}

std::vector<double> EomSystem::closure_accel(const MechState &s) const
{
    if (!closure_mass_) {
        throw DegenerateWithoutClosure("closure acceleration requested but no closure mass was supplied");
    }
    const auto n = dim();
    Matrix lhs = mass_matrix(s);
    for (auto &v : lhs.data) {
        v = -v;
    }
    for (std::size_t a = 0; a < n; ++a) {
        lhs(a, a) += (*closure_mass_)[a];
    }
    const auto fq = momentum_q_jacobian(s);
    auto rhs = momentum_t(s);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            rhs[a] += fq(a, b) * s.qd[b];
        }
    }
    return solve(lhs, rhs);
}

double EomSystem::el_residual(const MechState &s, std::span<const double> qdd) const
{
    const auto n = dim();
    const auto x = lag_.slots(s);
    const double w0 = lag_.omega0();
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        complex p_dot = p_t_[a](x);
        complex q_dot = q_t_[a](x);
        for (std::size_t b = 0; b < n; ++b) {
            const auto k = a * n + b;
            p_dot += p_q_[k](x) * s.qd[b] + p_qd_[k](x) * qdd[b];
            q_dot += q_q_[k](x) * s.qd[b] + q_qd_[k](x) * qdd[b];
        }
        const complex p = lag_.d_velocity(a, x);
        const complex q = lag_.d_coordinate(a, x);
        const double lhs = q.real() - p_dot.real();
        const double rhs = w0 * p.imag() + q_dot.imag() / w0;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

EomSystem derive_eom(const ComplexLagrangian &lag, const MechState &probe, std::optional<std::vector<double>> closure_mass)
{
    lag.check_state(probe);
    EomSystem eom(lag);
    const auto n = lag.dim();

    const auto a = eom.mass_matrix(probe);
    eom.probe_det_ = determinant(a);
    const double threshold = regularity_threshold * std::pow(std::max(1.0, a.max_abs()), static_cast<double>(n));
    eom.regularity_ = std::abs(eom.probe_det_) > threshold ? Regularity::regular : Regularity::degenerate;

    if (closure_mass) {
        if (closure_mass->size() != n ||
            !std::all_of(closure_mass->begin(), closure_mass->end(), [](double m) { return std::isfinite(m) && m > 0.0; })) {
            throw ConfigError(fmt::format("closure mass must be {} positive finite value(s)", n));
        }
    }

    if (eom.regular()) {
        if (closure_mass) {
            eom.warnings_.emplace_back("closure_mass ignored: the system is regular at the probe");
        }
        return eom;
    }

    if (!closure_mass) {
        throw DegenerateWithoutClosure(
            fmt::format("mass matrix is singular at the probe (det = {:.3e}); supply a closure mass", eom.probe_det_));
    }
    eom.closure_mass_ = std::move(closure_mass);

    MechState on_closure = probe;
    on_closure.qd = eom.closure_velocity(probe.t, probe.q, probe.qd);
    const auto qdd = eom.closure_accel(on_closure);
    const double residual = eom.el_residual(on_closure, qdd);
    const double scale = 1.0 + max_abs(eom.force(on_closure)) + max_abs(eom.momentum(on_closure));
    if (residual > 1e-9 * scale) {
        eom.warnings_.push_back(fmt::format(
            "closure flow violates the generalized Euler-Lagrange equation at the probe (residual {:.6e}); "
            "for a pure-imaginary oscillator this means omega0^2 != k/m",
            residual));
    }
    return eom;
}

ComplexPhase to_complex_phase(const EomSystem &eom, const MechState &s)
{
    const double w0 = eom.lagrangian().omega0();
    const auto p = eom.momentum(s);
    const auto pdot = eom.force(s);
    ComplexPhase out;
    for (std::size_t a = 0; a < eom.dim(); ++a) {
        out.w.emplace_back(complex{s.qd[a], w0 * s.q[a]} / std::numbers::sqrt2);
        out.u.emplace_back(complex{pdot[a], w0 * p[a]} / std::numbers::sqrt2);
    }
    return out;
}

double complex_law_gap(const EomSystem &eom, const MechState &s)
{
    const auto phase = to_complex_phase(eom, s);
    const complex i_w0{0.0, eom.lagrangian().omega0()};
    double worst = 0.0;
    for (std::size_t a = 0; a < eom.dim(); ++a) {
        worst = std::max(worst, std::abs(phase.u[a] - i_w0 * wirtinger(eom.lagrangian(), s, a)));
    }
    return worst;
}

} // namespace cxlag
