#pragma once

// Complex Lagrangian dynamics.
//
// For a complex Lagrangian  Lc = L + i M  over real (t, q, qd) and a frequency constant w0:
//
//   momentum map  f_a = dL/dqd_a + (1/w0) dM/dq_a
//   force map     g_a = dL/dq_a  - w0 dM/dqd_a
//   dynamics      p = f,  pdot = g      (equivalently  u = i w0 dLc/dw)
//   mass matrix   A_ab = df_a/dqd_b
//
// Regular systems are integrated as A qdd = g - (df/dq) qd - df/dt.  Degenerate systems are closed by
// the point-particle relation f(q, qd, t) = m qd, solved for qd.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxlag/expr.hpp"

namespace cxlag {

struct MechState {
    double t = 0.0;
    std::vector<double> q;
    std::vector<double> qd;
};

/// Row-major dense square matrix; enough for N-DOF mass matrices.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> data;

    Matrix() = default;
    explicit Matrix(std::size_t size) : n(size), data(size * size, 0.0) {}

    double &operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
    [[nodiscard]] double max_abs() const noexcept;
};

/// Determinant by partial-pivot LU.
double determinant(Matrix m);

/// Solve A x = b by partial-pivot elimination.  Throws SingularMass when a pivot falls below
/// 1e-13 times its row scale.
std::vector<double> solve(const Matrix &a, std::span<const double> b);

class ComplexLagrangian {
public:
    /// Throws InvalidLagrangian for w0 == 0, dim == 0, a non-finite or reserved parameter name;
    /// UnboundSymbol when the expression uses an undeclared symbol.
    ComplexLagrangian(Expr expr, double omega0, std::size_t dim = 1, Bindings params = {});

    static ComplexLagrangian from_text(std::string_view text, double omega0, std::size_t dim = 1,
                                       Bindings params = {});

    [[nodiscard]] const Expr &expr() const noexcept { return expr_; }
    [[nodiscard]] double omega0() const noexcept { return omega0_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const Bindings &params() const noexcept { return params_; }
    [[nodiscard]] const SymbolLayout &layout() const noexcept { return layout_; }

    /// `q`/`qd` for one degree of freedom, `q_1..q_N`/`qd_1..qd_N` otherwise (a is 0-based).
    [[nodiscard]] std::string coordinate(std::size_t a) const;
    [[nodiscard]] std::string velocity(std::size_t a) const;

    /// Same parameters, frequency and dimension, different expression.
    [[nodiscard]] ComplexLagrangian with_expr(Expr expr) const;

    [[nodiscard]] Program compile(const Expr &e) const { return Program(e, layout_); }

    /// Slot vector [t, q..., qd..., params...] for compiled evaluation.
    [[nodiscard]] std::vector<double> slots(const MechState &s) const;
    void fill_slots(const MechState &s, std::span<double> out) const;
    [[nodiscard]] Bindings bindings(const MechState &s) const;

    [[nodiscard]] complex value(const MechState &s) const;

    /// dLc/dq_a and dLc/dqd_a, dLc/dt as complex expressions.
    [[nodiscard]] const Expr &d_coordinate(std::size_t a) const { return d_q_[a]; }
    [[nodiscard]] const Expr &d_velocity(std::size_t a) const { return d_qd_[a]; }
    [[nodiscard]] const Expr &d_time() const noexcept { return d_t_; }

    [[nodiscard]] complex d_coordinate(std::size_t a, std::span<const double> slots) const
    {
        return d_q_prog_[a](slots);
    }
    [[nodiscard]] complex d_velocity(std::size_t a, std::span<const double> slots) const
    {
        return d_qd_prog_[a](slots);
    }

    void check_state(const MechState &s) const;

private:
    Expr expr_;
    double omega0_;
    std::size_t dim_;
    Bindings params_;
    SymbolLayout layout_;
    Program value_prog_;
    std::vector<Expr> d_q_, d_qd_;
    Expr d_t_;
    std::vector<Program> d_q_prog_, d_qd_prog_;
};

/// (1/sqrt2) [dLc/dqd_a - (i/w0) dLc/dq_a] at s.
complex wirtinger(const ComplexLagrangian &lag, const MechState &s, std::size_t a);

enum class Regularity { regular, degenerate };

class EomSystem;

inline constexpr double regularity_threshold = 1e-10;

/// Builds f, g and A symbolically and classifies the system at `probe`.
/// Throws DegenerateWithoutClosure, ClosureInconsistent.
EomSystem derive_eom(const ComplexLagrangian &lag, const MechState &probe,
                     std::optional<std::vector<double>> closure_mass = std::nullopt);

class EomSystem {
public:
    [[nodiscard]] const ComplexLagrangian &lagrangian() const noexcept { return lag_; }
    [[nodiscard]] std::size_t dim() const noexcept { return lag_.dim(); }
    [[nodiscard]] Regularity regularity() const noexcept { return regularity_; }
    [[nodiscard]] bool regular() const noexcept { return regularity_ == Regularity::regular; }
    [[nodiscard]] const std::optional<std::vector<double>> &closure_mass() const noexcept { return closure_mass_; }
    [[nodiscard]] double probe_determinant() const noexcept { return probe_det_; }
    [[nodiscard]] const std::vector<std::string> &warnings() const noexcept { return warnings_; }

    /// Complex trees whose real parts are f_a, g_a, A_ab.
    [[nodiscard]] const Expr &momentum_expr(std::size_t a) const { return f_[a]; }
    [[nodiscard]] const Expr &force_expr(std::size_t a) const { return g_[a]; }
    [[nodiscard]] const Expr &mass_expr(std::size_t a, std::size_t b) const { return mass_[a * dim() + b]; }

    [[nodiscard]] std::vector<double> momentum(const MechState &s) const;
    [[nodiscard]] std::vector<double> force(const MechState &s) const;
    [[nodiscard]] Matrix mass_matrix(const MechState &s) const;
    [[nodiscard]] Matrix momentum_q_jacobian(const MechState &s) const;
    [[nodiscard]] std::vector<double> momentum_t(const MechState &s) const;

    /// Solves A qdd = g - (df/dq) qd - df/dt.  Throws SingularMass.
    [[nodiscard]] std::vector<double> accel(const MechState &s) const;

    /// Velocity solving f(q, v, t) = m v by damped Newton (Degenerate systems with a closure).
    /// Throws ClosureInconsistent.
    [[nodiscard]] std::vector<double> closure_velocity(double t, std::span<const double> q,
                                                       std::span<const double> guess) const;

    /// qdd along the closure flow, from differentiating f(q, v, t) = m v in time.
    [[nodiscard]] std::vector<double> closure_accel(const MechState &s) const;

    /// Max-norm residual of  dL/dq - d/dt dL/dqd - w0 dM/dqd - (1/w0) d/dt dM/dq  with the supplied qdd.
    /// Built from second partials of Lc (not from f and g), so it checks the derived maps.
    [[nodiscard]] double el_residual(const MechState &s, std::span<const double> qdd) const;

private:
    friend EomSystem derive_eom(const ComplexLagrangian &, const MechState &, std::optional<std::vector<double>>);
    explicit EomSystem(ComplexLagrangian lag);

    ComplexLagrangian lag_;
    Regularity regularity_ = Regularity::regular;
    std::optional<std::vector<double>> closure_mass_;
    double probe_det_ = 0.0;
    std::vector<std::string> warnings_;

    std::vector<Expr> f_, g_, mass_;
    std::vector<Program> f_prog_, g_prog_, mass_prog_, fq_prog_, ft_prog_;
    // second partials of Lc for the residual: P = dLc/dqd, Q = dLc/dq
    std::vector<Program> p_q_, p_qd_, p_t_, q_q_, q_qd_, q_t_;
};

struct ComplexPhase {
    std::vector<complex> w;
    std::vector<complex> u;
};

/// w_a = (qd_a + i w0 q_a)/sqrt2,  u_a = (pdot_a + i w0 p_a)/sqrt2 with p = f, pdot = g.
ComplexPhase to_complex_phase(const EomSystem &eom, const MechState &s);

/// max_a |u_a - i w0 dLc/dw_a|; zero up to rounding when the maps are consistent.
double complex_law_gap(const EomSystem &eom, const MechState &s);

} // namespace cxlag
