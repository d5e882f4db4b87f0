#pragma once

#include "tsoc/calculus.hpp"
#include "tsoc/expr.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/timescale.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tsoc {

enum class Sense { Minimize, Maximize };

/// The problem: optimize J(x,u) = integral of L(t,x,u) delta-t over [a,b]
/// subject to x^Delta = phi(t,x,u) plus optional per-coordinate boundary
/// values at a and b.
///
/// Maximization is handled by negating L internally; cost() reports the
/// user's orientation while the Hamiltonian, adjoint and stationarity
/// machinery always work on the minimizing form.
class ControlProblem {
public:
    /// x_a / x_b: empty for a free endpoint, else n entries where nullopt
    /// marks a free coordinate. Expressions may reference t, x1..xn, u1..um
    /// (bare x, u alias x1, u1 when n or m is 1).
    ControlProblem(std::size_t n, std::size_t m, Sense sense, Expr lagrangian,
                   std::vector<Expr> dynamics, TimeScalePtr scale,
                   std::vector<std::optional<double>> x_a = {},
                   std::vector<std::optional<double>> x_b = {});

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    Sense sense() const { return sense_; }
    const TimeScale& scale() const { return *scale_; }
    const TimeScalePtr& scale_ptr() const { return scale_; }
    const Expr& lagrangian() const { return lagrangian_; }
    const std::vector<Expr>& dynamics() const { return dynamics_; }
    const std::vector<std::optional<double>>& x_a() const { return x_a_; }
    const std::vector<std::optional<double>>& x_b() const { return x_b_; }

    /// -1 when the user problem is a maximization (L is negated internally).
    double internal_sign() const { return sense_ == Sense::Maximize ? -1.0 : 1.0; }

    /// L as the user wrote it.
    double lagrangian_at(double t, std::span<const double> x, std::span<const double> u) const;

    /// Internally oriented L (negated for max problems); what the
    /// Hamiltonian and the extremal conditions differentiate.
    double internal_lagrangian_at(double t, std::span<const double> x,
                                  std::span<const double> u) const;

    /// phi(t,x,u) into out (n entries).
    void dynamics_at(double t, std::span<const double> x, std::span<const double> u,
                     std::span<double> out) const;

    /// Gradients of the internal L: n entries into out.
    void lagrangian_dx(double t, std::span<const double> x, std::span<const double> u,
                       std::span<double> out) const;
    /// m entries into out.
    void lagrangian_du(double t, std::span<const double> x, std::span<const double> u,
                       std::span<double> out) const;

    /// Row-major n*n Jacobian d phi_r / d x_c into out.
    void dynamics_dx(double t, std::span<const double> x, std::span<const double> u,
                     std::span<double> out) const;
    /// Row-major n*m Jacobian d phi_r / d u_c into out.
    void dynamics_du(double t, std::span<const double> x, std::span<const double> u,
                     std::span<double> out) const;

private:
    std::size_t n_;
    std::size_t m_;
    Sense sense_;
    Expr lagrangian_;
    std::vector<Expr> dynamics_;
    TimeScalePtr scale_;
    std::vector<std::optional<double>> x_a_;
    std::vector<std::optional<double>> x_b_;

    std::vector<std::string> slot_names_; // t, x1..xn, u1..um
    Expr::Bound lagrangian_b_;
    std::vector<Expr::Bound> dynamics_b_;

    void fill_slots(double t, std::span<const double> x, std::span<const double> u,
                    std::span<double> slots) const;
};

/// Candidate extremal: x and p on [a,b]_T (dim n), u on [a,rho(b)]_T (dim m),
/// multiplier lambda >= 0. Where a formula needs u at b the last control
/// sample is reused (u is undefined there; any constant extension gives the
/// same residuals on [a,rho(b)]).
struct Extremal {
    GridFunction x;
    GridFunction u;
    GridFunction p;
    double lambda;

    Extremal(GridFunction x_in, GridFunction u_in, GridFunction p_in, double lambda_in);

    /// lambda + max|p| > 0 within tolerance 1e-12.
    bool nontrivial() const;

    /// Control sample with the index clamped to [a,rho(b)].
    std::span<const double> control_at(std::size_t i) const {
        return u.at(i < u.size() ? i : u.size() - 1);
    }
};

/// J(x,u) in the user's orientation: sum of mu(t) L(t,x,u) over [a,rho(b)].
/// u may be sampled on the full scale (trailing sample ignored) or on kappa.
double cost(const ControlProblem& prob, const GridFunction& x, const GridFunction& u);

/// max over t in [a,rho(b)] of |x^Delta(t) - phi(t,x(t),u(t))| (max-norm);
/// zero means (x,u) is admissible.
double admissibility_residual(const ControlProblem& prob, const GridFunction& x,
                              const GridFunction& u);

struct RegularityResult {
    bool ok;            // every |det| above threshold 1e-12
    double min_abs_det; // worst determinant of I + mu * dphi/dx
};

/// Checks det(I + mu(t) dphi/dx) != 0 at every t in [a,rho(b)]; this is what
/// makes the backward costate recursion well-posed.
RegularityResult regularity_check(const ControlProblem& prob, const GridFunction& x,
                                  const GridFunction& u);

/// H(t,x,u,lambda,p_sigma) = lambda L + p_sigma . phi, with L in the
/// internal (minimizing) orientation.
double hamiltonian(const ControlProblem& prob, double t, std::span<const double> x,
                   std::span<const double> u, double lambda,
                   std::span<const double> p_sigma);

/// H composed with rho along an extremal: H at time rho(t) with state
/// x(rho(t)), control u(rho(t)) and costate p^sigma(rho(t)). Requires the
/// scale to satisfy rho(sigma(t)) = t on [a,rho(b)].
double hamiltonian_rho(const ControlProblem& prob, const Extremal& ext, double t);

} // namespace tsoc
