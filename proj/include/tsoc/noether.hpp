#pragma once

#include "tsoc/expr.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/ocp.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tsoc {

enum class FamilyKind { StateOnly, TimeAndState };

/// One-parameter transformation family: state map h_x (n expressions), time
/// map h_t (TimeAndState only), gauge term Phi_s (absent means 0) and the
/// deformed control u_s (m expressions). All expressions are written in
/// t, s, x1..xn, u1..um and must reduce to the identity at s = 0.
struct TransformationFamily {
    FamilyKind kind = FamilyKind::StateOnly;
    std::vector<Expr> h_x;
    std::optional<Expr> h_t;
    std::optional<Expr> gauge;
    std::vector<Expr> u_s;
    double s_max = 0.1;
    std::size_t s_points = 11;
};

/// The family's s-sample grid: s_points values uniform over [-s_max, s_max]
/// (a single point collapses to {0}).
std::vector<double> default_s_grid(const TransformationFamily& fam);

/// Infinitesimal generators along a trajectory, sampled on the full scale:
/// xi = d h_x / ds at s=0, zeta = d h_t / ds at s=0 (zero for StateOnly),
/// gamma = d Phi_s / ds at s=0.
struct Generators {
    GridFunction xi;    // dim n
    GridFunction zeta;  // dim 1
    GridFunction gamma; // dim 1
};

struct ConservationReport {
    GridFunction values;       // candidate conserved quantity C(t), dim 1
    double max_deviation = 0.0; // max |C(t) - C(a)|
    bool passed = false;
    double tolerance = 0.0;    // effective tolerance the deviation was tested against
};

/// Max over s in s_grid and t in [a,rho(b)] of the two invariance residuals
/// of a state-only family: the gauge identity
/// |L(t,x,u) + Phi_s^Delta - L(t,h_x,u_s)| and the deformed-dynamics
/// identity |Delta/Delta-t[h_x] - phi(t,h_x,u_s)|. Phi_s^Delta and the
/// h_x derivative are exact delta derivatives along the trajectory.
/// A residual <= 1e-10 certifies invariance on the sampled family.
double check_invariance_state_only(const ControlProblem& prob,
                                   const TransformationFamily& fam, const GridFunction& x,
                                   const GridFunction& u, std::span<const double> s_grid);

/// Invariance of a time-and-state family: for each s the image points
/// alpha(t) = h_t(t,x,u) form their own scale (strictly increasing, else
/// NonMonotoneTimeMap) carrying the transformed trajectory; the residual is
/// the worst mismatch between the image-scale running integral of
/// L(t_s,h_x,u_s) and the original running integral of L + Phi_s^Delta over
/// every right endpoint, plus the image-scale dynamics residual.
double check_invariance_time_state(const ControlProblem& prob,
                                   const TransformationFamily& fam, const GridFunction& x,
                                   const GridFunction& u, std::span<const double> s_grid);

Generators generators_at_zero(const TransformationFamily& fam, const GridFunction& x,
                              const GridFunction& u);

/// C(t) = p(t).xi(t) + lambda gamma(t) along an extremal of a state-only
/// invariant problem. The extremal must verify to within 1e-9
/// (NotAnExtremal otherwise); constancy is only meaningful when the family
/// passed check_invariance_state_only. The pass tolerance is
/// max(rtol (1 + |C(a)|), 10 N worst-extremal-residual).
ConservationReport conserved_quantity_state_only(const ControlProblem& prob,
                                                 const Extremal& ext,
                                                 const TransformationFamily& fam,
                                                 double rtol = 1e-9);

/// C(t) = -H^rho(t) zeta(t) + p(t).xi(t) + lambda gamma(t); requires
/// rho(sigma(t)) = t on [a,rho(b)]. StateOnly families are accepted (zeta
/// is then identically zero and the report agrees with the state-only one).
ConservationReport conserved_quantity_time_state(const ControlProblem& prob,
                                                 const Extremal& ext,
                                                 const TransformationFamily& fam,
                                                 double rtol = 1e-9);

/// Diagnostic: least-squares fit of the deformed control at one s, solving
/// min_u |Delta/Delta-t[h_x](t) - phi(t, h_x, u)| pointwise on [a,rho(b)]
/// by Gauss-Newton seeded with u(t). Reports the worst remaining mismatch;
/// a large residual means no control deformation can restore the dynamics
/// identity, i.e. the family cannot be made invariant by choosing u_s.
struct DeformedControlFit {
    GridFunction u_fit; // on [a,rho(b)]
    double residual;
};

DeformedControlFit fit_deformed_control(const ControlProblem& prob,
                                        const TransformationFamily& fam,
                                        const GridFunction& x, const GridFunction& u,
                                        double s);

} // namespace tsoc
