#pragma once

#include "tsoc/grid_function.hpp"
#include "tsoc/ocp.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tsoc {

/// Residuals of the weak-maximum-principle conditions for a candidate
/// (x, u, lambda, p). All max-norms over [a,rho(b)]; an exact extremal has
/// zeros everywhere.
struct ExtremalReport {
    double adjoint_residual = 0.0;       // p^Delta + (dphi/dx)^T p^sigma + lambda dL/dx
    double stationarity_residual = 0.0;  // (dphi/du)^T p^sigma + lambda dL/du
    double admissibility_residual = 0.0; // x^Delta - phi
    bool nontrivial = false;             // lambda + max|p| > 0

    double worst() const;
};

ExtremalReport verify_extremal(const ControlProblem& prob, const Extremal& ext);

/// Integrate the adjoint equation backward from p(b) = p_b:
/// p(t) = p(sigma(t)) + mu(t) [(dphi/dx)^T p(sigma(t)) + lambda dL/dx],
/// the exact rearrangement of -p^Delta = (dphi/dx)^T p^sigma + lambda dL/dx.
GridFunction adjoint_backward(const ControlProblem& prob, const GridFunction& x,
                              const GridFunction& u, double lambda,
                              std::span<const double> p_b);

/// Solve (dphi/du)^T p_sigma + lambda dL/du = 0 for u by damped Newton from
/// u0 (residual tolerance 1e-11, at most 100 iterations, step halving on
/// residual growth). Throws NoConvergence with the best residual seen.
std::vector<double> solve_stationarity(const ControlProblem& prob, double t,
                                       std::span<const double> x, double lambda,
                                       std::span<const double> p_sigma,
                                       std::span<const double> u0);

struct SweepOptions {
    double theta = 0.5;        // relaxation of the control update
    std::size_t max_iters = 500;
    double tol_u = 1e-10;      // max-norm change of u between sweeps
    double tol_shoot = 1e-9;   // max-norm miss of the x(b) target
    std::size_t max_shoot_iters = 60;
    double fd_step = 1e-5;     // forward-difference step for the shooting Jacobian
};

/// Forward-backward sweep: forward state recursion from the problem's fixed
/// x(a), backward costate from p_b, pointwise stationarity update of u
/// relaxed by theta. When p_b is absent the problem must fix x(b) completely
/// and p(b) is found by Broyden iteration on the terminal state miss. u_init
/// seeds the first sweep. Only normal extremals are synthesized: lambda must
/// be positive (abnormal candidates are handled by verify_extremal alone).
Extremal forward_backward_sweep(const ControlProblem& prob, double lambda,
                                const GridFunction& u_init,
                                std::optional<std::vector<double>> p_b,
                                const SweepOptions& opts = {});

} // namespace tsoc
