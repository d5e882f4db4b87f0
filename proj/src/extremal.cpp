#include "tsoc/extremal.hpp"

#include "tsoc/calculus.hpp"
#include "tsoc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace tsoc {

namespace {

constexpr double kNewtonTol = 1e-11;
constexpr std::size_t kNewtonMaxIters = 100;
constexpr double kNewtonFdStep = 1e-6;

double max_abs(std::span<const double> v) {
    double worst = 0.0;
    for (double x : v) {
        worst = std::max(worst, std::abs(x));
    }
    return worst;
}

// (dphi/du)^T p_sigma + lambda dL/du, the quantity Newton drives to zero.
void stationarity_residual_at(const ControlProblem& prob, double t,
                              std::span<const double> x, double lambda,
                              std::span<const double> p_sigma, std::span<const double> u,
                              std::span<double> out) {
    const std::size_t n = prob.n();
    const std::size_t m = prob.m();
    std::vector<double> dphi_du(n * m);
    std::vector<double> dl_du(m);
    prob.dynamics_du(t, x, u, dphi_du);
    prob.lagrangian_du(t, x, u, dl_du);
    for (std::size_t j = 0; j < m; ++j) {
        double r = lambda * dl_du[j];
        for (std::size_t k = 0; k < n; ++k) {
            r += dphi_du[k * m + j] * p_sigma[k];
        }
        out[j] = r;
    }
}

GridFunction forward_state(const ControlProblem& prob, std::span<const double> x_a,
                           const GridFunction& u) {
    const TimeScale& ts = prob.scale();
    GridFunction x(prob.scale_ptr(), prob.n());
    std::copy(x_a.begin(), x_a.end(), x.at(0).begin());
    std::vector<double> phi(prob.n());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        prob.dynamics_at(ts.point(i), x.at(i), u.at(i), phi);
        const double mu = ts.mu_at(i);
        for (std::size_t k = 0; k < prob.n(); ++k) {
            x(i + 1, k) = x(i, k) + mu * phi[k];
        }
    }
    return x;
}

std::vector<double> required_boundary(const std::vector<std::optional<double>>& data,
                                      const char* which) {
    if (data.empty()) {
        throw Error(std::string("the sweep needs ") + which + " fixed, but it is free");
    }
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& entry : data) {
        if (!entry) {
            throw Error(std::string("the sweep needs every coordinate of ") + which +
                        " fixed");
        }
        out.push_back(*entry);
    }
    return out;
}

} // namespace

double ExtremalReport::worst() const {
    return std::max({adjoint_residual, stationarity_residual, admissibility_residual});
}

ExtremalReport verify_extremal(const ControlProblem& prob, const Extremal& ext) {
    const TimeScale& ts = prob.scale();
    if (!(ext.x.scale() == ts)) {
        throw DimensionMismatch("extremal is sampled on a different scale than the problem");
    }
    if (ext.x.dim() != prob.n() || ext.u.dim() != prob.m()) {
        throw DimensionMismatch("extremal dimensions do not match the problem");
    }
    const std::size_t n = prob.n();
    const std::size_t m = prob.m();

    ExtremalReport report;
    report.admissibility_residual = admissibility_residual(prob, ext.x, ext.u);
    report.nontrivial = ext.nontrivial();

    std::vector<double> dphi_dx(n * n);
    std::vector<double> dl_dx(n);
    std::vector<double> stat(m);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t = ts.point(i);
        const double mu = ts.mu_at(i);
        const auto x = ext.x.at(i);
        const auto u = ext.control_at(i);
        const auto p_sigma = ext.p.at(i + 1);

        prob.dynamics_dx(t, x, u, dphi_dx);
        prob.lagrangian_dx(t, x, u, dl_dx);
        for (std::size_t k = 0; k < n; ++k) {
            const double p_delta = (ext.p(i + 1, k) - ext.p(i, k)) / mu;
            double r = p_delta + ext.lambda * dl_dx[k];
            for (std::size_t r_eq = 0; r_eq < n; ++r_eq) {
                r += dphi_dx[r_eq * n + k] * p_sigma[r_eq];
            }
            report.adjoint_residual = std::max(report.adjoint_residual, std::abs(r));
        }

        stationarity_residual_at(prob, t, x, ext.lambda, p_sigma, u, stat);
        report.stationarity_residual = std::max(report.stationarity_residual, max_abs(stat));
    }
    return report;
}

GridFunction adjoint_backward(const ControlProblem& prob, const GridFunction& x,
                              const GridFunction& u, double lambda,
                              std::span<const double> p_b) {
    if (p_b.size() != prob.n()) {
        throw DimensionMismatch("terminal costate has size " + std::to_string(p_b.size()) +
                                ", expected " + std::to_string(prob.n()));
    }
    const RegularityResult reg = regularity_check(prob, x, u);
    if (!reg.ok) {
        throw RegularityViolation("det(I + mu dphi/dx) = " +
                                  std::to_string(reg.min_abs_det) +
                                  " is numerically singular");
    }
    const TimeScale& ts = prob.scale();
    const std::size_t n = prob.n();
    const std::size_t last = ts.size() - 1;
    GridFunction p(prob.scale_ptr(), n);
    std::copy(p_b.begin(), p_b.end(), p.at(last).begin());

    std::vector<double> dphi_dx(n * n);
    std::vector<double> dl_dx(n);
    for (std::size_t i = last; i-- > 0;) {
        const double t = ts.point(i);
        const double mu = ts.mu_at(i);
        const std::size_t ui = i < u.size() ? i : u.size() - 1;
        prob.dynamics_dx(t, x.at(i), u.at(ui), dphi_dx);
        prob.lagrangian_dx(t, x.at(i), u.at(ui), dl_dx);
        for (std::size_t k = 0; k < n; ++k) {
            double rhs = lambda * dl_dx[k];
            for (std::size_t r_eq = 0; r_eq < n; ++r_eq) {
                rhs += dphi_dx[r_eq * n + k] * p(i + 1, r_eq);
            }
            p(i, k) = p(i + 1, k) + mu * rhs;
        }
    }
    return p;
}

std::vector<double> solve_stationarity(const ControlProblem& prob, double t,
                                       std::span<const double> x, double lambda,
                                       std::span<const double> p_sigma,
                                       std::span<const double> u0) {
    const std::size_t m = prob.m();
    if (u0.size() != m) {
        throw DimensionMismatch("initial control guess has size " + std::to_string(u0.size()) +
                                ", expected " + std::to_string(m));
    }
    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> residual(m);
    stationarity_residual_at(prob, t, x, lambda, p_sigma, u, residual);
    double norm = max_abs(residual);
    double best = norm;

    std::vector<double> u_try(m);
    std::vector<double> res_try(m);
    std::vector<double> res_shift(m);
    for (std::size_t iter = 0; iter < kNewtonMaxIters; ++iter) {
        if (norm <= kNewtonTol) {
            return u;
        }
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) {
            u_try.assign(u.begin(), u.end());
            u_try[j] += kNewtonFdStep;
            stationarity_residual_at(prob, t, x, lambda, p_sigma, u_try, res_shift);
            for (std::size_t k = 0; k < m; ++k) {
                jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                    (res_shift[k] - residual[k]) / kNewtonFdStep;
            }
        }
        Eigen::Map<const Eigen::VectorXd> f(residual.data(), static_cast<Eigen::Index>(m));
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) {
            throw NoConvergence("stationarity Jacobian is singular at t = " +
                                    std::to_string(t),
                                best);
        }
        const Eigen::VectorXd step = lu.solve(-f);

        double damping = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            for (std::size_t k = 0; k < m; ++k) {
                u_try[k] = u[k] + damping * step(static_cast<Eigen::Index>(k));
            }
            bool usable = true;
            try {
                stationarity_residual_at(prob, t, x, lambda, p_sigma, u_try, res_try);
            } catch (const DomainError&) {
                usable = false;
            }
            if (usable) {
                const double norm_try = max_abs(res_try);
                if (norm_try < norm || norm_try <= kNewtonTol) {
                    u = u_try;
                    residual = res_try;
                    norm = norm_try;
                    best = std::min(best, norm);
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if (!accepted) {
            throw NoConvergence("stationarity iteration stalled at t = " + std::to_string(t),
                                best);
        }
    }
    if (norm <= kNewtonTol) {
        return u;
    }
    throw NoConvergence("stationarity iteration hit the cap at t = " + std::to_string(t),
                        best);
}

namespace {

struct SweepOutcome {
    GridFunction x;
    GridFunction u;
    GridFunction p;
};

SweepOutcome run_sweep(const ControlProblem& prob, std::span<const double> x_a,
                       double lambda, GridFunction u, std::span<const double> p_b,
                       const SweepOptions& opts) {
    const TimeScale& ts = prob.scale();
    const std::size_t m = prob.m();
    GridFunction x = forward_state(prob, x_a, u);
    GridFunction p = adjoint_backward(prob, x, u, lambda, p_b);
    for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
        GridFunction u_next = u;
        double change = 0.0;
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            const auto u_star =
                solve_stationarity(prob, ts.point(i), x.at(i), lambda, p.at(i + 1), u.at(i));
            for (std::size_t j = 0; j < m; ++j) {
                const double blended = (1.0 - opts.theta) * u(i, j) + opts.theta * u_star[j];
                change = std::max(change, std::abs(blended - u(i, j)));
                u_next(i, j) = blended;
            }
        }
        u = std::move(u_next);
        x = forward_state(prob, x_a, u);
        p = adjoint_backward(prob, x, u, lambda, p_b);
        if (change <= opts.tol_u) {
            return {std::move(x), std::move(u), std::move(p)};
        }
    }
    throw NoConvergence("forward-backward sweep did not settle within " +
                            std::to_string(opts.max_iters) + " iterations",
                        0.0);
}

} // namespace

Extremal forward_backward_sweep(const ControlProblem& prob, double lambda,
                                const GridFunction& u_init,
                                std::optional<std::vector<double>> p_b,
                                const SweepOptions& opts) {
    if (!(lambda > 0.0)) {
        throw DomainError("the sweep synthesizes normal extremals only (lambda > 0)");
    }
    const TimeScale& ts = prob.scale();
    const std::size_t n = prob.n();
    const std::vector<double> x_a = required_boundary(prob.x_a(), "x(a)");

    if (u_init.dim() != prob.m()) {
        throw DimensionMismatch("control guess has dimension " +
                                std::to_string(u_init.dim()) + ", expected " +
                                std::to_string(prob.m()));
    }
    GridFunction u(make_scale_ptr(ts.kappa()), prob.m());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::size_t src = i < u_init.size() ? i : u_init.size() - 1;
        std::copy(u_init.at(src).begin(), u_init.at(src).end(), u.at(i).begin());
    }

    if (p_b) {
        if (p_b->size() != n) {
            throw DimensionMismatch("terminal costate has size " +
                                    std::to_string(p_b->size()) + ", expected " +
                                    std::to_string(n));
        }
        SweepOutcome out = run_sweep(prob, x_a, lambda, std::move(u), *p_b, opts);
        return Extremal(std::move(out.x), std::move(out.u), std::move(out.p), lambda);
    }

    // Shooting: find p(b) so that the converged sweep meets the fixed x(b).
    const std::vector<double> x_b = required_boundary(prob.x_b(), "x(b)");
    const auto ni = static_cast<Eigen::Index>(n);

    Eigen::VectorXd pb = Eigen::VectorXd::Zero(ni);
    GridFunction u_carry = u;

    auto miss = [&](const Eigen::VectorXd& pb_try, GridFunction u_seed) -> std::pair<Eigen::VectorXd, SweepOutcome> {
        SweepOutcome out = run_sweep(prob, x_a, lambda, std::move(u_seed),
                                     {pb_try.data(), n}, opts);
        Eigen::VectorXd g(ni);
        const std::size_t last = ts.size() - 1;
        for (std::size_t k = 0; k < n; ++k) {
            g(static_cast<Eigen::Index>(k)) = out.x(last, k) - x_b[k];
        }
        return {std::move(g), std::move(out)};
    };

    auto [g, outcome] = miss(pb, u_carry);
    u_carry = outcome.u;
    double g_norm = g.lpNorm<Eigen::Infinity>();

    Eigen::MatrixXd jac(ni, ni);
    bool have_jacobian = false;
    bool jac_is_fresh = false;
    for (std::size_t iter = 0; iter < opts.max_shoot_iters; ++iter) {
        if (g_norm <= opts.tol_shoot) {
            return Extremal(std::move(outcome.x), std::move(outcome.u),
                            std::move(outcome.p), lambda);
        }
        if (!have_jacobian) {
            for (Eigen::Index j = 0; j < ni; ++j) {
                Eigen::VectorXd pb_shift = pb;
                pb_shift(j) += opts.fd_step;
                auto probe = miss(pb_shift, u_carry);
                jac.col(j) = (probe.first - g) / opts.fd_step;
            }
            have_jacobian = true;
            jac_is_fresh = true;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) {
            throw NoConvergence("shooting Jacobian is singular", g_norm);
        }
        const Eigen::VectorXd newton_step = lu.solve(-g);

        double damping = 1.0;
        bool accepted = false;
        Eigen::VectorXd dp;
        Eigen::VectorXd g_new;
        for (int halvings = 0; halvings < 20 && !accepted; ++halvings) {
            dp = damping * newton_step;
            auto [g_try, outcome_try] = miss(pb + dp, u_carry);
            const double g_try_norm = g_try.lpNorm<Eigen::Infinity>();
            if (g_try_norm < g_norm || g_try_norm <= opts.tol_shoot) {
                g_new = std::move(g_try);
                outcome = std::move(outcome_try);
                accepted = true;
            } else {
                damping *= 0.5;
            }
        }
        if (!accepted) {
            if (jac_is_fresh) {
                throw NoConvergence("shooting stalled at miss " + std::to_string(g_norm),
                                    g_norm);
            }
            have_jacobian = false; // secant model went bad; rebuild from scratch
            continue;
        }
        // Broyden rank-one update keeps the Jacobian consistent with the
        // latest secant pair without n extra sweeps per iteration.
        jac += (g_new - g - jac * dp) * dp.transpose() / dp.squaredNorm();
        jac_is_fresh = false;
        pb += dp;
        g = std::move(g_new);
        g_norm = g.lpNorm<Eigen::Infinity>();
        u_carry = outcome.u;
    }
    if (g_norm <= opts.tol_shoot) {
        return Extremal(std::move(outcome.x), std::move(outcome.u), std::move(outcome.p),
                        lambda);
    }
    throw NoConvergence("shooting missed the terminal state", g_norm);
}

} // namespace tsoc
