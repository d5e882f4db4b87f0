#include "tsoc/noether.hpp"

#include "tsoc/calculus.hpp"
#include "tsoc/errors.hpp"
#include "tsoc/extremal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace tsoc {

namespace {

constexpr double kExtremalTol = 1e-9;
constexpr double kIdentityTol = 1e-9;
constexpr double kImageGapTol = 1e-12;

std::span<const double> row_or_last(const GridFunction& g, std::size_t i) {
    return g.at(i < g.size() ? i : g.size() - 1);
}

void require_trajectory_shapes(std::size_t n, std::size_t m, const TimeScale& ts,
                               const GridFunction& x, const GridFunction& u) {
    if (x.dim() != n || u.dim() != m) {
        throw DimensionMismatch("trajectory dimensions do not match the problem");
    }
    if (!(x.scale() == ts)) {
        throw DimensionMismatch("trajectory is sampled on a different scale than the problem");
    }
    if (u.size() != ts.size() && u.size() + 1 != ts.size()) {
        throw DimensionMismatch("control must be sampled on [a,rho(b)] or on the full scale");
    }
}

/// All family expressions bound to the slot layout [t, s, x1..xn, u1..um].
struct FamilyEval {
    std::size_t n;
    std::size_t m;
    std::vector<Expr::Bound> h_x;
    std::optional<Expr::Bound> h_t;
    Expr::Bound gauge;
    std::vector<Expr::Bound> u_s;

    FamilyEval(const TransformationFamily& fam, std::size_t n_in, std::size_t m_in)
        : n(n_in), m(m_in), gauge(make_gauge(fam, slot_names(n_in, m_in))) {
        const auto slots = slot_names(n, m);
        h_x.reserve(fam.h_x.size());
        for (const Expr& e : fam.h_x) {
            h_x.push_back(e.bind(slots));
        }
        if (fam.h_t) {
            h_t = fam.h_t->bind(slots);
        }
        u_s.reserve(fam.u_s.size());
        for (const Expr& e : fam.u_s) {
            u_s.push_back(e.bind(slots));
        }
    }

    static std::vector<std::string> slot_names(std::size_t n, std::size_t m) {
        std::vector<std::string> names;
        names.reserve(2 + n + m);
        names.emplace_back("t");
        names.emplace_back("s");
        for (std::size_t i = 1; i <= n; ++i) {
            names.push_back("x" + std::to_string(i));
        }
        for (std::size_t i = 1; i <= m; ++i) {
            names.push_back("u" + std::to_string(i));
        }
        return names;
    }

    static Expr::Bound make_gauge(const TransformationFamily& fam,
                                  const std::vector<std::string>& slots) {
        return fam.gauge ? fam.gauge->bind(slots) : Expr::number(0.0).bind(slots);
    }

    void fill(double t, double s, std::span<const double> x, std::span<const double> u,
              std::vector<double>& slots) const {
        slots.resize(2 + n + m);
        slots[0] = t;
        slots[1] = s;
        std::copy(x.begin(), x.end(), slots.begin() + 2);
        std::copy(u.begin(), u.end(), slots.begin() + 2 + static_cast<std::ptrdiff_t>(n));
    }
};

void validate_family(const TransformationFamily& fam, std::size_t n, std::size_t m) {
    if (fam.h_x.size() != n) {
        throw DimensionMismatch("family has " + std::to_string(fam.h_x.size()) +
                                " state maps for state dimension " + std::to_string(n));
    }
    if (fam.u_s.size() != m) {
        throw DimensionMismatch("family has " + std::to_string(fam.u_s.size()) +
                                " control maps for control dimension " + std::to_string(m));
    }
    if (fam.kind == FamilyKind::TimeAndState && !fam.h_t) {
        throw Error("a time-and-state family needs the time map h_t");
    }
    if (fam.kind == FamilyKind::StateOnly && fam.h_t) {
        throw Error("a state-only family must not carry a time map");
    }
    if (!(fam.s_max > 0.0)) {
        throw DomainError("s_max must be positive");
    }
    if (fam.s_points == 0) {
        throw DomainError("s_points must be at least 1");
    }
}

/// The family must be the identity at s = 0 along the given trajectory.
void check_identity_at_zero(const FamilyEval& ev, const TimeScale& ts, const GridFunction& x,
                            const GridFunction& u) {
    std::vector<double> slots;
    auto close = [](double got, double want) {
        return std::abs(got - want) <= kIdentityTol * std::max(1.0, std::abs(want));
    };
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ev.fill(ts.point(i), 0.0, x.at(i), row_or_last(u, i), slots);
        for (std::size_t k = 0; k < ev.n; ++k) {
            if (!close(ev.h_x[k].eval(slots), x(i, k))) {
                throw Error("family is not the identity at s = 0: h_x deviates from x");
            }
        }
        const auto urow = row_or_last(u, i);
        for (std::size_t j = 0; j < ev.m; ++j) {
            if (!close(ev.u_s[j].eval(slots), urow[j])) {
                throw Error("family is not the identity at s = 0: u_s deviates from u");
            }
        }
        if (ev.h_t && !close(ev.h_t->eval(slots), ts.point(i))) {
            throw Error("family is not the identity at s = 0: h_t deviates from t");
        }
    }
}

/// Samples of h_x, u_s, and the gauge along the trajectory for one s,
/// on the full scale.
struct TransformedTrajectory {
    GridFunction h_x;   // dim n
    GridFunction u_s;   // dim m
    GridFunction gauge; // dim 1
};

TransformedTrajectory transform_trajectory(const FamilyEval& ev, const TimeScalePtr& scale,
                                           const GridFunction& x, const GridFunction& u,
                                           double s) {
    TransformedTrajectory out{GridFunction(scale, ev.n), GridFunction(scale, ev.m),
                              GridFunction(scale, 1)};
    std::vector<double> slots;
    for (std::size_t i = 0; i < scale->size(); ++i) {
        ev.fill(scale->point(i), s, x.at(i), row_or_last(u, i), slots);
        for (std::size_t k = 0; k < ev.n; ++k) {
            out.h_x(i, k) = ev.h_x[k].eval(slots);
        }
        for (std::size_t j = 0; j < ev.m; ++j) {
            out.u_s(i, j) = ev.u_s[j].eval(slots);
        }
        out.gauge(i, 0) = ev.gauge.eval(slots);
    }
    return out;
}

} // namespace

std::vector<double> default_s_grid(const TransformationFamily& fam) {
    if (fam.s_points <= 1) {
        return {0.0};
    }
    std::vector<double> grid;
    grid.reserve(fam.s_points);
    const double step = 2.0 * fam.s_max / static_cast<double>(fam.s_points - 1);
    for (std::size_t k = 0; k < fam.s_points; ++k) {
        grid.push_back(-fam.s_max + static_cast<double>(k) * step);
    }
    return grid;
}

double check_invariance_state_only(const ControlProblem& prob,
                                   const TransformationFamily& fam, const GridFunction& x,
                                   const GridFunction& u, std::span<const double> s_grid) {
    validate_family(fam, prob.n(), prob.m());
    if (fam.kind != FamilyKind::StateOnly) {
        throw Error("state-only invariance check called with a time-and-state family");
    }
    require_trajectory_shapes(prob.n(), prob.m(), prob.scale(), x, u);
    const FamilyEval ev(fam, prob.n(), prob.m());
    const TimeScale& ts = prob.scale();
    check_identity_at_zero(ev, ts, x, u);

    std::vector<double> phi(prob.n());
    double worst = 0.0;
    for (double s : s_grid) {
        const TransformedTrajectory tr =
            transform_trajectory(ev, prob.scale_ptr(), x, u, s);
        const GridFunction gauge_delta = delta_derivative(tr.gauge);
        const GridFunction h_delta = delta_derivative(tr.h_x);
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            const double t = ts.point(i);
            const double lhs = prob.internal_lagrangian_at(t, x.at(i), u.at(i)) +
                               gauge_delta(i, 0);
            const double rhs = prob.internal_lagrangian_at(t, tr.h_x.at(i), tr.u_s.at(i));
            worst = std::max(worst, std::abs(lhs - rhs));

            prob.dynamics_at(t, tr.h_x.at(i), tr.u_s.at(i), phi);
            for (std::size_t k = 0; k < prob.n(); ++k) {
                worst = std::max(worst, std::abs(h_delta(i, k) - phi[k]));
            }
        }
    }
    return worst;
}

double check_invariance_time_state(const ControlProblem& prob,
                                   const TransformationFamily& fam, const GridFunction& x,
                                   const GridFunction& u, std::span<const double> s_grid) {
    validate_family(fam, prob.n(), prob.m());
    if (fam.kind != FamilyKind::TimeAndState) {
        throw Error("time-and-state invariance check called with a state-only family");
    }
    require_trajectory_shapes(prob.n(), prob.m(), prob.scale(), x, u);
    const FamilyEval ev(fam, prob.n(), prob.m());
    const TimeScale& ts = prob.scale();
    check_identity_at_zero(ev, ts, x, u);
    const std::size_t N = ts.size();

    std::vector<double> slots;
    std::vector<double> alpha(N);
    std::vector<double> phi(prob.n());
    double worst = 0.0;
    for (double s : s_grid) {
        // Image scale {alpha(t)} induced by the time map.
        for (std::size_t i = 0; i < N; ++i) {
            ev.fill(ts.point(i), s, x.at(i), row_or_last(u, i), slots);
            alpha[i] = ev.h_t->eval(slots);
        }
        for (std::size_t i = 0; i + 1 < N; ++i) {
            if (!(alpha[i + 1] - alpha[i] > kImageGapTol)) {
                throw NonMonotoneTimeMap("time map is not strictly increasing at s = " +
                                         std::to_string(s));
            }
        }

        const TransformedTrajectory tr =
            transform_trajectory(ev, prob.scale_ptr(), x, u, s);
        const GridFunction gauge_delta = delta_derivative(tr.gauge);

        // Running integrals over every right endpoint beta, and the
        // image-scale dynamics residual.
        double image_integral = 0.0;
        double original_integral = 0.0;
        for (std::size_t i = 0; i + 1 < N; ++i) {
            const double mu_bar = alpha[i + 1] - alpha[i];
            image_integral +=
                mu_bar * prob.internal_lagrangian_at(alpha[i], tr.h_x.at(i), tr.u_s.at(i));
            original_integral +=
                ts.mu_at(i) * (prob.internal_lagrangian_at(ts.point(i), x.at(i), u.at(i)) +
                               gauge_delta(i, 0));
            worst = std::max(worst, std::abs(image_integral - original_integral));

            prob.dynamics_at(alpha[i], tr.h_x.at(i), tr.u_s.at(i), phi);
            for (std::size_t k = 0; k < prob.n(); ++k) {
                const double deriv = (tr.h_x(i + 1, k) - tr.h_x(i, k)) / mu_bar;
                worst = std::max(worst, std::abs(deriv - phi[k]));
            }
        }
    }
    return worst;
}

Generators generators_at_zero(const TransformationFamily& fam, const GridFunction& x,
                              const GridFunction& u) {
    const std::size_t n = x.dim();
    const std::size_t m = u.dim();
    validate_family(fam, n, m);
    const FamilyEval ev(fam, n, m);
    const TimeScale& ts = x.scale();
    check_identity_at_zero(ev, ts, x, u);

    Generators gen{GridFunction(x.scale_ptr(), n), GridFunction(x.scale_ptr(), 1),
                   GridFunction(x.scale_ptr(), 1)};
    std::vector<double> slots;
    std::vector<Dual> dual_slots;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ev.fill(ts.point(i), 0.0, x.at(i), row_or_last(u, i), slots);
        dual_slots.assign(slots.size(), Dual());
        for (std::size_t k = 0; k < slots.size(); ++k) {
            dual_slots[k] = Dual(slots[k], k == 1 ? 1.0 : 0.0); // seed s
        }
        for (std::size_t k = 0; k < n; ++k) {
            gen.xi(i, k) = ev.h_x[k].eval_dual(dual_slots).d;
        }
        gen.zeta(i, 0) = ev.h_t ? ev.h_t->eval_dual(dual_slots).d : 0.0;
        gen.gamma(i, 0) = ev.gauge.eval_dual(dual_slots).d;
    }
    return gen;
}

namespace {

ConservationReport assemble_report(const TimeScale& ts, GridFunction values, double rtol,
                                   double worst_extremal_residual) {
    const double c_a = values(0, 0);
    double deviation = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        deviation = std::max(deviation, std::abs(values(i, 0) - c_a));
    }
    const double tol_eff =
        std::max(rtol * (1.0 + std::abs(c_a)),
                 10.0 * static_cast<double>(ts.size()) * worst_extremal_residual);
    return {std::move(values), deviation, deviation <= tol_eff, tol_eff};
}

ExtremalReport require_extremal(const ControlProblem& prob, const Extremal& ext) {
    const ExtremalReport rep = verify_extremal(prob, ext);
    if (rep.worst() > kExtremalTol) {
        throw NotAnExtremal("candidate fails the extremal conditions (worst residual " +
                            std::to_string(rep.worst()) + ")");
    }
    return rep;
}

} // namespace

ConservationReport conserved_quantity_state_only(const ControlProblem& prob,
                                                 const Extremal& ext,
                                                 const TransformationFamily& fam,
                                                 double rtol) {
    validate_family(fam, prob.n(), prob.m());
    if (fam.kind != FamilyKind::StateOnly) {
        throw Error("state-only conserved quantity called with a time-and-state family");
    }
    const ExtremalReport rep = require_extremal(prob, ext);
    const Generators gen = generators_at_zero(fam, ext.x, ext.u);
    const TimeScale& ts = prob.scale();

    GridFunction values(prob.scale_ptr(), 1);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double c = ext.lambda * gen.gamma(i, 0);
        for (std::size_t k = 0; k < prob.n(); ++k) {
            c += ext.p(i, k) * gen.xi(i, k);
        }
        values(i, 0) = c;
    }
    return assemble_report(ts, std::move(values), rtol, rep.worst());
}

ConservationReport conserved_quantity_time_state(const ControlProblem& prob,
                                                 const Extremal& ext,
                                                 const TransformationFamily& fam,
                                                 double rtol) {
    validate_family(fam, prob.n(), prob.m());
    if (!prob.scale().rho_sigma_identity()) {
        throw RhoSigmaViolation("scale does not satisfy rho(sigma(t)) = t on [a,rho(b)]");
    }
    const ExtremalReport rep = require_extremal(prob, ext);
    const Generators gen = generators_at_zero(fam, ext.x, ext.u);
    const TimeScale& ts = prob.scale();

    GridFunction values(prob.scale_ptr(), 1);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts.point(i);
        double c = ext.lambda * gen.gamma(i, 0) - hamiltonian_rho(prob, ext, t) * gen.zeta(i, 0);
        for (std::size_t k = 0; k < prob.n(); ++k) {
            c += ext.p(i, k) * gen.xi(i, k);
        }
        values(i, 0) = c;
    }
    return assemble_report(ts, std::move(values), rtol, rep.worst());
}

DeformedControlFit fit_deformed_control(const ControlProblem& prob,
                                        const TransformationFamily& fam,
                                        const GridFunction& x, const GridFunction& u,
                                        double s) {
    validate_family(fam, prob.n(), prob.m());
    require_trajectory_shapes(prob.n(), prob.m(), prob.scale(), x, u);
    const FamilyEval ev(fam, prob.n(), prob.m());
    const TimeScale& ts = prob.scale();
    const std::size_t n = prob.n();
    const std::size_t m = prob.m();

    const TransformedTrajectory tr = transform_trajectory(ev, prob.scale_ptr(), x, u, s);
    const GridFunction h_delta = delta_derivative(tr.h_x);

    GridFunction u_fit(make_scale_ptr(ts.kappa()), m);
    double worst = 0.0;
    std::vector<double> phi(n);
    std::vector<double> jac(n * m);
    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t = ts.point(i);
        Eigen::VectorXd uk(mi);
        for (std::size_t j = 0; j < m; ++j) {
            uk(static_cast<Eigen::Index>(j)) = u(i, j);
        }
        Eigen::VectorXd residual(ni);
        double norm = 0.0;
        auto eval_residual = [&](const Eigen::VectorXd& cand, Eigen::VectorXd& out) {
            prob.dynamics_at(t, tr.h_x.at(i), {cand.data(), m}, phi);
            for (std::size_t k = 0; k < n; ++k) {
                out(static_cast<Eigen::Index>(k)) = phi[k] - h_delta(i, k);
            }
            return out.lpNorm<Eigen::Infinity>();
        };
        norm = eval_residual(uk, residual);
        for (int iter = 0; iter < 50 && norm > 1e-12; ++iter) {
            prob.dynamics_du(t, tr.h_x.at(i), {uk.data(), m}, jac);
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>
                J(jac.data(), ni, mi);
            const Eigen::MatrixXd JtJ = J.transpose() * J;
            const Eigen::VectorXd g = J.transpose() * residual;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
            if (!lu.isInvertible()) {
                break;
            }
            const Eigen::VectorXd step = lu.solve(-g);
            bool improved = false;
            double damping = 1.0;
            Eigen::VectorXd trial(mi);
            Eigen::VectorXd trial_res(ni);
            for (int halvings = 0; halvings < 30; ++halvings) {
                trial = uk + damping * step;
                const double trial_norm = eval_residual(trial, trial_res);
                if (trial_norm < norm) {
                    uk = trial;
                    residual = trial_res;
                    norm = trial_norm;
                    improved = true;
                    break;
                }
                damping *= 0.5;
            }
            if (!improved) {
                break;
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            u_fit(i, j) = uk(static_cast<Eigen::Index>(j));
        }
        worst = std::max(worst, norm);
    }
    return {std::move(u_fit), worst};
}

} // namespace tsoc
