#include "tsoc/ocp.hpp"

#include "tsoc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsoc {

namespace {

constexpr double kDetThreshold = 1e-12;
constexpr double kNontrivialityThreshold = 1e-12;

std::vector<std::string> make_slot_names(std::size_t n, std::size_t m) {
    std::vector<std::string> names;
    names.reserve(1 + n + m);
    names.emplace_back("t");
    for (std::size_t i = 1; i <= n; ++i) {
        names.push_back("x" + std::to_string(i));
    }
    for (std::size_t i = 1; i <= m; ++i) {
        names.push_back("u" + std::to_string(i));
    }
    return names;
}

void require_state_shape(const ControlProblem& prob, const GridFunction& x) {
    if (x.dim() != prob.n()) {
        throw DimensionMismatch("state has dimension " + std::to_string(x.dim()) +
                                ", problem expects " + std::to_string(prob.n()));
    }
    if (!(x.scale() == prob.scale())) {
        throw DimensionMismatch("state is sampled on a different scale than the problem");
    }
}

// u belongs on [a,rho(b)] (one sample fewer than x); a full-scale sampling
// is accepted and its trailing value ignored.
void require_control_shape(const ControlProblem& prob, const GridFunction& u) {
    if (u.dim() != prob.m()) {
        throw DimensionMismatch("control has dimension " + std::to_string(u.dim()) +
                                ", problem expects " + std::to_string(prob.m()));
    }
    const std::size_t full = prob.scale().size();
    if (u.size() != full && u.size() + 1 != full) {
        throw DimensionMismatch("control has " + std::to_string(u.size()) +
                                " samples, expected " + std::to_string(full - 1) + " or " +
                                std::to_string(full));
    }
}

} // namespace

ControlProblem::ControlProblem(std::size_t n, std::size_t m, Sense sense, Expr lagrangian,
                               std::vector<Expr> dynamics, TimeScalePtr scale,
                               std::vector<std::optional<double>> x_a,
                               std::vector<std::optional<double>> x_b)
    : n_(n),
      m_(m),
      sense_(sense),
      lagrangian_(std::move(lagrangian)),
      dynamics_(std::move(dynamics)),
      scale_(std::move(scale)),
      x_a_(std::move(x_a)),
      x_b_(std::move(x_b)),
      slot_names_(make_slot_names(n, m)),
      lagrangian_b_(lagrangian_.bind(slot_names_)) {
    if (n_ == 0) {
        throw DimensionMismatch("state dimension must be at least 1");
    }
    if (m_ == 0) {
        throw DimensionMismatch("control dimension must be at least 1");
    }
    if (dynamics_.size() != n_) {
        throw DimensionMismatch("problem has " + std::to_string(dynamics_.size()) +
                                " dynamics equations for state dimension " +
                                std::to_string(n_));
    }
    if (!scale_ || scale_->size() < 2) {
        throw TooFewPoints("problem scale needs at least 2 points");
    }
    if (!x_a_.empty() && x_a_.size() != n_) {
        throw DimensionMismatch("x_a has " + std::to_string(x_a_.size()) +
                                " entries for state dimension " + std::to_string(n_));
    }
    if (!x_b_.empty() && x_b_.size() != n_) {
        throw DimensionMismatch("x_b has " + std::to_string(x_b_.size()) +
                                " entries for state dimension " + std::to_string(n_));
    }
    dynamics_b_.reserve(n_);
    for (const Expr& eq : dynamics_) {
        dynamics_b_.push_back(eq.bind(slot_names_));
    }
}

void ControlProblem::fill_slots(double t, std::span<const double> x,
                                std::span<const double> u, std::span<double> slots) const {
    if (x.size() != n_) {
        throw DimensionMismatch("state vector has size " + std::to_string(x.size()) +
                                ", expected " + std::to_string(n_));
    }
    if (u.size() != m_) {
        throw DimensionMismatch("control vector has size " + std::to_string(u.size()) +
                                ", expected " + std::to_string(m_));
    }
    slots[0] = t;
    std::copy(x.begin(), x.end(), slots.begin() + 1);
    std::copy(u.begin(), u.end(), slots.begin() + 1 + static_cast<std::ptrdiff_t>(n_));
}

double ControlProblem::lagrangian_at(double t, std::span<const double> x,
                                     std::span<const double> u) const {
    std::vector<double> slots(1 + n_ + m_);
    fill_slots(t, x, u, slots);
    return lagrangian_b_.eval(slots);
}

double ControlProblem::internal_lagrangian_at(double t, std::span<const double> x,
                                              std::span<const double> u) const {
    return internal_sign() * lagrangian_at(t, x, u);
}

void ControlProblem::dynamics_at(double t, std::span<const double> x,
                                 std::span<const double> u, std::span<double> out) const {
    std::vector<double> slots(1 + n_ + m_);
    fill_slots(t, x, u, slots);
    for (std::size_t r = 0; r < n_; ++r) {
        out[r] = dynamics_b_[r].eval(slots);
    }
}

void ControlProblem::lagrangian_dx(double t, std::span<const double> x,
                                   std::span<const double> u, std::span<double> out) const {
    std::vector<double> slots(1 + n_ + m_);
    fill_slots(t, x, u, slots);
    const double sign = internal_sign();
    for (std::size_t j = 0; j < n_; ++j) {
        out[j] = sign * lagrangian_b_.partial(1 + j, slots);
    }
}

void ControlProblem::lagrangian_du(double t, std::span<const double> x,
                                   std::span<const double> u, std::span<double> out) const {
    std::vector<double> slots(1 + n_ + m_);
    fill_slots(t, x, u, slots);
    const double sign = internal_sign();
    for (std::size_t j = 0; j < m_; ++j) {
        out[j] = sign * lagrangian_b_.partial(1 + n_ + j, slots);
    }
}

void ControlProblem::dynamics_dx(double t, std::span<const double> x,
                                 std::span<const double> u, std::span<double> out) const {
    std::vector<double> slots(1 + n_ + m_);
    fill_slots(t, x, u, slots);
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t c = 0; c < n_; ++c) {
            out[r * n_ + c] = dynamics_b_[r].partial(1 + c, slots);
        }
    }
}

void ControlProblem::dynamics_du(double t, std::span<const double> x,
                                 std::span<const double> u, std::span<double> out) const {
    std::vector<double> slots(1 + n_ + m_);
    fill_slots(t, x, u, slots);
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t c = 0; c < m_; ++c) {
            out[r * m_ + c] = dynamics_b_[r].partial(1 + n_ + c, slots);
        }
    }
}

Extremal::Extremal(GridFunction x_in, GridFunction u_in, GridFunction p_in, double lambda_in)
    : x(std::move(x_in)), u(std::move(u_in)), p(std::move(p_in)), lambda(lambda_in) {
    if (lambda < 0.0) {
        throw DomainError("multiplier lambda must be nonnegative");
    }
    if (p.dim() != x.dim()) {
        throw DimensionMismatch("costate dimension differs from state dimension");
    }
    if (!(p.scale() == x.scale())) {
        throw DimensionMismatch("costate is sampled on a different scale than the state");
    }
    if (u.size() != x.size() && u.size() + 1 != x.size()) {
        throw DimensionMismatch("control must be sampled on [a,rho(b)] or on the full scale");
    }
}

bool Extremal::nontrivial() const {
    return lambda + p.max_abs() > kNontrivialityThreshold;
}

double cost(const ControlProblem& prob, const GridFunction& x, const GridFunction& u) {
    require_state_shape(prob, x);
    require_control_shape(prob, u);
    const TimeScale& ts = prob.scale();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        total += ts.mu_at(i) * prob.lagrangian_at(ts.point(i), x.at(i), u.at(i));
    }
    return total;
}

double admissibility_residual(const ControlProblem& prob, const GridFunction& x,
                              const GridFunction& u) {
    require_state_shape(prob, x);
    require_control_shape(prob, u);
    const TimeScale& ts = prob.scale();
    const GridFunction xd = delta_derivative(x);
    std::vector<double> phi(prob.n());
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        prob.dynamics_at(ts.point(i), x.at(i), u.at(i), phi);
        const auto row = xd.at(i);
        for (std::size_t k = 0; k < prob.n(); ++k) {
            worst = std::max(worst, std::abs(row[k] - phi[k]));
        }
    }
    return worst;
}

RegularityResult regularity_check(const ControlProblem& prob, const GridFunction& x,
                                  const GridFunction& u) {
    require_state_shape(prob, x);
    require_control_shape(prob, u);
    const TimeScale& ts = prob.scale();
    const auto n = static_cast<Eigen::Index>(prob.n());
    std::vector<double> jac(prob.n() * prob.n());
    double min_abs_det = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        prob.dynamics_dx(ts.point(i), x.at(i), u.at(i), jac);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
            dphi_dx(jac.data(), n, n);
        const Eigen::MatrixXd A =
            Eigen::MatrixXd::Identity(n, n) + ts.mu_at(i) * dphi_dx;
        min_abs_det = std::min(min_abs_det, std::abs(A.determinant()));
    }
    return {min_abs_det > kDetThreshold, min_abs_det};
}

double hamiltonian(const ControlProblem& prob, double t, std::span<const double> x,
                   std::span<const double> u, double lambda,
                   std::span<const double> p_sigma) {
    if (p_sigma.size() != prob.n()) {
        throw DimensionMismatch("costate vector has size " + std::to_string(p_sigma.size()) +
                                ", expected " + std::to_string(prob.n()));
    }
    std::vector<double> phi(prob.n());
    prob.dynamics_at(t, x, u, phi);
    double value = lambda * prob.internal_lagrangian_at(t, x, u);
    for (std::size_t k = 0; k < prob.n(); ++k) {
        value += p_sigma[k] * phi[k];
    }
    return value;
}

double hamiltonian_rho(const ControlProblem& prob, const Extremal& ext, double t) {
    const TimeScale& ts = prob.scale();
    if (!ts.rho_sigma_identity()) {
        throw RhoSigmaViolation("scale does not satisfy rho(sigma(t)) = t on [a,rho(b)]");
    }
    const std::size_t i = ts.index_of(t);
    const std::size_t ir = ts.rho_index(i);
    const std::size_t is = ts.sigma_index(ir);
    return hamiltonian(prob, ts.point(ir), ext.x.at(ir), ext.control_at(ir), ext.lambda,
                       ext.p.at(is));
}

} // namespace tsoc
