#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsoc/errors.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/ocp.hpp"
#include "tsoc/timescale.hpp"

#include <cmath>
#include <optional>
#include <vector>

using namespace tsoc;

namespace {

TimeScalePtr quarter_scale() { return make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.25)); }

ControlProblem quad_problem(TimeScalePtr ts) {
    return ControlProblem(1, 1, Sense::Minimize, Expr::parse("u^2"), {Expr::parse("u")},
                          std::move(ts), {0.0}, {1.0});
}

ControlProblem car_problem(TimeScalePtr ts) {
    return ControlProblem(3, 2, Sense::Minimize, Expr::parse("u1^2 + u2^2"),
                          {Expr::parse("u1*cos(x3)"), Expr::parse("u1*sin(x3)"),
                           Expr::parse("u2")},
                          std::move(ts), {0.0, 0.0, 0.0});
}

} // namespace

TEST_CASE("constructor rejects inconsistent shapes") {
    auto ts = quarter_scale();
    CHECK_THROWS_AS(ControlProblem(2, 1, Sense::Minimize, Expr::parse("u^2"),
                                   {Expr::parse("u1")}, ts),
                    DimensionMismatch);
    CHECK_THROWS_AS(ControlProblem(1, 1, Sense::Minimize, Expr::parse("u^2"),
                                   {Expr::parse("u")}, ts, {0.0, 1.0}),
                    DimensionMismatch);
    CHECK_THROWS_AS(ControlProblem(1, 1, Sense::Minimize, Expr::parse("u^2"),
                                   {Expr::parse("u")}, ts, {0.0}, {0.0, 1.0, 2.0}),
                    DimensionMismatch);
    CHECK_THROWS_AS(ControlProblem(0, 1, Sense::Minimize, Expr::parse("u^2"), {}, ts),
                    DimensionMismatch);
    CHECK_THROWS_AS(ControlProblem(1, 0, Sense::Minimize, Expr::parse("x1"),
                                   {Expr::parse("x1")}, ts),
                    DimensionMismatch);
    CHECK_NOTHROW(ControlProblem(1, 1, Sense::Minimize, Expr::parse("u^2"),
                                 {Expr::parse("u")}, ts));
}

TEST_CASE("free boundary coordinates are spelled nullopt") {
    auto ts = quarter_scale();
    std::vector<std::optional<double>> x_a{0.0, std::nullopt, 2.5};
    ControlProblem prob(3, 2, Sense::Minimize, Expr::parse("u1^2 + u2^2"),
                        {Expr::parse("u1"), Expr::parse("u2"), Expr::parse("u1 + u2")},
                        ts, x_a);
    CHECK(prob.x_a().size() == 3);
    CHECK(prob.x_a()[0] == 0.0);
    CHECK_FALSE(prob.x_a()[1].has_value());
    CHECK(prob.x_b().empty());
}

TEST_CASE("maximization only flips the internal orientation") {
    auto ts = quarter_scale();
    ControlProblem maxp(1, 1, Sense::Maximize, Expr::parse("u"),
                        {Expr::parse("(u - u^2)^2")}, ts, {0.0}, {0.0});
    ControlProblem minp(1, 1, Sense::Minimize, Expr::parse("u"),
                        {Expr::parse("(u - u^2)^2")}, ts, {0.0}, {0.0});

    CHECK(maxp.internal_sign() == -1.0);
    CHECK(minp.internal_sign() == 1.0);

    const std::vector<double> x{0.0};
    const std::vector<double> u{3.0};
    CHECK(maxp.lagrangian_at(0.0, x, u) == 3.0);
    CHECK(maxp.internal_lagrangian_at(0.0, x, u) == -3.0);
    CHECK(minp.internal_lagrangian_at(0.0, x, u) == 3.0);

    std::vector<double> du(1);
    maxp.lagrangian_du(0.0, x, u, du);
    CHECK(du[0] == -1.0);
    minp.lagrangian_du(0.0, x, u, du);
    CHECK(du[0] == 1.0);

    ControlProblem maxq(1, 1, Sense::Maximize, Expr::parse("x^2"), {Expr::parse("u")}, ts);
    std::vector<double> dx(1);
    maxq.lagrangian_dx(0.0, std::vector<double>{3.0}, u, dx);
    CHECK(dx[0] == -6.0);
}

TEST_CASE("planar-motion dynamics and jacobians match hand derivatives") {
    auto ts = quarter_scale();
    ControlProblem prob = car_problem(ts);
    const double x3 = 1.0471975511965976;
    const std::vector<double> x{0.4, -1.2, x3};
    const std::vector<double> u{2.0, 5.0};

    std::vector<double> phi(3);
    prob.dynamics_at(0.0, x, u, phi);
    CHECK(phi[0] == 2.0 * std::cos(x3));
    CHECK(phi[1] == 2.0 * std::sin(x3));
    CHECK(phi[2] == 5.0);

    std::vector<double> jx(9);
    prob.dynamics_dx(0.0, x, u, jx);
    CHECK(jx[0] == 0.0);
    CHECK(jx[1] == 0.0);
    CHECK(jx[2] == doctest::Approx(-2.0 * std::sin(x3)).epsilon(1e-15));
    CHECK(jx[5] == doctest::Approx(2.0 * std::cos(x3)).epsilon(1e-15));
    CHECK(jx[3] == 0.0);
    CHECK(jx[4] == 0.0);
    CHECK(jx[6] == 0.0);
    CHECK(jx[7] == 0.0);
    CHECK(jx[8] == 0.0);

    std::vector<double> ju(6);
    prob.dynamics_du(0.0, x, u, ju);
    CHECK(ju[0] == doctest::Approx(std::cos(x3)).epsilon(1e-15));
    CHECK(ju[1] == 0.0);
    CHECK(ju[2] == doctest::Approx(std::sin(x3)).epsilon(1e-15));
    CHECK(ju[3] == 0.0);
    CHECK(ju[4] == 0.0);
    CHECK(ju[5] == 1.0);

    CHECK_THROWS_AS(prob.dynamics_at(0.0, std::vector<double>{0.0}, u, phi),
                    DimensionMismatch);
    CHECK_THROWS_AS(prob.dynamics_at(0.0, x, std::vector<double>{1.0}, phi),
                    DimensionMismatch);
}

TEST_CASE("cost integrates the user-oriented running cost") {
    auto ts = quarter_scale();
    ControlProblem quad = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    CHECK(cost(quad, x, u) == 1.0);

    ControlProblem maxp(1, 1, Sense::Maximize, Expr::parse("u"),
                        {Expr::parse("(u - u^2)^2")}, ts, {0.0}, {0.0});
    const GridFunction zero = GridFunction::constant_scalar(ts, 0.0);
    CHECK(cost(maxp, zero, u) == 1.0);

    GridFunction u_full = GridFunction::constant_scalar(ts, 1.0);
    u_full(ts->size() - 1, 0) = 999.0;
    CHECK(cost(quad, x, u_full) == 1.0);

    const GridFunction u_wrong(make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.5)), 1);
    CHECK_THROWS_AS(cost(quad, x, u_wrong), DimensionMismatch);
}

TEST_CASE("admissibility residual is a max-norm over the differentiation window") {
    auto ts = quarter_scale();
    ControlProblem quad = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    auto tk = make_scale_ptr(ts->kappa());
    CHECK(admissibility_residual(quad, x, GridFunction::constant_scalar(tk, 1.0)) == 0.0);
    CHECK(admissibility_residual(quad, x, GridFunction::constant_scalar(tk, 2.0)) == 1.0);

    GridFunction u_mixed = GridFunction::constant_scalar(tk, 1.0);
    u_mixed(2, 0) = 1.5;
    CHECK(admissibility_residual(quad, x, u_mixed) == 0.5);
}

TEST_CASE("regularity detects a vanishing shift determinant") {
    auto ts = quarter_scale();
    ControlProblem degenerate(1, 1, Sense::Minimize, Expr::parse("u^2"),
                              {Expr::parse("-4*x")}, ts);
    const GridFunction x = GridFunction::constant_scalar(ts, 1.0);
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 0.0);
    const RegularityResult bad = regularity_check(degenerate, x, u);
    CHECK_FALSE(bad.ok);
    CHECK(bad.min_abs_det == 0.0);

    ControlProblem quad = quad_problem(ts);
    const RegularityResult good = regularity_check(quad, x, u);
    CHECK(good.ok);
    CHECK(good.min_abs_det == 1.0);
}

TEST_CASE("hamiltonian combines multiplier, running cost, and dynamics") {
    auto ts = quarter_scale();
    ControlProblem quad = quad_problem(ts);
    const std::vector<double> x{0.0};
    const std::vector<double> u{1.0};
    const std::vector<double> p{-2.0};
    CHECK(hamiltonian(quad, 0.0, x, u, 1.0, p) == -1.0);
    CHECK(hamiltonian(quad, 0.0, x, u, 0.0, p) == -2.0);

    ControlProblem maxp(1, 1, Sense::Maximize, Expr::parse("u"), {Expr::parse("u")}, ts);
    CHECK(hamiltonian(maxp, 0.0, x, std::vector<double>{3.0}, 2.0,
                      std::vector<double>{0.5}) == -4.5);

    CHECK_THROWS_AS(hamiltonian(quad, 0.0, x, u, 1.0, std::vector<double>{1.0, 2.0}),
                    DimensionMismatch);
}

TEST_CASE("hamiltonian through the backward shift is constant on the linear extremal") {
    auto ts = quarter_scale();
    ControlProblem quad = quad_problem(ts);
    Extremal ext(GridFunction::sample_scalar(ts, [](double t) { return t; }),
                 GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0),
                 GridFunction::constant_scalar(ts, -2.0), 1.0);
    for (std::size_t i = 0; i < ts->size(); ++i) {
        CHECK(hamiltonian_rho(quad, ext, ts->point(i)) == -1.0);
    }
    CHECK(hamiltonian_rho(quad, ext, ts->point(0)) ==
          hamiltonian(quad, ts->point(0), ext.x.at(0), ext.u.at(0), ext.lambda,
                      ext.p.at(1)));
}

TEST_CASE("extremal construction guards the multiplier and the shapes") {
    auto ts = quarter_scale();
    auto tk = make_scale_ptr(ts->kappa());
    const GridFunction x = GridFunction::constant_scalar(ts, 0.0);
    const GridFunction u = GridFunction::constant_scalar(tk, 0.0);
    const GridFunction p = GridFunction::constant_scalar(ts, 0.0);

    CHECK_THROWS_AS(Extremal(x, u, p, -1.0), DomainError);
    CHECK_THROWS_AS(Extremal(x, u, GridFunction(ts, 2), 1.0), DimensionMismatch);
    CHECK_THROWS_AS(
        Extremal(x, u, GridFunction(make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.5)), 1),
                 1.0),
        DimensionMismatch);
    CHECK_THROWS_AS(
        Extremal(x, GridFunction(make_scale_ptr(TimeScale::uniform(0.0, 0.5, 0.25)), 1),
                 p, 1.0),
        DimensionMismatch);
    CHECK_NOTHROW(Extremal(x, GridFunction::constant_scalar(ts, 0.0), p, 1.0));
}

TEST_CASE("nontriviality needs a multiplier or a costate") {
    auto ts = quarter_scale();
    auto tk = make_scale_ptr(ts->kappa());
    const GridFunction x = GridFunction::constant_scalar(ts, 0.0);
    const GridFunction u = GridFunction::constant_scalar(tk, 0.0);

    CHECK_FALSE(Extremal(x, u, GridFunction::constant_scalar(ts, 0.0), 0.0).nontrivial());
    CHECK(Extremal(x, u, GridFunction::constant_scalar(ts, 0.0), 1.0).nontrivial());
    CHECK(Extremal(x, u, GridFunction::constant_scalar(ts, -1.0), 0.0).nontrivial());

    GridFunction p_tiny = GridFunction::constant_scalar(ts, 0.0);
    p_tiny(2, 0) = 1e-13;
    CHECK_FALSE(Extremal(x, u, p_tiny, 0.0).nontrivial());
}

TEST_CASE("control lookups clamp at the right endpoint") {
    auto ts = quarter_scale();
    auto tk = make_scale_ptr(ts->kappa());
    GridFunction u(tk, 1);
    for (std::size_t i = 0; i < tk->size(); ++i) {
        u(i, 0) = static_cast<double>(i + 1);
    }
    Extremal ext(GridFunction::constant_scalar(ts, 0.0), u,
                 GridFunction::constant_scalar(ts, 0.0), 1.0);
    CHECK(ext.control_at(2)[0] == 3.0);
    CHECK(ext.control_at(3)[0] == 4.0);
    CHECK(ext.control_at(4)[0] == 4.0);
}
