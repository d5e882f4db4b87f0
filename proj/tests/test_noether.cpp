#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsoc/errors.hpp"
#include "tsoc/examples.hpp"
#include "tsoc/extremal.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/noether.hpp"
#include "tsoc/ocp.hpp"
#include "tsoc/timescale.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

using namespace tsoc;

namespace {

TimeScalePtr quarter_scale() { return make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.25)); }

ControlProblem quad_problem(TimeScalePtr ts, double xa = 0.0, double xb = 1.0) {
    return ControlProblem(1, 1, Sense::Minimize, Expr::parse("u^2"), {Expr::parse("u")},
                          std::move(ts), {xa}, {xb});
}

TransformationFamily quad_family() {
    TransformationFamily fam;
    fam.kind = FamilyKind::StateOnly;
    fam.h_x = {Expr::parse("x + s*t")};
    fam.gauge = Expr::parse("s^2*t + 2*x*s");
    fam.u_s = {Expr::parse("u + s")};
    return fam;
}

TransformationFamily time_translation(std::size_t n, std::size_t m) {
    TransformationFamily fam;
    fam.kind = FamilyKind::TimeAndState;
    fam.h_t = Expr::parse("t + s");
    for (std::size_t k = 1; k <= n; ++k) {
        fam.h_x.push_back(Expr::parse("x" + std::to_string(k)));
    }
    for (std::size_t j = 1; j <= m; ++j) {
        fam.u_s.push_back(Expr::parse("u" + std::to_string(j)));
    }
    return fam;
}

Extremal quad_extremal(const ControlProblem& prob) {
    auto ts = prob.scale_ptr();
    const double xa = *prob.x_a()[0];
    GridFunction x = GridFunction::sample_scalar(ts, [xa](double t) { return xa + t; });
    GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    GridFunction p = GridFunction::constant_scalar(ts, -2.0);
    return Extremal(std::move(x), std::move(u), std::move(p), 1.0);
}

} // namespace

TEST_CASE("the default s grid is symmetric and collapses to zero") {
    TransformationFamily fam = quad_family();
    const std::vector<double> grid = default_s_grid(fam);
    REQUIRE(grid.size() == 11);
    CHECK(grid.front() == -0.1);
    CHECK(grid.back() == 0.1);
    CHECK(grid[5] == 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        CHECK(grid[k] > grid[k - 1]);
    }

    fam.s_points = 1;
    CHECK(default_s_grid(fam) == std::vector<double>{0.0});

    fam.s_points = 2;
    fam.s_max = 0.3;
    const std::vector<double> two = default_s_grid(fam);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == -0.3);
    CHECK(two[1] == 0.3);
}

TEST_CASE("family validation rejects malformed descriptions") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);

    TransformationFamily no_time = quad_family();
    no_time.kind = FamilyKind::TimeAndState;
    CHECK_THROWS_AS(generators_at_zero(no_time, x, u), Error);

    TransformationFamily stray_time = quad_family();
    stray_time.h_t = Expr::parse("t");
    CHECK_THROWS_AS(generators_at_zero(stray_time, x, u), Error);

    TransformationFamily too_many = quad_family();
    too_many.h_x.push_back(Expr::parse("x"));
    CHECK_THROWS_AS(generators_at_zero(too_many, x, u), DimensionMismatch);

    TransformationFamily no_controls = quad_family();
    no_controls.u_s.clear();
    CHECK_THROWS_AS(generators_at_zero(no_controls, x, u), DimensionMismatch);

    TransformationFamily bad_range = quad_family();
    bad_range.s_max = 0.0;
    CHECK_THROWS_AS(generators_at_zero(bad_range, x, u), DomainError);

    TransformationFamily not_identity = quad_family();
    not_identity.h_x = {Expr::parse("x + 1")};
    CHECK_THROWS_AS(generators_at_zero(not_identity, x, u), Error);

    TransformationFamily shifted_control = quad_family();
    shifted_control.u_s = {Expr::parse("u + 1")};
    CHECK_THROWS_AS(generators_at_zero(shifted_control, x, u), Error);
}

TEST_CASE("generators are the s derivatives at zero") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);

    const Generators gen = generators_at_zero(quad_family(), x, u);
    for (std::size_t i = 0; i < ts->size(); ++i) {
        CHECK(gen.xi(i, 0) == ts->point(i));
        CHECK(gen.gamma(i, 0) == 2.0 * x(i, 0));
        CHECK(gen.zeta(i, 0) == 0.0);
    }

    const Generators shift = generators_at_zero(time_translation(1, 1), x, u);
    for (std::size_t i = 0; i < ts->size(); ++i) {
        CHECK(shift.xi(i, 0) == 0.0);
        CHECK(shift.gamma(i, 0) == 0.0);
        CHECK(shift.zeta(i, 0) == 1.0);
    }
}

TEST_CASE("the gauged dilation family is invariant for the quadratic problem") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    const TransformationFamily fam = quad_family();
    const std::vector<double> grid = default_s_grid(fam);
    CHECK(check_invariance_state_only(prob, fam, x, u, grid) <= 1e-12);

    TransformationFamily wrong_kind = time_translation(1, 1);
    CHECK_THROWS_AS(check_invariance_state_only(prob, wrong_kind, x, u, grid), Error);
}

TEST_CASE("removing the gauge term breaks invariance by the predicted amount") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    TransformationFamily fam = quad_family();
    fam.gauge.reset();
    for (const double s : {-0.1, -0.05, 0.05, 0.1}) {
        CAPTURE(s);
        const std::vector<double> grid{s};
        const double resid = check_invariance_state_only(prob, fam, x, u, grid);
        CHECK(resid == doctest::Approx(std::abs(2.0 * s + s * s)).epsilon(1e-12));
        CHECK(resid >= 0.1 * std::abs(s));
    }
}

TEST_CASE("time translation is invariant exactly when the problem is autonomous") {
    Example car = make_example("car");
    const Extremal ext = example_extremal(car);
    const std::vector<double> grid = default_s_grid(car.family);
    CHECK(check_invariance_time_state(car.problem, car.family, ext.x, ext.u, grid) <=
          1e-10);

    auto ts = quarter_scale();
    ControlProblem aging(1, 1, Sense::Minimize, Expr::parse("t*u^2"), {Expr::parse("u")},
                         ts, {0.0}, {1.0});
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    const TransformationFamily shift = time_translation(1, 1);
    const std::vector<double> sgrid = default_s_grid(shift);
    CHECK(check_invariance_time_state(aging, shift, x, u, sgrid) >= 0.01);

    CHECK_THROWS_AS(check_invariance_time_state(aging, quad_family(), x, u, sgrid), Error);
}

TEST_CASE("a collapsing time map is rejected as non monotone") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    TransformationFamily fam = time_translation(1, 1);
    fam.h_t = Expr::parse("t - 20*s*t");
    const std::vector<double> grid{0.1};
    CHECK_THROWS_AS(check_invariance_time_state(prob, fam, x, u, grid),
                    NonMonotoneTimeMap);
}

TEST_CASE("the state-only conserved quantity is constant along the extremal") {
    auto ts = quarter_scale();

    SUBCASE("zero-anchored boundary gives the zero constant") {
        ControlProblem prob = quad_problem(ts);
        const ConservationReport rep =
            conserved_quantity_state_only(prob, quad_extremal(prob), quad_family());
        CHECK(rep.passed);
        CHECK(rep.max_deviation <= 1e-11);
        CHECK(rep.values(0, 0) == 0.0);
        for (std::size_t i = 0; i < rep.values.size(); ++i) {
            CHECK(rep.values(i, 0) == 0.0);
        }
        CHECK(rep.tolerance >= 1e-9);
    }

    SUBCASE("shifted boundary gives a nonzero constant") {
        ControlProblem prob = quad_problem(ts, 1.0, 2.0);
        const ConservationReport rep =
            conserved_quantity_state_only(prob, quad_extremal(prob), quad_family());
        CHECK(rep.passed);
        CHECK(rep.max_deviation <= 1e-11);
        for (std::size_t i = 0; i < rep.values.size(); ++i) {
            CHECK(rep.values(i, 0) == 2.0);
        }
    }

    SUBCASE("a non-extremal candidate is refused") {
        ControlProblem prob = quad_problem(ts);
        Extremal bad(GridFunction::sample_scalar(ts, [](double t) { return 2.0 * t; }),
                     GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 2.0),
                     GridFunction::constant_scalar(ts, -2.0), 1.0);
        CHECK_THROWS_AS(conserved_quantity_state_only(prob, bad, quad_family()),
                        NotAnExtremal);
    }
}

TEST_CASE("the time-and-state conserved quantity reduces to minus the shifted hamiltonian") {
    Example car = make_example("car");
    const Extremal ext = example_extremal(car);
    const ConservationReport rep =
        conserved_quantity_time_state(car.problem, ext, car.family);
    CHECK(rep.passed);
    CHECK(std::abs(rep.values(0, 0) - 1.0) <= 1e-6);
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        CHECK(rep.values(i, 0) ==
              doctest::Approx(-hamiltonian_rho(car.problem, ext,
                                               car.problem.scale().point(i)))
                  .epsilon(1e-14));
    }
}

TEST_CASE("a state-only family passes through the time-and-state entry point unchanged") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const Extremal ext = quad_extremal(prob);
    const ConservationReport direct =
        conserved_quantity_state_only(prob, ext, quad_family());
    const ConservationReport routed =
        conserved_quantity_time_state(prob, ext, quad_family());
    REQUIRE(direct.values.size() == routed.values.size());
    for (std::size_t i = 0; i < direct.values.size(); ++i) {
        CHECK(direct.values(i, 0) == routed.values(i, 0));
    }
    CHECK(direct.max_deviation == routed.max_deviation);
    CHECK(direct.passed == routed.passed);
}

TEST_CASE("the abnormal extremal conserves the zero quantity exactly") {
    Example ex = make_example("abnormal");
    const Extremal ext = example_extremal(ex);
    CHECK(ext.lambda == 0.0);
    const ConservationReport rep =
        conserved_quantity_time_state(ex.problem, ext, ex.family);
    CHECK(rep.passed);
    CHECK(rep.max_deviation == 0.0);
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        CHECK(rep.values(i, 0) == 0.0);
    }
}

TEST_CASE("deformed controls can be fitted back from the deformed states") {
    auto ts = quarter_scale();
    ControlProblem prob = quad_problem(ts);
    const GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);

    SUBCASE("a fittable family recovers the shifted control") {
        const double s = 0.07;
        const DeformedControlFit fit = fit_deformed_control(prob, quad_family(), x, u, s);
        CHECK(fit.residual <= 1e-9);
        for (std::size_t i = 0; i < fit.u_fit.size(); ++i) {
            CHECK(fit.u_fit(i, 0) == doctest::Approx(1.0 + s).epsilon(1e-9));
        }
    }

    SUBCASE("an unfittable family reports the dynamics gap") {
        ControlProblem squared(1, 1, Sense::Minimize, Expr::parse("u^2"),
                               {Expr::parse("u^2")}, ts, {0.0});
        const GridFunction x0 = GridFunction::constant_scalar(ts, 0.0);
        const GridFunction u0 =
            GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 0.0);
        TransformationFamily fam;
        fam.kind = FamilyKind::StateOnly;
        fam.h_x = {Expr::parse("x - s*t")};
        fam.u_s = {Expr::parse("u")};
        const double s = 0.1;
        const DeformedControlFit fit = fit_deformed_control(squared, fam, x0, u0, s);
        CHECK(fit.residual >= 0.05);
        CHECK(fit.residual == doctest::Approx(s).epsilon(1e-6));
    }
}
