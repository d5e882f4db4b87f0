#include "tsoc/examples.hpp"

#include "tsoc/errors.hpp"

#include <utility>

namespace tsoc {

namespace {

TimeScalePtr build_scale(std::string_view fallback, std::optional<std::string_view> override_spec) {
    return make_scale_ptr(parse_scale_spec(override_spec.value_or(fallback)));
}

Example make_quadratic(std::optional<std::string_view> scale_spec) {
    TimeScalePtr scale = build_scale("uniform:0,1,0.25", scale_spec);
    const double span = scale->b() - scale->a();
    ControlProblem problem(1, 1, Sense::Minimize, Expr::parse("u^2"), {Expr::parse("u")},
                           scale, {0.0}, {span});
    TransformationFamily family;
    family.kind = FamilyKind::StateOnly;
    family.h_x = {Expr::parse("x + s*t")};
    family.gauge = Expr::parse("s^2*t + 2*x*s");
    family.u_s = {Expr::parse("u + s")};
    return {"quadratic", std::move(problem), std::move(family), std::nullopt, true};
}

Example make_car(std::optional<std::string_view> scale_spec) {
    TimeScalePtr scale = build_scale("uniform:0,1,0.05", scale_spec);
    ControlProblem problem(3, 2, Sense::Minimize, Expr::parse("u1^2 + u2^2"),
                           {Expr::parse("u1*cos(x3)"), Expr::parse("u1*sin(x3)"),
                            Expr::parse("u2")},
                           scale, {0.0, 0.0, 0.0}, {});
    TransformationFamily family;
    family.kind = FamilyKind::TimeAndState;
    family.h_t = Expr::parse("t + s");
    family.h_x = {Expr::parse("x1"), Expr::parse("x2"), Expr::parse("x3")};
    family.u_s = {Expr::parse("u1"), Expr::parse("u2")};
    return {"car", std::move(problem), std::move(family),
            std::vector<double>{-2.0, 0.0, 0.0}, false};
}

Example make_abnormal(std::optional<std::string_view> scale_spec) {
    TimeScalePtr scale = build_scale("uniform:0,1,0.25", scale_spec);
    ControlProblem problem(1, 1, Sense::Maximize, Expr::parse("u"),
                           {Expr::parse("(u - u^2)^2")}, scale, {0.0}, {0.0});
    TransformationFamily family;
    family.kind = FamilyKind::TimeAndState;
    family.h_t = Expr::parse("t + s");
    family.h_x = {Expr::parse("x")};
    family.u_s = {Expr::parse("u")};
    return {"abnormal", std::move(problem), std::move(family), std::nullopt, true};
}

} // namespace

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names = {"quadratic", "car", "abnormal"};
    return names;
}

Example make_example(std::string_view name, std::optional<std::string_view> scale_spec) {
    if (name == "quadratic") {
        return make_quadratic(scale_spec);
    }
    if (name == "car") {
        return make_car(scale_spec);
    }
    if (name == "abnormal") {
        return make_abnormal(scale_spec);
    }
    throw Error("unknown example '" + std::string(name) +
                "' (available: quadratic, car, abnormal)");
}

Extremal example_extremal(const Example& ex) {
    const ControlProblem& prob = ex.problem;
    const TimeScalePtr& scale = prob.scale_ptr();
    const TimeScalePtr kappa = make_scale_ptr(scale->kappa());

    if (ex.name == "quadratic") {
        const double a = scale->a();
        const double xa = *prob.x_a()[0];
        const double xb = *prob.x_b()[0];
        const double c = (xb - xa) / (scale->b() - a);
        GridFunction x = GridFunction::sample_scalar(
            scale, [&](double t) { return xa + c * (t - a); });
        GridFunction u = GridFunction::constant_scalar(kappa, c);
        GridFunction p = GridFunction::constant_scalar(scale, -2.0 * c);
        return Extremal(std::move(x), std::move(u), std::move(p), 1.0);
    }
    if (ex.name == "abnormal") {
        GridFunction x = GridFunction::constant_scalar(scale, 0.0);
        GridFunction u = GridFunction::constant_scalar(kappa, 1.0);
        GridFunction p = GridFunction::constant_scalar(scale, -1.0);
        return Extremal(std::move(x), std::move(u), std::move(p), 0.0);
    }
    if (ex.name == "car") {
        GridFunction u_init(kappa, prob.m());
        return forward_backward_sweep(prob, 1.0, u_init, ex.p_b);
    }
    throw Error("example '" + ex.name + "' has no reference extremal");
}

ProblemFileContents example_contents(const Example& ex) {
    SweepOptions solver;
    const bool shooting = !ex.p_b.has_value() && !ex.problem.x_b().empty();
    return {ex.problem, ex.family, solver, ex.p_b, shooting};
}

} // namespace tsoc
