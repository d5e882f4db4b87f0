#pragma once

#include "tsoc/extremal.hpp"
#include "tsoc/noether.hpp"
#include "tsoc/ocp.hpp"
#include "tsoc/problem_file.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsoc {

/// A bundled demonstration problem: the control problem, its symmetry
/// family, and how its reference extremal is obtained (closed form where
/// one exists, otherwise the sweep with the stored terminal costate).
struct Example {
    std::string name;
    ControlProblem problem;
    TransformationFamily family;
    std::optional<std::vector<double>> p_b; // terminal costate for the sweep
    bool analytic;                          // reference extremal in closed form
};

/// quadratic: min integral of u^2 with x^Delta = u, x(a) = 0, x(b) = b - a;
///   invariant under h_x = x + s t with gauge s^2 t + 2 x s and u_s = u + s.
///   Reference extremal in closed form: x linear, u and p constant.
/// car: min integral of u1^2 + u2^2 with planar-motion kinematics
///   (x1, x2) position and x3 heading; autonomous, so invariant under the
///   time translation h_t = t + s. Reference extremal from the sweep with
///   x(a) = 0 and p(b) = (-2, 0, 0).
/// abnormal: max integral of u with x^Delta = (u - u^2)^2 and
///   x(a) = x(b) = 0; every admissible control has u in {0,1} pointwise.
///   Reference extremal (x, u, lambda, p) = (0, 1, 0, -1) is abnormal.
const std::vector<std::string>& example_names();

/// Throws Error for an unknown name. scale_spec overrides the default scale.
Example make_example(std::string_view name,
                     std::optional<std::string_view> scale_spec = {});

/// The example's reference extremal (closed form or swept, per `analytic`).
Extremal example_extremal(const Example& ex);

/// The example as problem-file contents (for dumping).
ProblemFileContents example_contents(const Example& ex);

} // namespace tsoc
