#pragma once

#include "tsoc/extremal.hpp"
#include "tsoc/noether.hpp"
#include "tsoc/ocp.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsoc {

/// Everything a problem file can carry: the problem itself, an optional
/// [transformation] block and optional [solver] settings.
struct ProblemFileContents {
    ControlProblem problem;
    std::optional<TransformationFamily> family;
    SweepOptions solver;
    std::optional<std::vector<double>> p_b;
    bool shooting = false;
};

/// Parse the key-value problem format:
///
///   n = 1
///   m = 1
///   sense = min
///   lagrangian = "u^2"
///   dynamics = ["u"]
///   scale = "uniform:0,1,0.25"
///   x_a = [0]          # entries may be `free`
///   x_b = [1]
///
///   [transformation]
///   kind = state_only   # or time_and_state (then h_t is required)
///   h_x = ["x + s*t"]
///   gauge = "s^2*t + 2*x*s"
///   u_s = ["u + s"]
///   s_max = 0.1
///   s_points = 11
///
///   [solver]
///   theta = 0.5
///   max_iters = 500
///   tol_u = 1e-10
///   tol_shoot = 1e-9
///   p_b = [-2]
///   shooting = true
///
/// Values may be quoted or bare; `#` starts a comment. Errors carry
/// source_name:line. scale_override replaces the scale field when given.
ProblemFileContents parse_problem_text(std::string_view text, std::string_view source_name,
                                       std::optional<std::string_view> scale_override = {});

ProblemFileContents load_problem_file(const std::string& path,
                                      std::optional<std::string_view> scale_override = {});

/// Canonical problem-file form of the contents; parse_problem_text maps it
/// back to the same problem.
std::string dump_problem_text(const ProblemFileContents& contents);

} // namespace tsoc
