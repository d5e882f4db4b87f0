#include "tsoc/errors.hpp"
#include "tsoc/examples.hpp"
#include "tsoc/extremal.hpp"
#include "tsoc/noether.hpp"
#include "tsoc/ocp.hpp"
#include "tsoc/problem_file.hpp"
#include "tsoc/reports.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace tsoc;

constexpr double kExtremalGate = 1e-9;
constexpr double kInvarianceGate = 1e-10;

const int kExitUsage = 1;
const int kExitCheckFailed = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + out_path + "'");
    }
    out << text;
    if (!out) {
        throw Error("write to '" + out_path + "' failed");
    }
}

std::string chomp(std::string text) {
    if (!text.empty() && text.back() == '\n') {
        text.pop_back();
    }
    return text;
}

const char* bool_field(bool b) { return b ? "true" : "false"; }

struct CommonArgs {
    std::string problem_path;
    std::string example_name;
    std::string scale;
    std::string out;
    std::string format = "json";
    std::string dump;
    std::string trajectory;
};

struct SolverArgs {
    double theta = 0.5;
    std::size_t max_iters = 500;
    double tol_u = 1e-10;
    double tol_shoot = 1e-9;
    std::vector<double> p_b;
    bool shooting = false;
};

void add_common_options(CLI::App& sub, CommonArgs& args, bool with_source) {
    if (with_source) {
        sub.add_option("--problem", args.problem_path, "problem file to load");
        sub.add_option("--example", args.example_name,
                       "built-in example name (quadratic, car, abnormal)");
    }
    sub.add_option("--scale", args.scale,
                   "scale override: uniform:a,b,h | qscale:q,nmin,nmax | explicit:p1,...");
    sub.add_option("--out", args.out, "write the report here instead of stdout");
    sub.add_option("--format", args.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--dump-problem", args.dump,
                   "write the loaded problem as a problem file and exit ('-' for stdout)");
}

void add_trajectory_option(CLI::App& sub, CommonArgs& args) {
    sub.add_option("--trajectory", args.trajectory,
                   "extremal CSV (as written by solve) supplying x, u, p, lambda");
}

void add_solver_options(CLI::App& sub, SolverArgs& args) {
    sub.add_option("--theta", args.theta, "control update relaxation in (0,1]");
    sub.add_option("--max-iters", args.max_iters, "sweep iteration cap");
    sub.add_option("--tol-u", args.tol_u, "sweep stopping tolerance on u");
    sub.add_option("--tol-shoot", args.tol_shoot, "shooting tolerance on the x(b) miss");
    sub.add_option("--p-b", args.p_b, "terminal costate (comma-separated)")
        ->delimiter(',');
    sub.add_flag("--shooting,!--no-shooting", args.shooting,
                 "find p(b) by shooting on the fixed x(b)");
}

struct LoadedProblem {
    ProblemFileContents contents;
    std::optional<Example> example;
};

LoadedProblem load_inputs(const CommonArgs& args) {
    std::optional<std::string_view> scale;
    if (!args.scale.empty()) {
        scale = args.scale;
    }
    const bool have_problem = !args.problem_path.empty();
    const bool have_example = !args.example_name.empty();
    if (have_problem == have_example) {
        throw Error("pass exactly one of --problem and --example");
    }
    if (have_example) {
        Example ex = make_example(args.example_name, scale);
        ProblemFileContents contents = example_contents(ex);
        return {std::move(contents), std::move(ex)};
    }
    return {load_problem_file(args.problem_path, scale), std::nullopt};
}

void apply_solver_overrides(const CLI::App& sub, const SolverArgs& args,
                            ProblemFileContents& contents) {
    if (sub.count("--theta") > 0) {
        if (!(args.theta > 0.0) || args.theta > 1.0) {
            throw Error("--theta must lie in (0,1]");
        }
        contents.solver.theta = args.theta;
    }
    if (sub.count("--max-iters") > 0) {
        contents.solver.max_iters = args.max_iters;
    }
    if (sub.count("--tol-u") > 0) {
        contents.solver.tol_u = args.tol_u;
    }
    if (sub.count("--tol-shoot") > 0) {
        contents.solver.tol_shoot = args.tol_shoot;
    }
    if (sub.count("--p-b") > 0) {
        contents.p_b = args.p_b;
    }
    if (sub.count("--shooting") > 0 || sub.count("--no-shooting") > 0) {
        contents.shooting = args.shooting;
    }
}

bool maybe_dump(const LoadedProblem& loaded, const CommonArgs& args) {
    if (args.dump.empty()) {
        return false;
    }
    emit(dump_problem_text(loaded.contents), args.dump == "-" ? "" : args.dump);
    return true;
}

const TransformationFamily& require_family(const LoadedProblem& loaded) {
    if (!loaded.contents.family) {
        throw Error("transformation family required: add a [transformation] block "
                    "or use a built-in example");
    }
    return *loaded.contents.family;
}

Extremal load_extremal(const LoadedProblem& loaded, const CommonArgs& args) {
    if (!args.trajectory.empty()) {
        return parse_extremal_csv(read_file(args.trajectory), loaded.contents.problem);
    }
    if (loaded.example) {
        return example_extremal(*loaded.example);
    }
    throw Error("extremal required: pass --trajectory FILE or use --example");
}

int fail_check(const std::string& what, double value, double bound) {
    std::cerr << "check failed: " << what << " " << format_double17(value)
              << " exceeds " << format_double17(bound) << "\n";
    return kExitCheckFailed;
}

double invariance_residual(const ControlProblem& prob, const TransformationFamily& fam,
                           const GridFunction& x, const GridFunction& u) {
    const std::vector<double> s_grid = default_s_grid(fam);
    if (fam.kind == FamilyKind::StateOnly) {
        return check_invariance_state_only(prob, fam, x, u, s_grid);
    }
    return check_invariance_time_state(prob, fam, x, u, s_grid);
}

ConservationReport conservation_report(const ControlProblem& prob, const Extremal& ext,
                                       const TransformationFamily& fam) {
    if (fam.kind == FamilyKind::StateOnly) {
        return conserved_quantity_state_only(prob, ext, fam);
    }
    return conserved_quantity_time_state(prob, ext, fam);
}

int cmd_solve(const CLI::App& sub, CommonArgs& common, SolverArgs& solver) {
    LoadedProblem loaded = load_inputs(common);
    if (maybe_dump(loaded, common)) {
        return 0;
    }
    apply_solver_overrides(sub, solver, loaded.contents);
    const ControlProblem& prob = loaded.contents.problem;
    GridFunction u_init(make_scale_ptr(prob.scale().kappa()), prob.m());
    std::optional<std::vector<double>> p_b;
    if (!loaded.contents.shooting) {
        p_b = loaded.contents.p_b;
    }
    Extremal ext =
        forward_backward_sweep(prob, 1.0, u_init, std::move(p_b), loaded.contents.solver);
    emit(extremal_csv(ext), common.out);
    return 0;
}

int cmd_verify(CommonArgs& common) {
    LoadedProblem loaded = load_inputs(common);
    if (maybe_dump(loaded, common)) {
        return 0;
    }
    const Extremal ext = load_extremal(loaded, common);
    const ExtremalReport rep = verify_extremal(loaded.contents.problem, ext);
    emit(common.format == "csv" ? extremal_report_csv(rep) : extremal_report_json(rep),
         common.out);
    if (!rep.nontrivial) {
        std::cerr << "check failed: trivial multipliers (lambda and p both vanish)\n";
        return kExitCheckFailed;
    }
    if (rep.worst() > kExtremalGate) {
        return fail_check("extremal residual", rep.worst(), kExtremalGate);
    }
    return 0;
}

int cmd_check_invariance(CommonArgs& common) {
    LoadedProblem loaded = load_inputs(common);
    if (maybe_dump(loaded, common)) {
        return 0;
    }
    const TransformationFamily& fam = require_family(loaded);
    const Extremal ext = load_extremal(loaded, common);
    const double residual =
        invariance_residual(loaded.contents.problem, fam, ext.x, ext.u);
    const bool passed = residual <= kInvarianceGate;
    const char* kind = fam.kind == FamilyKind::StateOnly ? "state_only" : "time_and_state";
    std::string text;
    if (common.format == "csv") {
        text = "kind,residual,passed\n";
        text += kind;
        text += ',';
        text += format_double17(residual);
        text += ',';
        text += bool_field(passed);
        text += '\n';
    } else {
        text = "{\"schema\": 1, \"kind\": \"";
        text += kind;
        text += "\", \"residual\": " + format_double17(residual);
        text += ", \"passed\": ";
        text += passed ? "true" : "false";
        text += "}\n";
    }
    emit(text, common.out);
    if (!passed) {
        return fail_check("invariance residual", residual, kInvarianceGate);
    }
    return 0;
}

int cmd_conserve(CommonArgs& common) {
    LoadedProblem loaded = load_inputs(common);
    if (maybe_dump(loaded, common)) {
        return 0;
    }
    const TransformationFamily& fam = require_family(loaded);
    const Extremal ext = load_extremal(loaded, common);
    const ConservationReport rep =
        conservation_report(loaded.contents.problem, ext, fam);
    emit(common.format == "csv" ? conservation_csv(rep) : conservation_json(rep),
         common.out);
    if (!rep.passed) {
        return fail_check("conservation deviation", rep.max_deviation, rep.tolerance);
    }
    return 0;
}

int cmd_run_example(CommonArgs& common) {
    std::optional<std::string_view> scale;
    if (!common.scale.empty()) {
        scale = common.scale;
    }
    Example ex = make_example(common.example_name, scale);
    if (!common.dump.empty()) {
        emit(dump_problem_text(example_contents(ex)), common.dump == "-" ? "" : common.dump);
        return 0;
    }
    const Extremal ext = example_extremal(ex);
    const ExtremalReport erep = verify_extremal(ex.problem, ext);
    const double inv = invariance_residual(ex.problem, ex.family, ext.x, ext.u);
    const ConservationReport crep = conservation_report(ex.problem, ext, ex.family);
    const double j = cost(ex.problem, ext.x, ext.u);
    const bool passed = erep.nontrivial && erep.worst() <= kExtremalGate &&
                        inv <= kInvarianceGate && crep.passed;

    std::string text;
    if (common.format == "csv") {
        text += "# example=" + ex.name + "\n";
        text += "# lambda=" + format_double17(ext.lambda) + "\n";
        text += "# cost=" + format_double17(j) + "\n";
        text += "# adjoint_residual=" + format_double17(erep.adjoint_residual) + "\n";
        text += "# stationarity_residual=" + format_double17(erep.stationarity_residual) + "\n";
        text += "# admissibility_residual=" + format_double17(erep.admissibility_residual) + "\n";
        text += "# nontrivial=";
        text += bool_field(erep.nontrivial);
        text += "\n# invariance_residual=" + format_double17(inv) + "\n";
        text += "# max_deviation=" + format_double17(crep.max_deviation) + "\n";
        text += "# passed=";
        text += bool_field(passed);
        text += '\n';
        text += conservation_csv(crep);
    } else {
        text = "{\"schema\": 1, \"example\": \"" + ex.name + "\"";
        text += ", \"lambda\": " + format_double17(ext.lambda);
        text += ", \"cost\": " + format_double17(j);
        text += ", \"extremal\": " + chomp(extremal_report_json(erep));
        text += ", \"invariance_residual\": " + format_double17(inv);
        text += ", \"conservation\": " + chomp(conservation_json(crep));
        text += ", \"passed\": ";
        text += passed ? "true" : "false";
        text += "}\n";
    }
    emit(text, common.out);

    if (!erep.nontrivial) {
        std::cerr << "check failed: trivial multipliers (lambda and p both vanish)\n";
        return kExitCheckFailed;
    }
    if (erep.worst() > kExtremalGate) {
        return fail_check("extremal residual", erep.worst(), kExtremalGate);
    }
    if (inv > kInvarianceGate) {
        return fail_check("invariance residual", inv, kInvarianceGate);
    }
    if (!crep.passed) {
        return fail_check("conservation deviation", crep.max_deviation, crep.tolerance);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal control on time scales: extremals and conserved quantities"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run = app.add_subcommand(
        "run-example", "verify a built-in example end to end and report");
    run->add_option("name", run_args.example_name, "quadratic | car | abnormal")
        ->required();
    add_common_options(*run, run_args, false);

    CommonArgs solve_args;
    SolverArgs solver_args;
    CLI::App* solve = app.add_subcommand(
        "solve", "synthesize a normal extremal by forward-backward sweep");
    add_common_options(*solve, solve_args, true);
    add_solver_options(*solve, solver_args);

    CommonArgs verify_args;
    CLI::App* verify = app.add_subcommand(
        "verify", "residuals of the extremal conditions for a trajectory");
    add_common_options(*verify, verify_args, true);
    add_trajectory_option(*verify, verify_args);

    CommonArgs inv_args;
    CLI::App* inv = app.add_subcommand(
        "check-invariance", "invariance residual of a transformation family");
    add_common_options(*inv, inv_args, true);
    add_trajectory_option(*inv, inv_args);

    CommonArgs cons_args;
    CLI::App* cons = app.add_subcommand(
        "conserve", "evaluate the conserved quantity along an extremal");
    add_common_options(*cons, cons_args, true);
    add_trajectory_option(*cons, cons_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run_example(run_args);
        }
        if (solve->parsed()) {
            return cmd_solve(*solve, solve_args, solver_args);
        }
        if (verify->parsed()) {
            return cmd_verify(verify_args);
        }
        if (inv->parsed()) {
            return cmd_check_invariance(inv_args);
        }
        if (cons->parsed()) {
            return cmd_conserve(cons_args);
        }
    } catch (const NoConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const NotAnExtremal& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const NonMonotoneTimeMap& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const RhoSigmaViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const RegularityViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
