#include "tsoc/problem_file.hpp"

#include "tsoc/errors.hpp"
#include "tsoc/reports.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace tsoc {

namespace {

struct Location {
    std::string_view source;
    std::size_t line = 0;

    std::string str() const {
        return std::string(source) + ":" + std::to_string(line);
    }
};

[[noreturn]] void fail(const Location& loc, const std::string& what) {
    throw Error(loc.str() + ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

/// Strips a trailing comment, respecting double quotes.
std::string_view strip_comment(std::string_view line) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            in_quotes = !in_quotes;
        } else if (line[i] == '#' && !in_quotes) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string unquote(std::string_view value, const Location& loc) {
    value = trim(value);
    if (value.size() >= 2 && value.front() == '"') {
        if (value.back() != '"') {
            fail(loc, "unterminated string");
        }
        return std::string(value.substr(1, value.size() - 2));
    }
    return std::string(value);
}

double parse_double(std::string_view value, const Location& loc) {
    value = trim(value);
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        fail(loc, "'" + std::string(value) + "' is not a number");
    }
    return out;
}

std::size_t parse_count(std::string_view value, const Location& loc) {
    value = trim(value);
    std::size_t out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        fail(loc, "'" + std::string(value) + "' is not a nonnegative integer");
    }
    return out;
}

bool parse_bool(std::string_view value, const Location& loc) {
    value = trim(value);
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    fail(loc, "'" + std::string(value) + "' is not true or false");
}

/// Splits "[a, b, c]" into its top-level items, respecting quotes.
std::vector<std::string> parse_array(std::string_view value, const Location& loc) {
    value = trim(value);
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
        fail(loc, "expected an array [ ... ]");
    }
    value = trim(value.substr(1, value.size() - 2));
    std::vector<std::string> items;
    if (value.empty()) {
        return items;
    }
    bool in_quotes = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= value.size(); ++i) {
        if (i == value.size() || (value[i] == ',' && !in_quotes)) {
            items.push_back(unquote(trim(value.substr(start, i - start)), loc));
            start = i + 1;
        } else if (value[i] == '"') {
            in_quotes = !in_quotes;
        }
    }
    if (in_quotes) {
        fail(loc, "unterminated string in array");
    }
    return items;
}

Expr parse_expr_value(const std::string& text, const Location& loc, const char* key) {
    try {
        return Expr::parse(text);
    } catch (const Error& e) {
        fail(loc, std::string(key) + ": " + e.what());
    }
}

std::vector<std::optional<double>> parse_boundary(std::string_view value, const Location& loc) {
    std::vector<std::optional<double>> out;
    for (const std::string& item : parse_array(value, loc)) {
        if (item == "free") {
            out.push_back(std::nullopt);
        } else {
            out.push_back(parse_double(item, loc));
        }
    }
    return out;
}

struct ProblemStaging {
    std::optional<std::size_t> n;
    std::optional<std::size_t> m;
    std::optional<Sense> sense;
    std::optional<std::string> lagrangian;
    std::optional<std::vector<std::string>> dynamics;
    std::optional<std::string> scale;
    std::vector<std::optional<double>> x_a;
    std::vector<std::optional<double>> x_b;

    Location loc_lagrangian;
    Location loc_dynamics;
    Location loc_scale;
};

struct FamilyStaging {
    bool present = false;
    Location loc_block;
    std::optional<FamilyKind> kind;
    std::optional<std::vector<std::string>> h_x;
    std::optional<std::string> h_t;
    std::optional<std::string> gauge;
    std::optional<std::vector<std::string>> u_s;
    double s_max = 0.1;
    std::size_t s_points = 11;

    Location loc_h_x;
    Location loc_h_t;
    Location loc_gauge;
    Location loc_u_s;
};

} // namespace

ProblemFileContents parse_problem_text(std::string_view text, std::string_view source_name,
                                       std::optional<std::string_view> scale_override) {
    ProblemStaging prob;
    FamilyStaging fam;
    SweepOptions solver;
    std::optional<std::vector<double>> p_b;
    bool shooting = false;

    enum class Section { Top, Transformation, Solver };
    Section section = Section::Top;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view raw = nl == std::string_view::npos ? text.substr(pos)
                                                            : text.substr(pos, nl - pos);
        ++line_no;
        const Location loc{source_name, line_no};
        const std::string_view line = trim(strip_comment(raw));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty()) {
            continue;
        }

        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(loc, "unterminated section header");
            }
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (name == "transformation") {
                section = Section::Transformation;
                fam.present = true;
                fam.loc_block = loc;
            } else if (name == "solver") {
                section = Section::Solver;
            } else {
                fail(loc, "unknown section [" + std::string(name) + "]");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(loc, "expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) {
            fail(loc, "missing key before '='");
        }
        if (value.empty()) {
            fail(loc, "missing value for '" + std::string(key) + "'");
        }

        switch (section) {
        case Section::Top:
            if (key == "n") {
                prob.n = parse_count(value, loc);
            } else if (key == "m") {
                prob.m = parse_count(value, loc);
            } else if (key == "sense") {
                const std::string s = unquote(value, loc);
                if (s == "min") {
                    prob.sense = Sense::Minimize;
                } else if (s == "max") {
                    prob.sense = Sense::Maximize;
                } else {
                    fail(loc, "sense must be min or max, got '" + s + "'");
                }
            } else if (key == "lagrangian") {
                prob.lagrangian = unquote(value, loc);
                prob.loc_lagrangian = loc;
            } else if (key == "dynamics") {
                prob.dynamics = parse_array(value, loc);
                prob.loc_dynamics = loc;
            } else if (key == "scale") {
                prob.scale = unquote(value, loc);
                prob.loc_scale = loc;
            } else if (key == "x_a") {
                prob.x_a = parse_boundary(value, loc);
            } else if (key == "x_b") {
                prob.x_b = parse_boundary(value, loc);
            } else {
                fail(loc, "unknown key '" + std::string(key) + "'");
            }
            break;

        case Section::Transformation:
            if (key == "kind") {
                const std::string s = unquote(value, loc);
                if (s == "state_only") {
                    fam.kind = FamilyKind::StateOnly;
                } else if (s == "time_and_state") {
                    fam.kind = FamilyKind::TimeAndState;
                } else {
                    fail(loc, "kind must be state_only or time_and_state, got '" + s + "'");
                }
            } else if (key == "h_x") {
                fam.h_x = parse_array(value, loc);
                fam.loc_h_x = loc;
            } else if (key == "h_t") {
                fam.h_t = unquote(value, loc);
                fam.loc_h_t = loc;
            } else if (key == "gauge") {
                fam.gauge = unquote(value, loc);
                fam.loc_gauge = loc;
            } else if (key == "u_s") {
                fam.u_s = parse_array(value, loc);
                fam.loc_u_s = loc;
            } else if (key == "s_max") {
                fam.s_max = parse_double(value, loc);
            } else if (key == "s_points") {
                fam.s_points = parse_count(value, loc);
            } else {
                fail(loc, "unknown key '" + std::string(key) + "' in [transformation]");
            }
            break;

        case Section::Solver:
            if (key == "theta") {
                solver.theta = parse_double(value, loc);
                if (!(solver.theta > 0.0) || solver.theta > 1.0) {
                    fail(loc, "theta must lie in (0, 1]");
                }
            } else if (key == "max_iters") {
                solver.max_iters = parse_count(value, loc);
            } else if (key == "tol_u") {
                solver.tol_u = parse_double(value, loc);
            } else if (key == "tol_shoot") {
                solver.tol_shoot = parse_double(value, loc);
            } else if (key == "p_b") {
                std::vector<double> entries;
                for (const std::string& item : parse_array(value, loc)) {
                    entries.push_back(parse_double(item, loc));
                }
                p_b = std::move(entries);
            } else if (key == "shooting") {
                shooting = parse_bool(value, loc);
            } else {
                fail(loc, "unknown key '" + std::string(key) + "' in [solver]");
            }
            break;
        }
    }

    const Location eof{source_name, line_no};
    if (!prob.n) {
        fail(eof, "missing required key 'n'");
    }
    if (!prob.m) {
        fail(eof, "missing required key 'm'");
    }
    if (!prob.sense) {
        fail(eof, "missing required key 'sense'");
    }
    if (!prob.lagrangian) {
        fail(eof, "missing required key 'lagrangian'");
    }
    if (!prob.dynamics) {
        fail(eof, "missing required key 'dynamics'");
    }
    if (!prob.scale && !scale_override) {
        fail(eof, "missing required key 'scale'");
    }

    const std::string scale_text =
        scale_override ? std::string(*scale_override) : *prob.scale;
    TimeScale scale = [&] {
        try {
            return parse_scale_spec(scale_text);
        } catch (const Error& e) {
            const Location loc = scale_override ? eof : prob.loc_scale;
            fail(loc, "scale: " + std::string(e.what()));
        }
    }();

    std::vector<Expr> dynamics;
    dynamics.reserve(prob.dynamics->size());
    for (const std::string& eq : *prob.dynamics) {
        dynamics.push_back(parse_expr_value(eq, prob.loc_dynamics, "dynamics"));
    }

    ControlProblem problem = [&] {
        try {
            return ControlProblem(
                *prob.n, *prob.m, *prob.sense,
                parse_expr_value(*prob.lagrangian, prob.loc_lagrangian, "lagrangian"),
                std::move(dynamics), make_scale_ptr(std::move(scale)), std::move(prob.x_a),
                std::move(prob.x_b));
        } catch (const Error& e) {
            fail(eof, e.what());
        }
    }();

    std::optional<TransformationFamily> family;
    if (fam.present) {
        if (!fam.kind) {
            fail(fam.loc_block, "[transformation] needs a 'kind'");
        }
        if (!fam.h_x) {
            fail(fam.loc_block, "[transformation] needs 'h_x'");
        }
        if (!fam.u_s) {
            fail(fam.loc_block, "[transformation] needs 'u_s'");
        }
        TransformationFamily f;
        f.kind = *fam.kind;
        for (const std::string& e : *fam.h_x) {
            f.h_x.push_back(parse_expr_value(e, fam.loc_h_x, "h_x"));
        }
        if (fam.h_t) {
            f.h_t = parse_expr_value(*fam.h_t, fam.loc_h_t, "h_t");
        }
        if (fam.gauge) {
            f.gauge = parse_expr_value(*fam.gauge, fam.loc_gauge, "gauge");
        }
        for (const std::string& e : *fam.u_s) {
            f.u_s.push_back(parse_expr_value(e, fam.loc_u_s, "u_s"));
        }
        f.s_max = fam.s_max;
        f.s_points = fam.s_points;
        family = std::move(f);
    }

    return {std::move(problem), std::move(family), solver, std::move(p_b), shooting};
}

ProblemFileContents load_problem_file(const std::string& path,
                                      std::optional<std::string_view> scale_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open problem file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_problem_text(buffer.str(), path, scale_override);
}

namespace {

std::string scale_spec_of(const TimeScale& ts) {
    const std::size_t N = ts.size();
    // Prefer the compact specs when they rebuild the exact same points.
    const double h = (ts.b() - ts.a()) / static_cast<double>(N - 1);
    bool is_uniform = true;
    for (std::size_t i = 0; i + 1 < N && is_uniform; ++i) {
        is_uniform = ts.point(i) == ts.a() + static_cast<double>(i) * h;
    }
    if (is_uniform) {
        return "uniform:" + format_double17(ts.a()) + "," + format_double17(ts.b()) + "," +
               format_double17(h);
    }
    if (ts.a() > 0.0) {
        const double q = ts.point(1) / ts.point(0);
        if (q > 1.0) {
            const double n0 = std::round(std::log(ts.a()) / std::log(q));
            bool is_geometric = std::abs(n0) < 1e6;
            for (std::size_t i = 0; i < N && is_geometric; ++i) {
                is_geometric = ts.point(i) == std::pow(q, n0 + static_cast<double>(i));
            }
            if (is_geometric) {
                const auto n_min = static_cast<long long>(n0);
                return "qscale:" + format_double17(q) + "," + std::to_string(n_min) + "," +
                       std::to_string(n_min + static_cast<long long>(N) - 1);
            }
        }
    }
    std::string out = "explicit:";
    for (std::size_t i = 0; i < N; ++i) {
        if (i > 0) {
            out += ',';
        }
        out += format_double17(ts.point(i));
    }
    return out;
}

void append_boundary(std::string& out, const char* key,
                     const std::vector<std::optional<double>>& data) {
    if (data.empty()) {
        return;
    }
    out += key;
    out += " = [";
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += data[i] ? format_double17(*data[i]) : std::string("free");
    }
    out += "]\n";
}

void append_expr_array(std::string& out, const char* key, const std::vector<Expr>& exprs) {
    out += key;
    out += " = [";
    for (std::size_t i = 0; i < exprs.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += '"';
        out += exprs[i].to_string();
        out += '"';
    }
    out += "]\n";
}

} // namespace

std::string dump_problem_text(const ProblemFileContents& contents) {
    const ControlProblem& prob = contents.problem;
    std::string out;
    out += "n = " + std::to_string(prob.n()) + "\n";
    out += "m = " + std::to_string(prob.m()) + "\n";
    out += std::string("sense = ") + (prob.sense() == Sense::Maximize ? "max" : "min") + "\n";
    out += "lagrangian = \"" + prob.lagrangian().to_string() + "\"\n";
    append_expr_array(out, "dynamics", prob.dynamics());
    out += "scale = \"" + scale_spec_of(prob.scale()) + "\"\n";
    append_boundary(out, "x_a", prob.x_a());
    append_boundary(out, "x_b", prob.x_b());

    if (contents.family) {
        const TransformationFamily& fam = *contents.family;
        out += "\n[transformation]\n";
        out += std::string("kind = ") +
               (fam.kind == FamilyKind::TimeAndState ? "time_and_state" : "state_only") + "\n";
        if (fam.h_t) {
            out += "h_t = \"" + fam.h_t->to_string() + "\"\n";
        }
        append_expr_array(out, "h_x", fam.h_x);
        if (fam.gauge) {
            out += "gauge = \"" + fam.gauge->to_string() + "\"\n";
        }
        append_expr_array(out, "u_s", fam.u_s);
        out += "s_max = " + format_double17(fam.s_max) + "\n";
        out += "s_points = " + std::to_string(fam.s_points) + "\n";
    }

    out += "\n[solver]\n";
    out += "theta = " + format_double17(contents.solver.theta) + "\n";
    out += "max_iters = " + std::to_string(contents.solver.max_iters) + "\n";
    out += "tol_u = " + format_double17(contents.solver.tol_u) + "\n";
    out += "tol_shoot = " + format_double17(contents.solver.tol_shoot) + "\n";
    if (contents.p_b) {
        out += "p_b = [";
        for (std::size_t i = 0; i < contents.p_b->size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += format_double17((*contents.p_b)[i]);
        }
        out += "]\n";
    }
    out += std::string("shooting = ") + (contents.shooting ? "true" : "false") + "\n";
    return out;
}

} // namespace tsoc
