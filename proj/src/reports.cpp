#include "tsoc/reports.hpp"

#include "tsoc/errors.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

namespace tsoc {

std::string format_double17(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

void append_header(std::string& out, char prefix, std::size_t dim) {
    for (std::size_t k = 1; k <= dim; ++k) {
        out += ',';
        out += prefix;
        out += std::to_string(k);
    }
}

double parse_field(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw Error("trajectory line " + std::to_string(line_no) + ": '" +
                    std::string(field) + "' is not a number");
    }
    return value;
}

std::vector<std::string_view> split_csv_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
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

} // namespace

std::string grid_csv(const GridFunction& g) {
    std::string out = "t";
    append_header(out, 'v', g.dim());
    out += '\n';
    for (std::size_t i = 0; i < g.size(); ++i) {
        out += format_double17(g.scale().point(i));
        for (std::size_t k = 0; k < g.dim(); ++k) {
            out += ',';
            out += format_double17(g(i, k));
        }
        out += '\n';
    }
    return out;
}

std::string extremal_csv(const Extremal& ext) {
    const std::size_t n = ext.x.dim();
    const std::size_t m = ext.u.dim();
    std::string out = "# lambda=" + format_double17(ext.lambda) + "\n";
    out += 't';
    append_header(out, 'x', n);
    append_header(out, 'u', m);
    append_header(out, 'p', n);
    out += '\n';
    const std::size_t size = ext.x.size();
    for (std::size_t i = 0; i < size; ++i) {
        out += format_double17(ext.x.scale().point(i));
        for (std::size_t k = 0; k < n; ++k) {
            out += ',';
            out += format_double17(ext.x(i, k));
        }
        for (std::size_t j = 0; j < m; ++j) {
            out += ',';
            if (i < ext.u.size()) {
                out += format_double17(ext.u(i, j));
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            out += ',';
            out += format_double17(ext.p(i, k));
        }
        out += '\n';
    }
    return out;
}

Extremal parse_extremal_csv(std::string_view text, const ControlProblem& prob) {
    const std::size_t n = prob.n();
    const std::size_t m = prob.m();
    const TimeScale& ts = prob.scale();
    const std::size_t size = ts.size();

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::string_view line =
            trim(nl == std::string_view::npos ? text.substr(start)
                                              : text.substr(start, nl - start));
        if (!line.empty()) {
            lines.push_back(line);
        }
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    if (lines.size() < 2) {
        throw Error("trajectory file is empty");
    }

    std::size_t row = 0;
    double lambda = 1.0;
    if (lines[0].rfind("# lambda=", 0) == 0) {
        lambda = parse_field(trim(lines[0].substr(9)), 1);
        row = 1;
    } else {
        throw Error("trajectory file must start with a '# lambda=' line");
    }

    std::string expected_header = "t";
    {
        std::string tmp;
        append_header(tmp, 'x', n);
        append_header(tmp, 'u', m);
        append_header(tmp, 'p', n);
        expected_header += tmp;
    }
    if (lines[row] != expected_header) {
        throw Error("trajectory header is '" + std::string(lines[row]) + "', expected '" +
                    expected_header + "'");
    }
    ++row;

    if (lines.size() - row != size) {
        throw Error("trajectory has " + std::to_string(lines.size() - row) +
                    " rows, the scale has " + std::to_string(size) + " points");
    }

    GridFunction x(prob.scale_ptr(), n);
    GridFunction p(prob.scale_ptr(), n);
    std::vector<double> u_flat;
    u_flat.reserve(size * m);
    bool u_has_final_row = true;

    for (std::size_t i = 0; i < size; ++i) {
        const std::size_t line_no = row + i + 1;
        const auto fields = split_csv_row(lines[row + i]);
        if (fields.size() != 1 + n + m + n) {
            throw Error("trajectory line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(1 + n + m + n));
        }
        const double t = parse_field(trim(fields[0]), line_no);
        if (std::abs(t - ts.point(i)) > 1e-9 * std::max(1.0, std::abs(ts.point(i)))) {
            throw Error("trajectory line " + std::to_string(line_no) + ": time " +
                        format_double17(t) + " does not match the scale point " +
                        format_double17(ts.point(i)));
        }
        for (std::size_t k = 0; k < n; ++k) {
            x(i, k) = parse_field(trim(fields[1 + k]), line_no);
            p(i, k) = parse_field(trim(fields[1 + n + m + k]), line_no);
        }
        std::size_t empty_controls = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto field = trim(fields[1 + n + j]);
            if (field.empty()) {
                ++empty_controls;
            } else if (empty_controls == 0) {
                u_flat.push_back(parse_field(field, line_no));
            }
        }
        if (empty_controls != 0) {
            if (empty_controls != m || i + 1 != size) {
                throw Error("trajectory line " + std::to_string(line_no) +
                            ": control fields may only be empty, all together, in the "
                            "final row");
            }
            u_has_final_row = false;
        }
    }

    const TimeScalePtr u_scale =
        u_has_final_row ? prob.scale_ptr() : make_scale_ptr(ts.kappa());
    GridFunction u(u_scale, m, std::move(u_flat));
    return Extremal(std::move(x), std::move(u), std::move(p), lambda);
}

namespace {

const char* bool_text(bool b) { return b ? "true" : "false"; }

} // namespace

std::string extremal_report_json(const ExtremalReport& rep) {
    std::string out = "{\"schema\": 1";
    out += ", \"adjoint_residual\": " + format_double17(rep.adjoint_residual);
    out += ", \"stationarity_residual\": " + format_double17(rep.stationarity_residual);
    out += ", \"admissibility_residual\": " + format_double17(rep.admissibility_residual);
    out += ", \"nontrivial\": ";
    out += bool_text(rep.nontrivial);
    out += "}\n";
    return out;
}

std::string extremal_report_csv(const ExtremalReport& rep) {
    std::string out = "adjoint_residual,stationarity_residual,admissibility_residual,nontrivial\n";
    out += format_double17(rep.adjoint_residual);
    out += ',';
    out += format_double17(rep.stationarity_residual);
    out += ',';
    out += format_double17(rep.admissibility_residual);
    out += ',';
    out += bool_text(rep.nontrivial);
    out += '\n';
    return out;
}

std::string conservation_json(const ConservationReport& rep) {
    std::string out = "{\"schema\": 1, \"C\": [";
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += '[';
        out += format_double17(rep.values.scale().point(i));
        out += ", ";
        out += format_double17(rep.values(i, 0));
        out += ']';
    }
    out += "], \"max_deviation\": " + format_double17(rep.max_deviation);
    out += ", \"passed\": ";
    out += bool_text(rep.passed);
    out += "}\n";
    return out;
}

std::string conservation_csv(const ConservationReport& rep) {
    std::string out = "t,C\n";
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        out += format_double17(rep.values.scale().point(i));
        out += ',';
        out += format_double17(rep.values(i, 0));
        out += '\n';
    }
    return out;
}

} // namespace tsoc
