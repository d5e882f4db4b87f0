#pragma once

#include "tsoc/extremal.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/noether.hpp"
#include "tsoc/ocp.hpp"

#include <string>
#include <string_view>

namespace tsoc {

/// Shortest-exact decimal form (up to 17 significant digits); the same
/// input always yields the same bytes, which is what makes reports
/// reproducible run over run.
std::string format_double17(double v);

/// CSV with header t,v1,...,vd and one row per scale point.
std::string grid_csv(const GridFunction& g);

/// Extremal as CSV: a "# lambda=..." comment line, a t,x*,u*,p* header and
/// one row per scale point. The control columns are empty in the final row
/// (u lives on [a,rho(b)]).
std::string extremal_csv(const Extremal& ext);

/// Inverse of extremal_csv against a problem's scale and dimensions. Accepts
/// control samples on [a,rho(b)] (empty trailing fields) or the full scale.
Extremal parse_extremal_csv(std::string_view text, const ControlProblem& prob);

std::string extremal_report_json(const ExtremalReport& rep);
std::string extremal_report_csv(const ExtremalReport& rep);

/// {"schema": 1, "C": [[t, value], ...], "max_deviation": r, "passed": b}
std::string conservation_json(const ConservationReport& rep);

/// Two columns: t,C.
std::string conservation_csv(const ConservationReport& rep);

} // namespace tsoc
