#pragma once

#include "tsoc/dual.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsoc {

/// Environment for the map-based evaluation API.
using Env = std::map<std::string, double, std::less<>>;

/// Parsed arithmetic expression over named variables.
///
/// Grammar: decimal literals, identifiers, binary + - * / ^ (with ^
/// right-associative and binding tighter than unary minus), unary minus,
/// parentheses, and calls sin, cos, exp, log, sqrt, abs.
///
/// Immutable after parse; evaluation is reentrant and thread-safe.
class Expr {
public:
    /// Throws SyntaxError (with byte offset) or UnknownFunction.
    static Expr parse(std::string_view text);

    /// Number literal convenience (used for defaulted fields like a zero gauge).
    static Expr number(double value);

    double eval(const Env& env) const;

    /// Exact partial derivative d(expr)/d(wrt) at env, via dual arithmetic.
    double partial(std::string_view wrt, const Env& env) const;

    /// Canonical text form; parse(to_string()) reproduces the same string.
    std::string to_string() const;

    /// Unique variable names, sorted.
    const std::vector<std::string>& variables() const;

    bool references(std::string_view name) const;

    /// Resolve every variable against a slot layout. Bare `x`/`u` alias to
    /// `x1`/`u1` when the layout carries the indexed names. Throws
    /// UnknownVariable for anything unresolved.
    class Bound;
    Bound bind(std::span<const std::string> slot_names) const;

    struct Arena; // parse tree storage, defined in expr.cpp

private:
    std::shared_ptr<const Arena> arena_;

    explicit Expr(std::shared_ptr<const Arena> arena) : arena_(std::move(arena)) {}
};

/// Slot-resolved expression for tight evaluation loops: callers keep a flat
/// value buffer laid out like the slot list passed to bind().
class Expr::Bound {
public:
    double eval(std::span<const double> slots) const;
    Dual eval_dual(std::span<const Dual> slots) const;

    /// Derivative with respect to one slot at a point given by plain values.
    double partial(std::size_t slot, std::span<const double> slots) const;

private:
    friend class Expr;
    std::shared_ptr<const Arena> arena_;
    std::vector<std::size_t> slot_of_var_;

    Bound(std::shared_ptr<const Arena> arena, std::vector<std::size_t> slots)
        : arena_(std::move(arena)), slot_of_var_(std::move(slots)) {}
};

} // namespace tsoc
