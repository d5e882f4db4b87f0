#pragma once

#include "tsoc/errors.hpp"

#include <cmath>

namespace tsoc {

/// First-order dual number a + eps*a' with eps^2 = 0. Evaluating an
/// expression on duals yields the value and an exact directional derivative
/// in one pass; this is what feeds the adjoint, stationarity, and generator
/// computations, where differencing noise would contaminate the conservation
/// tolerances.
struct Dual {
    double v = 0.0; // primal value
    double d = 0.0; // tangent

    constexpr Dual() = default;
    constexpr Dual(double value, double tangent = 0.0) : v(value), d(tangent) {}

    static constexpr Dual variable(double value) { return Dual(value, 1.0); }
    static constexpr Dual constant(double value) { return Dual(value, 0.0); }
};

constexpr Dual operator-(Dual a) { return {-a.v, -a.d}; }
constexpr Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
constexpr Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

inline Dual operator/(Dual a, Dual b) {
    if (b.v == 0.0) {
        throw DomainError("division by zero");
    }
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, e * a.d};
}

inline Dual log(Dual a) {
    if (a.v <= 0.0) {
        throw DomainError("log of non-positive value");
    }
    return {std::log(a.v), a.d / a.v};
}

inline Dual sqrt(Dual a) {
    if (a.v < 0.0) {
        throw DomainError("sqrt of negative value");
    }
    if (a.v == 0.0 && a.d != 0.0) {
        throw DomainError("sqrt not differentiable at zero");
    }
    const double r = std::sqrt(a.v);
    return {r, a.v == 0.0 ? 0.0 : a.d / (2.0 * r)};
}

inline Dual abs(Dual a) {
    // Subgradient 0 at the kink.
    const double s = a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0);
    return {std::abs(a.v), s * a.d};
}

/// a^b. Integer constant exponents are valid for any base (so u^2 works for
/// negative controls); otherwise a negative base or 0^negative fails loudly
/// instead of producing NaN.
inline Dual pow(Dual a, Dual b) {
    const bool integer_exponent = b.d == 0.0 && std::rint(b.v) == b.v &&
                                  std::abs(b.v) < 1e15;
    if (a.v == 0.0) {
        if (b.v < 0.0) {
            throw DomainError("0 raised to a negative power");
        }
        if (b.v == 0.0) {
            return {1.0, 0.0};
        }
        // d/da a^b at a=0: b*a^(b-1)*a' -> 0 for b > 1, a' for b = 1,
        // unbounded for 0 < b < 1 (treat as 0 only when the tangent is 0).
        if (b.v >= 1.0 || a.d == 0.0) {
            const double slope = b.v == 1.0 ? a.d : 0.0;
            return {0.0, slope};
        }
        throw DomainError("0 raised to a fractional power is not differentiable");
    }
    if (a.v < 0.0 && !integer_exponent) {
        throw DomainError("negative base with non-integer exponent");
    }
    const double value = std::pow(a.v, b.v);
    double tangent = 0.0;
    if (a.d != 0.0) {
        tangent += b.v * std::pow(a.v, b.v - 1.0) * a.d;
    }
    if (b.d != 0.0) {
        if (a.v < 0.0) {
            throw DomainError("negative base with varying exponent");
        }
        tangent += value * std::log(a.v) * b.d;
    }
    return {value, tangent};
}

} // namespace tsoc
