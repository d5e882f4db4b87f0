#pragma once

#include "tsoc/grid_function.hpp"

#include <vector>

namespace tsoc {

/// Delta derivative on T^kappa. Every point of a finite scale is
/// right-scattered, so f^Delta(t) = (f(sigma(t)) - f(t)) / mu(t) is the exact
/// derivative, not an approximation.
GridFunction delta_derivative(const GridFunction& f);

/// f^sigma = f o sigma, defined on T^kappa.
GridFunction sigma_shift(const GridFunction& f);

/// Exact delta integral over [c, d): sum of mu(t) * f(t) for scale points
/// t in [c, d). Both c and d must be scale points with c <= d; c = d gives 0.
std::vector<double> delta_integral(const GridFunction& f, double c, double d);

inline double delta_integral_scalar(const GridFunction& f, double c, double d) {
    return delta_integral(f, c, d)[0];
}

} // namespace tsoc
