#include "tsoc/calculus.hpp"

#include "tsoc/errors.hpp"

namespace tsoc {

GridFunction delta_derivative(const GridFunction& f) {
    const TimeScale& ts = f.scale();
    auto kappa = make_scale_ptr(ts.kappa());
    GridFunction df(kappa, f.dim());
    for (std::size_t i = 0; i < df.size(); ++i) {
        const double mu = ts.mu_at(i);
        if (mu <= 0.0) {
            throw ZeroGraininess("zero graininess at an interior point");
        }
        auto out = df.at(i);
        auto lo = f.at(i);
        auto hi = f.at(i + 1);
        for (std::size_t k = 0; k < f.dim(); ++k) {
            out[k] = (hi[k] - lo[k]) / mu;
        }
    }
    return df;
}

GridFunction sigma_shift(const GridFunction& f) {
    auto kappa = make_scale_ptr(f.scale().kappa());
    GridFunction g(kappa, f.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto out = g.at(i);
        auto src = f.at(i + 1);
        for (std::size_t k = 0; k < f.dim(); ++k) {
            out[k] = src[k];
        }
    }
    return g;
}

std::vector<double> delta_integral(const GridFunction& f, double c, double d) {
    const TimeScale& ts = f.scale();
    const std::size_t ic = ts.index_of(c);
    const std::size_t id = ts.index_of(d);
    if (ic > id) {
        throw Error("delta_integral requires c <= d");
    }
    std::vector<double> acc(f.dim(), 0.0);
    for (std::size_t i = ic; i < id; ++i) {
        const double mu = ts.mu_at(i);
        auto row = f.at(i);
        for (std::size_t k = 0; k < f.dim(); ++k) {
            acc[k] += mu * row[k];
        }
    }
    return acc;
}

} // namespace tsoc
