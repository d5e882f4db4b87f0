#include "tsoc/grid_function.hpp"

#include "tsoc/errors.hpp"

#include <cmath>

namespace tsoc {

GridFunction::GridFunction(TimeScalePtr scale, std::size_t dim)
    : scale_(std::move(scale)), dim_(dim), values_(scale_->size() * dim, 0.0) {
    if (dim_ < 1) {
        throw DimensionMismatch("GridFunction dimension must be >= 1");
    }
}

GridFunction::GridFunction(TimeScalePtr scale, std::size_t dim, std::vector<double> values)
    : scale_(std::move(scale)), dim_(dim), values_(std::move(values)) {
    if (dim_ < 1) {
        throw DimensionMismatch("GridFunction dimension must be >= 1");
    }
    if (values_.size() != scale_->size() * dim_) {
        throw DimensionMismatch("GridFunction values length does not match scale size * dim");
    }
}

GridFunction GridFunction::sample_scalar(TimeScalePtr scale,
                                         const std::function<double(double)>& f) {
    std::vector<double> values;
    values.reserve(scale->size());
    for (double t : scale->points()) {
        values.push_back(f(t));
    }
    return GridFunction(std::move(scale), 1, std::move(values));
}

GridFunction GridFunction::sample(TimeScalePtr scale, std::size_t dim,
                                  const std::function<void(double, std::span<double>)>& f) {
    GridFunction g(std::move(scale), dim);
    for (std::size_t i = 0; i < g.size(); ++i) {
        f(g.scale().point(i), g.at(i));
    }
    return g;
}

GridFunction GridFunction::constant(TimeScalePtr scale, std::span<const double> value) {
    GridFunction g(std::move(scale), value.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto row = g.at(i);
        for (std::size_t k = 0; k < value.size(); ++k) {
            row[k] = value[k];
        }
    }
    return g;
}

GridFunction GridFunction::constant_scalar(TimeScalePtr scale, double value) {
    return constant(std::move(scale), std::span<const double>(&value, 1));
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

} // namespace tsoc
