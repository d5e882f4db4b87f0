#pragma once

#include "tsoc/timescale.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tsoc {

/// Vector-valued samples of a function on a TimeScale, one d-vector per
/// scale point. Values are stored row-major: sample i occupies
/// [i*dim, (i+1)*dim).
class GridFunction {
public:
    /// All-zero samples.
    GridFunction(TimeScalePtr scale, std::size_t dim);

    /// Takes ownership of flat row-major values; length must equal
    /// scale.size() * dim.
    GridFunction(TimeScalePtr scale, std::size_t dim, std::vector<double> values);

    /// Sample a scalar callable t -> double (dim 1).
    static GridFunction sample_scalar(TimeScalePtr scale,
                                      const std::function<double(double)>& f);

    /// Sample a vector callable (t, out) filling a d-vector per point.
    static GridFunction sample(TimeScalePtr scale, std::size_t dim,
                               const std::function<void(double, std::span<double>)>& f);

    /// Constant d-vector at every point.
    static GridFunction constant(TimeScalePtr scale, std::span<const double> value);
    static GridFunction constant_scalar(TimeScalePtr scale, double value);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return scale_->size(); }
    const TimeScale& scale() const { return *scale_; }
    const TimeScalePtr& scale_ptr() const { return scale_; }

    double operator()(std::size_t i, std::size_t k) const { return values_[i * dim_ + k]; }
    double& operator()(std::size_t i, std::size_t k) { return values_[i * dim_ + k]; }

    std::span<const double> at(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<double> at(std::size_t i) {
        return {values_.data() + i * dim_, dim_};
    }

    /// Sample at a scale point given by value; throws PointNotInScale.
    std::span<const double> at_time(double t) const { return at(scale_->index_of(t)); }

    const std::vector<double>& values() const { return values_; }

    /// Max over points of the max-norm of the sample vector.
    double max_abs() const;

private:
    TimeScalePtr scale_;
    std::size_t dim_;
    std::vector<double> values_;
};

} // namespace tsoc
