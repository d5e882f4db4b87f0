#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace tsoc {

/// A compact time scale [a,b] represented by a finite, strictly increasing
/// set of points. Dense segments are approximated by fine uniform sampling;
/// results for T = R are recovered in the h -> 0 limit.
///
/// Boundary conventions: sigma(b) = b and rho(a) = a, so mu(b) = 0.
/// Immutable after construction; safe for concurrent reads.
class TimeScale {
public:
    /// {a, a+h, ..., b}. Requires (b-a)/h integral to relative 1e-9.
    static TimeScale uniform(double a, double b, double h);

    /// {q^n : n_min <= n <= n_max} with q > 1.
    static TimeScale qscale(double q, int n_min, int n_max);

    /// Any finite point set: sorted, deduplicated (absolute tolerance 1e-12).
    static TimeScale explicit_points(std::vector<double> points);

    std::size_t size() const { return points_.size(); }
    const std::vector<double>& points() const { return points_; }
    double point(std::size_t i) const { return points_[i]; }
    double a() const { return points_.front(); }
    double b() const { return points_.back(); }

    /// Index of the scale point equal to t (tolerance 1e-9 * max(1, |t|)).
    std::size_t index_of(double t) const;
    std::optional<std::size_t> find(double t) const noexcept;
    bool contains(double t) const noexcept { return find(t).has_value(); }

    // Jump operators and graininess by index.
    std::size_t sigma_index(std::size_t i) const { return i + 1 < size() ? i + 1 : i; }
    std::size_t rho_index(std::size_t i) const { return i > 0 ? i - 1 : 0; }
    double mu_at(std::size_t i) const { return points_[sigma_index(i)] - points_[i]; }

    // Jump operators and graininess by value.
    double sigma(double t) const { return points_[sigma_index(index_of(t))]; }
    double rho(double t) const { return points_[rho_index(index_of(t))]; }
    double mu(double t) const { return mu_at(index_of(t)); }

    /// T^kappa = T \ (rho(b), b]; for a finite scale this drops b.
    /// Throws TooFewPoints if nothing would remain.
    TimeScale kappa() const;

    /// True iff rho(sigma(t)) = t for every t in [a, rho(b)]. Holds for every
    /// finite scale; exposed because the -H^rho conservation law requires it.
    bool rho_sigma_identity() const;

    bool operator==(const TimeScale& other) const { return points_ == other.points_; }

private:
    explicit TimeScale(std::vector<double> points);

    std::vector<double> points_;
};

/// Parse "uniform:a,b,h", "qscale:q,nmin,nmax", or "explicit:p1,p2,...".
TimeScale parse_scale_spec(std::string_view spec);

/// Shared-ownership helpers; GridFunction holds scales through shared_ptr.
using TimeScalePtr = std::shared_ptr<const TimeScale>;

inline TimeScalePtr make_scale_ptr(TimeScale ts) {
    return std::make_shared<const TimeScale>(std::move(ts));
}

} // namespace tsoc
