#include "tsoc/timescale.hpp"

#include "tsoc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace tsoc {

namespace {

constexpr double kDedupTolerance = 1e-12;

double lookup_tolerance(double t) {
    return 1e-9 * std::max(1.0, std::abs(t));
}

} // namespace

TimeScale::TimeScale(std::vector<double> points) : points_(std::move(points)) {
    for (double p : points_) {
        if (!std::isfinite(p)) {
            throw NonFinite("time scale point is not finite");
        }
    }
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (!(points_[i] < points_[i + 1])) {
            throw Error("time scale points must be strictly increasing");
        }
    }
}

TimeScale TimeScale::uniform(double a, double b, double h) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(h)) {
        throw NonFinite("uniform scale parameters must be finite");
    }
    if (!(b > a)) {
        throw Error("uniform scale requires b > a");
    }
    if (!(h > 0)) {
        throw Error("uniform scale requires h > 0");
    }
    const double ratio = (b - a) / h;
    const double rounded = std::round(ratio);
    if (std::abs(rounded - ratio) > 1e-9 * ratio || rounded < 1) {
        throw NonDivisibleInterval("(b - a) is not an integer multiple of h");
    }
    const auto n = static_cast<std::size_t>(rounded);
    std::vector<double> pts(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        pts[i] = a + static_cast<double>(i) * h;
    }
    pts[n] = b;
    return TimeScale(std::move(pts));
}

TimeScale TimeScale::qscale(double q, int n_min, int n_max) {
    if (!(q > 1.0)) {
        throw InvalidBase("qscale requires q > 1");
    }
    if (n_max <= n_min) {
        throw Error("qscale requires n_max > n_min");
    }
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(n_max - n_min) + 1);
    for (int n = n_min; n <= n_max; ++n) {
        pts.push_back(std::pow(q, n));
    }
    return TimeScale(std::move(pts));
}

TimeScale TimeScale::explicit_points(std::vector<double> points) {
    for (double p : points) {
        if (!std::isfinite(p)) {
            throw NonFinite("explicit scale contains a non-finite value");
        }
    }
    std::sort(points.begin(), points.end());
    std::vector<double> unique;
    unique.reserve(points.size());
    for (double p : points) {
        if (unique.empty() || p - unique.back() > kDedupTolerance) {
            unique.push_back(p);
        }
    }
    if (unique.size() < 2) {
        throw TooFewPoints("time scale needs at least 2 distinct points");
    }
    return TimeScale(std::move(unique));
}

std::optional<std::size_t> TimeScale::find(double t) const noexcept {
    auto it = std::lower_bound(points_.begin(), points_.end(), t);
    const double tol = lookup_tolerance(t);
    if (it != points_.end() && std::abs(*it - t) <= tol) {
        return static_cast<std::size_t>(it - points_.begin());
    }
    if (it != points_.begin() && std::abs(*(it - 1) - t) <= tol) {
        return static_cast<std::size_t>(it - points_.begin()) - 1;
    }
    return std::nullopt;
}

std::size_t TimeScale::index_of(double t) const {
    if (auto i = find(t)) {
        return *i;
    }
    throw PointNotInScale("t = " + std::to_string(t) + " is not a scale point");
}

TimeScale TimeScale::kappa() const {
    if (points_.size() < 2) {
        throw TooFewPoints("kappa restriction would leave an empty scale");
    }
    return TimeScale(std::vector<double>(points_.begin(), points_.end() - 1));
}

bool TimeScale::rho_sigma_identity() const {
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (rho_index(sigma_index(i)) != i) {
            return false;
        }
    }
    return true;
}

namespace {

std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string_view field = text.substr(pos, comma == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : comma - pos);
        double value = 0.0;
        auto* first = field.data();
        auto* last = field.data() + field.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last || field.empty()) {
            throw Error("invalid " + std::string(what) + " in scale spec: '" +
                        std::string(field) + "'");
        }
        out.push_back(value);
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

} // namespace

TimeScale parse_scale_spec(std::string_view spec) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw Error("scale spec must look like 'uniform:a,b,h', 'qscale:q,nmin,nmax' "
                    "or 'explicit:p1,p2,...'");
    }
    const std::string_view kind = spec.substr(0, colon);
    const std::string_view args = spec.substr(colon + 1);
    if (kind == "uniform") {
        auto v = parse_number_list(args, "uniform parameter");
        if (v.size() != 3) {
            throw Error("uniform scale spec needs exactly a,b,h");
        }
        return TimeScale::uniform(v[0], v[1], v[2]);
    }
    if (kind == "qscale") {
        auto v = parse_number_list(args, "qscale parameter");
        if (v.size() != 3) {
            throw Error("qscale spec needs exactly q,nmin,nmax");
        }
        if (v[1] != std::round(v[1]) || v[2] != std::round(v[2])) {
            throw Error("qscale exponents must be integers");
        }
        return TimeScale::qscale(v[0], static_cast<int>(v[1]), static_cast<int>(v[2]));
    }
    if (kind == "explicit") {
        return TimeScale::explicit_points(parse_number_list(args, "point"));
    }
    throw Error("unknown scale kind '" + std::string(kind) + "'");
}

} // namespace tsoc
