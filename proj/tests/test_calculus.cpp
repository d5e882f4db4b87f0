#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsoc/calculus.hpp"
#include "tsoc/errors.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/timescale.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace tsoc;

namespace {

double ulp_at(double magnitude) {
    const double m = std::max(std::abs(magnitude), 1e-300);
    return std::nextafter(m, std::numeric_limits<double>::infinity()) - m;
}

GridFunction sample_poly(const TimeScalePtr& scale, const std::vector<double>& coeffs) {
    return GridFunction::sample_scalar(scale, [&](double t) {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) {
            acc = acc * t + coeffs[k];
        }
        return acc;
    });
}

} // namespace

TEST_CASE("delta derivative of t^2 is t + sigma(t), exactly") {
    for (const TimeScale& raw :
         {TimeScale::uniform(0.0, 2.0, 0.25), TimeScale::qscale(2.0, -1, 4),
          TimeScale::explicit_points({0.0, 0.3, 1.0, 1.1, 4.0})}) {
        auto ts = make_scale_ptr(raw);
        const GridFunction f =
            GridFunction::sample_scalar(ts, [](double t) { return t * t; });
        const GridFunction df = delta_derivative(f);
        for (std::size_t i = 0; i < df.size(); ++i) {
            const double t = raw.point(i);
            const double sigma = raw.point(i + 1);
            // (sigma^2 - t^2)/mu = sigma + t up to one rounding of the division
            CHECK(df(i, 0) == doctest::Approx(t + sigma).epsilon(1e-14));
        }
    }
}

TEST_CASE("delta derivative lives on the kappa scale") {
    auto ts = make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.25));
    const GridFunction f = GridFunction::sample_scalar(ts, [](double t) { return t; });
    const GridFunction df = delta_derivative(f);
    CHECK(df.size() == 4);
    CHECK(df.scale().b() == 0.75);
    for (std::size_t i = 0; i < df.size(); ++i) {
        CHECK(df(i, 0) == 1.0);
    }
}

TEST_CASE("sigma shift picks the next sample") {
    auto ts = make_scale_ptr(TimeScale::qscale(2.0, 0, 3));
    const GridFunction f = GridFunction::sample_scalar(ts, [](double t) { return 3.0 * t; });
    const GridFunction g = sigma_shift(f);
    REQUIRE(g.size() == 3);
    CHECK(g(0, 0) == 6.0);
    CHECK(g(1, 0) == 12.0);
    CHECK(g(2, 0) == 24.0);
}

TEST_CASE("delta integral of 1/t over the powers of two from 1 to 8 is exactly 3") {
    auto ts = make_scale_ptr(TimeScale::qscale(2.0, 0, 3));
    const GridFunction f =
        GridFunction::sample_scalar(ts, [](double t) { return 1.0 / t; });
    CHECK(delta_integral_scalar(f, 1.0, 8.0) == 3.0);
}

TEST_CASE("delta integral endpoints") {
    auto ts = make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.25));
    const GridFunction f = GridFunction::constant_scalar(ts, 2.0);
    CHECK(delta_integral_scalar(f, 0.0, 1.0) == 2.0);
    CHECK(delta_integral_scalar(f, 0.5, 0.5) == 0.0);
    CHECK(delta_integral_scalar(f, 0.25, 0.75) == 1.0);
    CHECK_THROWS_AS(delta_integral_scalar(f, 0.0, 0.6), PointNotInScale);
    CHECK_THROWS_AS(delta_integral_scalar(f, 0.75, 0.25), Error);
}

TEST_CASE("delta integral is additive over adjacent windows") {
    auto ts = make_scale_ptr(TimeScale::explicit_points({0.0, 0.1, 0.4, 0.5, 1.0, 1.7}));
    const GridFunction f =
        GridFunction::sample_scalar(ts, [](double t) { return t * t - 0.3 * t; });
    const double whole = delta_integral_scalar(f, 0.0, 1.7);
    const double split =
        delta_integral_scalar(f, 0.0, 0.5) + delta_integral_scalar(f, 0.5, 1.7);
    CHECK(whole == doctest::Approx(split).epsilon(1e-15));
}

TEST_CASE("vector-valued integral integrates each component") {
    auto ts = make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.5));
    GridFunction f(ts, 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f(i, 0) = 1.0;
        f(i, 1) = ts.get()->point(i);
    }
    const std::vector<double> total = delta_integral(f, 0.0, 1.0);
    REQUIRE(total.size() == 2);
    CHECK(total[0] == 1.0);
    CHECK(total[1] == 0.25);
}

TEST_CASE("simple useful formula and product rule hold on randomized scales") {
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int trial = 0; trial < 50; ++trial) {
        TimeScalePtr ts;
        const int kind = trial % 3;
        if (kind == 0) {
            const double a = -1.0 + 2.0 * unit(rng);
            const double len = 0.5 + 1.5 * unit(rng);
            const auto steps = static_cast<std::size_t>(2 + 58 * unit(rng));
            ts = make_scale_ptr(
                TimeScale::uniform(a, a + len, len / static_cast<double>(steps)));
        } else if (kind == 1) {
            const double q = 1.05 + unit(rng);
            const int n_min = -3 + static_cast<int>(3 * unit(rng));
            const int n_max = n_min + 2 + static_cast<int>(10 * unit(rng));
            ts = make_scale_ptr(TimeScale::qscale(q, n_min, n_max));
        } else {
            std::vector<double> pts;
            const auto count = static_cast<std::size_t>(3 + 40 * unit(rng));
            for (std::size_t i = 0; i < count; ++i) {
                pts.push_back(-2.0 + 4.0 * unit(rng));
            }
            ts = make_scale_ptr(TimeScale::explicit_points(std::move(pts)));
        }

        std::vector<double> cf(5), cg(5);
        for (auto& c : cf) {
            c = coeff(rng);
        }
        for (auto& c : cg) {
            c = coeff(rng);
        }
        const GridFunction f = sample_poly(ts, cf);
        const GridFunction g = sample_poly(ts, cg);
        const GridFunction df = delta_derivative(f);
        const GridFunction dg = delta_derivative(g);

        GridFunction fg(ts, 1);
        for (std::size_t i = 0; i < fg.size(); ++i) {
            fg(i, 0) = f(i, 0) * g(i, 0);
        }
        const GridFunction dfg = delta_derivative(fg);

        for (std::size_t i = 0; i + 1 < ts->size(); ++i) {
            const double mu = ts->mu_at(i);
            const double f_sigma = f(i + 1, 0);
            const double reconstructed = f(i, 0) + mu * df(i, 0);
            CHECK(std::abs(f_sigma - reconstructed) <=
                  4.0 * ulp_at(std::max(std::abs(f_sigma), std::abs(f(i, 0)))));

            const double term_a = f_sigma * dg(i, 0);
            const double term_b = df(i, 0) * g(i, 0);
            const double rhs = term_a + term_b;
            const double denom = std::max(1.0, std::abs(term_a) + std::abs(term_b));
            CHECK(std::abs(dfg(i, 0) - rhs) <= 1e-12 * denom);
        }
    }
}
