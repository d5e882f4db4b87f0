#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsoc/errors.hpp"
#include "tsoc/grid_function.hpp"
#include "tsoc/ocp.hpp"
#include "tsoc/reports.hpp"
#include "tsoc/timescale.hpp"

#include <string>
#include <vector>

using namespace tsoc;

namespace {

TimeScalePtr half_scale() { return make_scale_ptr(TimeScale::uniform(0.0, 1.0, 0.5)); }

ControlProblem scalar_problem(TimeScalePtr ts) {
    return ControlProblem(1, 1, Sense::Minimize, Expr::parse("u^2"), {Expr::parse("u")},
                          std::move(ts), {0.0}, {1.0});
}

Extremal sample_extremal(TimeScalePtr ts) {
    GridFunction x = GridFunction::sample_scalar(ts, [](double t) { return t; });
    GridFunction u = GridFunction::constant_scalar(make_scale_ptr(ts->kappa()), 1.0);
    GridFunction p = GridFunction::constant_scalar(ts, -2.0);
    return Extremal(std::move(x), std::move(u), std::move(p), 0.5);
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

template <typename E>
std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const E& e) {
        return e.what();
    }
    return "<no exception>";
}

} // namespace

TEST_CASE("doubles format to their shortest exact decimal") {
    CHECK(format_double17(0.25) == "0.25");
    CHECK(format_double17(0.1) == "0.10000000000000001");
    CHECK(format_double17(-2.0) == "-2");
    CHECK(format_double17(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_double17(1.0) == "1");
    CHECK(format_double17(0.0) == "0");
    CHECK(format_double17(1e-9) == "1.0000000000000001e-09");
}

TEST_CASE("grid functions print as one row per scale point") {
    auto ts = half_scale();
    GridFunction g(ts, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g(i, 0) = static_cast<double>(i);
        g(i, 1) = -0.5 * static_cast<double>(i);
    }
    CHECK(grid_csv(g) == "t,v1,v2\n"
                         "0,0,-0\n"
                         "0.5,1,-0.5\n"
                         "1,2,-1\n");
}

TEST_CASE("extremal csv carries the multiplier and leaves the final control empty") {
    auto ts = half_scale();
    const Extremal ext = sample_extremal(ts);
    CHECK(extremal_csv(ext) == "# lambda=0.5\n"
                               "t,x1,u1,p1\n"
                               "0,0,1,-2\n"
                               "0.5,0.5,1,-2\n"
                               "1,1,,-2\n");
}

TEST_CASE("extremal csv round trips bitwise") {
    auto ts = half_scale();
    ControlProblem prob = scalar_problem(ts);
    Extremal ext = sample_extremal(ts);
    ext.x(1, 0) = 0.1 + 0.2;
    ext.p(2, 0) = -1.0 / 3.0;
    const Extremal back = parse_extremal_csv(extremal_csv(ext), prob);
    CHECK(back.lambda == ext.lambda);
    REQUIRE(back.u.size() == ext.u.size());
    for (std::size_t i = 0; i < ts->size(); ++i) {
        CHECK(back.x(i, 0) == ext.x(i, 0));
        CHECK(back.p(i, 0) == ext.p(i, 0));
    }
    for (std::size_t i = 0; i < ext.u.size(); ++i) {
        CHECK(back.u(i, 0) == ext.u(i, 0));
    }
}

TEST_CASE("a full-scale control column is accepted") {
    auto ts = half_scale();
    ControlProblem prob = scalar_problem(ts);
    const std::string text = "# lambda=1\n"
                             "t,x1,u1,p1\n"
                             "0,0,1,-2\n"
                             "0.5,0.5,1,-2\n"
                             "1,1,7,-2\n";
    const Extremal ext = parse_extremal_csv(text, prob);
    CHECK(ext.u.size() == ts->size());
    CHECK(ext.u(2, 0) == 7.0);
    CHECK(ext.control_at(2)[0] == 7.0);
}

TEST_CASE("trajectory parse failures name the offending line") {
    auto ts = half_scale();
    ControlProblem prob = scalar_problem(ts);

    const std::string no_lambda = "t,x1,u1,p1\n0,0,1,-2\n0.5,0.5,1,-2\n1,1,,-2\n";
    CHECK(contains(message_of<Error>([&] { parse_extremal_csv(no_lambda, prob); }),
                   "must start with a '# lambda='"));

    const std::string bad_header =
        "# lambda=1\nt,x1,q1,p1\n0,0,1,-2\n0.5,0.5,1,-2\n1,1,,-2\n";
    CHECK(contains(message_of<Error>([&] { parse_extremal_csv(bad_header, prob); }),
                   "expected 't,x1,u1,p1'"));

    const std::string short_rows = "# lambda=1\nt,x1,u1,p1\n0,0,1,-2\n1,1,,-2\n";
    CHECK(contains(message_of<Error>([&] { parse_extremal_csv(short_rows, prob); }),
                   "has 2 rows, the scale has 3 points"));

    const std::string wrong_time =
        "# lambda=1\nt,x1,u1,p1\n0,0,1,-2\n0.6,0.5,1,-2\n1,1,,-2\n";
    CHECK(contains(message_of<Error>([&] { parse_extremal_csv(wrong_time, prob); }),
                   "does not match the scale point"));

    const std::string bad_number =
        "# lambda=1\nt,x1,u1,p1\n0,0,1,-2\n0.5,abc,1,-2\n1,1,,-2\n";
    const std::string msg = message_of<Error>([&] { parse_extremal_csv(bad_number, prob); });
    CHECK(contains(msg, "line 4"));
    CHECK(contains(msg, "'abc' is not a number"));

    const std::string early_gap =
        "# lambda=1\nt,x1,u1,p1\n0,0,,-2\n0.5,0.5,1,-2\n1,1,,-2\n";
    CHECK(contains(message_of<Error>([&] { parse_extremal_csv(early_gap, prob); }),
                   "only be empty, all together, in the final row"));

    const std::string missing_field =
        "# lambda=1\nt,x1,u1,p1\n0,0,1,-2\n0.5,0.5,1\n1,1,,-2\n";
    CHECK(contains(message_of<Error>([&] { parse_extremal_csv(missing_field, prob); }),
                   "has 3 fields, expected 4"));

    CHECK(contains(message_of<Error>([&] { parse_extremal_csv("", prob); }),
                   "trajectory file is empty"));
}

TEST_CASE("whitespace and time round-off are tolerated") {
    auto ts = half_scale();
    ControlProblem prob = scalar_problem(ts);
    const std::string text = "# lambda=1\r\n"
                             "t,x1,u1,p1\r\n"
                             " 0 , 0 , 1 , -2 \r\n"
                             "0.4999999999999999,0.5,1,-2\n"
                             "\n"
                             "1,1,,-2\n";
    const Extremal ext = parse_extremal_csv(text, prob);
    CHECK(ext.x(1, 0) == 0.5);
    CHECK(ext.lambda == 1.0);
}

TEST_CASE("extremal reports serialize deterministically") {
    ExtremalReport rep;
    rep.adjoint_residual = 0.25;
    rep.stationarity_residual = 0.1;
    rep.admissibility_residual = 0.0;
    rep.nontrivial = true;
    CHECK(extremal_report_json(rep) ==
          "{\"schema\": 1, \"adjoint_residual\": 0.25, "
          "\"stationarity_residual\": 0.10000000000000001, "
          "\"admissibility_residual\": 0, \"nontrivial\": true}\n");
    CHECK(extremal_report_csv(rep) ==
          "adjoint_residual,stationarity_residual,admissibility_residual,nontrivial\n"
          "0.25,0.10000000000000001,0,true\n");
    CHECK(rep.worst() == 0.25);
}

TEST_CASE("conservation reports serialize deterministically") {
    auto ts = half_scale();
    ConservationReport rep{GridFunction::constant_scalar(ts, 2.0), 0.0, true, 1e-9};
    CHECK(conservation_json(rep) ==
          "{\"schema\": 1, \"C\": [[0, 2], [0.5, 2], [1, 2]], "
          "\"max_deviation\": 0, \"passed\": true}\n");
    CHECK(conservation_csv(rep) == "t,C\n0,2\n0.5,2\n1,2\n");
}
