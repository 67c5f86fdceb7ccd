#include "doctest.h"

#include <cmath>

#include "bend/errors.hpp"
#include "bend/expr.hpp"

using namespace bend;

TEST_SUITE_BEGIN("expr");

TEST_CASE("parse and evaluate") {
    auto e = Expr::parse("(s^2 + t^2)^2");
    CHECK(e.eval({{"s", 0.5}, {"t", 0.5}}) == doctest::Approx(0.25));
    auto trig = Expr::parse("sin(2*s) * cos(t) + sqrt(1 - s^2)");
    double s = 0.3, t = -0.2;
    CHECK(trig.eval({{"s", s}, {"t", t}}) ==
          doctest::Approx(std::sin(2 * s) * std::cos(t) + std::sqrt(1 - s * s)));
    CHECK(Expr::parse("pi").eval({}) == doctest::Approx(M_PI));
    CHECK_THROWS_AS(Expr::parse("s +"), BendError);
    CHECK_THROWS_AS(Expr::parse("tan(s)"), BendError);
    CHECK_THROWS_AS(Expr::parse("s^t"), BendError);
}

TEST_CASE("symbolic derivatives agree with central differences") {
    const char* cases[] = {
        "(s^2 + t^2)^2",
        "sqrt(1 - s^2 - t^2)",
        "sin(3*s)*cos(2*t) + s*t/(1 + s^2)",
        "s^4 - 2*s^2*t^2 + t^4",
    };
    for (const char* text : cases) {
        auto f = Expr::parse(text);
        auto fs = f.derivative("s");
        auto fss = fs.derivative("s");
        auto fst = fs.derivative("t");
        const double s = 0.31, t = -0.17, d = 1e-5;
        auto at = [&](double a, double b) { return f.eval({{"s", a}, {"t", b}}); };
        double fd_s = (at(s + d, t) - at(s - d, t)) / (2 * d);
        double fd_ss = (at(s + d, t) - 2 * at(s, t) + at(s - d, t)) / (d * d);
        double fd_st = (at(s + d, t + d) - at(s + d, t - d) - at(s - d, t + d) + at(s - d, t - d)) /
                       (4 * d * d);
        CHECK(fs.eval({{"s", s}, {"t", t}}) == doctest::Approx(fd_s).epsilon(1e-6));
        CHECK(fss.eval({{"s", s}, {"t", t}}) == doctest::Approx(fd_ss).epsilon(1e-4));
        CHECK(fst.eval({{"s", s}, {"t", t}}) == doctest::Approx(fd_st).epsilon(1e-4));
    }
}

TEST_SUITE_END();
