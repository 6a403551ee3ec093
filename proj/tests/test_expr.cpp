#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pwax/expr.hpp"

using namespace pwax;

namespace {

// independent oracle: central finite differences
double central_diff(const Expr& e, const std::string& var, double x, double h = 1e-6) {
    const double hi = e.eval(std::map<std::string, double>{{var, x + h}});
    const double lo = e.eval(std::map<std::string, double>{{var, x - h}});
    return (hi - lo) / (2.0 * h);
}

// random expressions over one variable, kept away from singular
// configurations: division and log wrap strictly positive forms
Expr random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    const Expr x = Expr::variable("x");
    switch (pick(rng)) {
    case 0:
        return x;
    case 1: {
        std::uniform_real_distribution<double> c(-3.0, 3.0);
        return Expr::constant(c(rng));
    }
    case 2:
        return sin(x);
    case 3:
        return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4:
        return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 5:
        return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 6:
        return sin(random_expr(rng, depth - 1));
    case 7:
        return cos(random_expr(rng, depth - 1));
    case 8:
        return pow_int(random_expr(rng, depth - 1), 2);
    default:
        // exp of a bounded combination keeps values finite
        return exp(Expr::constant(0.25) * sin(random_expr(rng, depth - 1)));
    }
}

} // namespace

TEST_CASE("point evaluation") {
    const Expr e = parse_expression("sin(1/x)");
    CHECK(e.eval(std::map<std::string, double>{{"x", 1.0}}) ==
          doctest::Approx(std::sin(1.0)).epsilon(1e-12));

    const Expr sq = parse_expression("(sin(1/x))^2");
    CHECK(sq.eval(std::map<std::string, double>{{"x", 1.0}}) ==
          doctest::Approx(std::pow(std::sin(1.0), 2)).epsilon(1e-12));

    const Expr zero = parse_expression("x^2 - x^2");
    for (double x : {-2.0, 0.3, 17.0})
        CHECK(zero.eval(std::map<std::string, double>{{"x", x}}) == 0.0);
}

TEST_CASE("evaluation errors") {
    const Expr e = parse_expression("1/x");
    CHECK_THROWS_AS(e.eval(std::map<std::string, double>{{"y", 1.0}}), UnboundVariable);
    CHECK_THROWS_AS(e.eval(std::map<std::string, double>{{"x", 0.0}}), EvalDomainError);
    CHECK_THROWS_AS(parse_expression("sqrt(x)").eval(std::map<std::string, double>{{"x", -1.0}}),
                    EvalDomainError);
    CHECK_THROWS_AS(parse_expression("log(x)").eval(std::map<std::string, double>{{"x", 0.0}}),
                    EvalDomainError);
    CHECK_THROWS_AS(parse_expression("x^-1").eval(std::map<std::string, double>{{"x", 0.0}}),
                    EvalDomainError);
}

TEST_CASE("interval evaluation") {
    const Expr inv = parse_expression("1/x");
    const Interval r = inv.eval(std::map<std::string, Interval>{{"x", {1.0, 3.0}}});
    CHECK(r.lo == doctest::Approx(1.0 / 3.0));
    CHECK(r.hi == doctest::Approx(1.0));

    const Expr s = parse_expression("sin(1/x)");
    const Interval si = s.eval(std::map<std::string, Interval>{{"x", {1.0, 3.0}}});
    CHECK(si.lo <= std::sin(1.0 / 3.0));
    CHECK(si.hi >= std::sin(1.0));

    // dependency overestimation is expected
    const Expr d = parse_expression("x - x");
    const Interval di = d.eval(std::map<std::string, Interval>{{"x", {0.0, 1.0}}});
    CHECK(di.lo == doctest::Approx(-1.0));
    CHECK(di.hi == doctest::Approx(1.0));
}

TEST_CASE("textbook derivatives") {
    const Expr e = parse_expression("sin(x)").derivative("x");
    for (double x : {0.0, 0.5, 2.0})
        CHECK(e.eval(std::map<std::string, double>{{"x", x}}) ==
              doctest::Approx(std::cos(x)).epsilon(1e-12));

    const Expr inv = parse_expression("1/x").derivative("x");
    CHECK(inv.eval(std::map<std::string, double>{{"x", 2.0}}) ==
          doctest::Approx(-0.25).epsilon(1e-12));

    CHECK_THROWS_AS(parse_expression("abs(x)").derivative("x"), NotDifferentiable);
}

TEST_CASE("derivative matches finite differences for sin(1/x)") {
    const Expr e = parse_expression("sin(1/x)");
    const Expr de = e.derivative("x");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xs(1.0, 3.0);
    for (int i = 0; i < 20; ++i) {
        const double x = xs(rng);
        const double sym = de.eval(std::map<std::string, double>{{"x", x}});
        CHECK(sym == doctest::Approx(central_diff(e, "x", x)).epsilon(1e-6));
    }
}

TEST_CASE("derivative matches finite differences on random expressions") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    int checked = 0;
    while (checked < 200) {
        const Expr e = random_expr(rng, 6);
        Expr de;
        try {
            de = e.derivative("x");
        } catch (const NotDifferentiable&) {
            continue;
        }
        const double x = xs(rng);
        double sym, fd;
        try {
            sym = de.eval(std::map<std::string, double>{{"x", x}});
            fd = central_diff(e, "x", x);
        } catch (const EvalDomainError&) {
            continue;
        }
        if (!std::isfinite(sym) || !std::isfinite(fd) || std::abs(fd) > 1e6)
            continue;
        CHECK(sym == doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
        ++checked;
    }
}

TEST_CASE("simplify identities") {
    CHECK(parse_expression("0*sin(x)").simplified().str() == "0");
    CHECK(parse_expression("x + 0").simplified().str() == "x");
    CHECK(parse_expression("1*x").simplified().str() == "x");
    CHECK(parse_expression("x^1").simplified().str() == "x");
    CHECK(parse_expression("2+3*4").simplified().str() == "14");

    // derivative of 1/x collapses to a compact quotient
    const Expr d = parse_expression("1/x").derivative("x");
    CHECK(d.node_count() <= 5);
}

TEST_CASE("simplify preserves evaluation") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Expr e = random_expr(rng, 5);
        const Expr s = e.simplified();
        const double x = xs(rng);
        double v1, v2;
        try {
            v1 = e.eval(std::map<std::string, double>{{"x", x}});
            v2 = s.eval(std::map<std::string, double>{{"x", x}});
        } catch (const EvalDomainError&) {
            continue;
        }
        CHECK(std::abs(v1 - v2) <= 1e-12 * std::max(1.0, std::abs(v1)));
    }
}

TEST_CASE("awkward constants round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-17, 1e17, 6.283185307179586, 5e-324, 1e300}) {
        for (const Expr& e : {Expr::constant(v), Expr::constant(-v),
                              Expr::constant(v) * Expr::variable("x"),
                              pow_int(Expr::constant(-v), 2)}) {
            const std::string s = e.str();
            const Expr back = parse_expression(s);
            CHECK(back.str() == s);
            const double v1 = e.eval(std::map<std::string, double>{{"x", 0.75}});
            const double v2 = back.eval(std::map<std::string, double>{{"x", 0.75}});
            CHECK(v1 == v2);
        }
    }
}

TEST_CASE("print parse round trip is a fixed point") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 300; ++i) {
        const Expr e = random_expr(rng, 5);
        const std::string s1 = e.str();
        const Expr e2 = parse_expression(s1);
        CHECK(e2.str() == s1);
        const double x = xs(rng);
        try {
            const double v1 = e.eval(std::map<std::string, double>{{"x", x}});
            const double v2 = e2.eval(std::map<std::string, double>{{"x", x}});
            CHECK(v1 == v2); // bit-exact
        } catch (const EvalDomainError&) {
        }
    }
}

TEST_CASE("parser grammar") {
    CHECK(parse_expression("2*x+1").str() == "2 * x + 1");
    CHECK(parse_expression("-x^2").str() == "-x^2");
    CHECK(parse_expression("(x+1)^3").str() == "(x + 1)^3");
    CHECK(parse_expression("x^-2").eval(std::map<std::string, double>{{"x", 2.0}}) ==
          doctest::Approx(0.25));
    CHECK(parse_expression("1e-3").constant_value() == doctest::Approx(1e-3));
    CHECK(parse_expression("sin(cos(x))").str() == "sin(cos(x))");

    CHECK_THROWS_AS(parse_expression("2*"), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expression("x^y"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x+1"), ParseError);
    CHECK_THROWS_AS(parse_expression("x $ y"), ParseError);
    CHECK_THROWS_AS(parse_expression("x^0.5"), ParseError);
}

TEST_CASE("interval containment fuzz over random expressions") {
    std::mt19937_64 rng(41);
    int checked = 0;
    while (checked < 1000) {
        const Expr e = random_expr(rng, 4);
        std::uniform_real_distribution<double> bound(-3.0, 3.0);
        double a = bound(rng), b = bound(rng);
        if (a > b)
            std::swap(a, b);
        Interval image{0, 0};
        try {
            image = e.eval(std::map<std::string, Interval>{{"x", {a, b}}});
        } catch (const DomainError&) {
            continue;
        } catch (const EvalDomainError&) {
            continue;
        }
        std::uniform_real_distribution<double> inside(a, b);
        const double x = inside(rng);
        double v;
        try {
            v = e.eval(std::map<std::string, double>{{"x", x}});
        } catch (const EvalDomainError&) {
            continue;
        }
        const double slack = 1e-10 * std::max(1.0, image.max_abs());
        CHECK(image.lo - slack <= v);
        CHECK(v <= image.hi + slack);
        ++checked;
    }
}

TEST_CASE("compiled evaluation matches the tree walk bit for bit") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> xs(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Expr e = random_expr(rng, 5);
        const CompiledUnary fn(e, "x");
        const double x = xs(rng);
        double tree;
        try {
            tree = e.eval(std::map<std::string, double>{{"x", x}});
        } catch (const EvalDomainError&) {
            continue;
        }
        CHECK(fn(x) == tree);
    }
}
