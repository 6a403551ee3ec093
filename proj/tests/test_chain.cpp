#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pwax/bench.hpp"
#include "pwax/chain.hpp"

using namespace pwax;

namespace {

DecompGraph chain_graph() {
    return decompose(parse_expression("(sin(1/x))^2"),
                     {{"x", Interval(1.0, 3.0)}});
}

std::map<int, double> uniform_taus(const DecompGraph& g, double tau) {
    std::map<int, double> out;
    for (int id : g.unary_ids())
        out[id] = tau;
    return out;
}

bool is_recip(const DecompNode& n) {
    return n.kind == NodeKind::Unary && n.fn.kind() == ExprKind::Div;
}

bool is_square(const DecompNode& n) {
    return n.kind == NodeKind::Unary && n.fn.kind() == ExprKind::PowInt && n.fn.exponent() == 2;
}

} // namespace

TEST_CASE("decomposition of the nested chain") {
    DecompGraph g = chain_graph();
    REQUIRE(g.nodes().size() == 4);
    CHECK(g.node(0).kind == NodeKind::Input);
    CHECK(is_recip(g.node(1)));
    CHECK(g.node(2).kind == NodeKind::Unary);
    CHECK(g.node(2).fn.kind() == ExprKind::Sin);
    CHECK(is_square(g.node(3)));
    CHECK(g.output() == 3);
}

TEST_CASE("affine expressions stay exact") {
    DecompGraph g = decompose(parse_expression("3*x + 2"), {{"x", Interval(-1.0, 1.0)}});
    CHECK(g.unary_ids().empty());
    CHECK(g.count_kind(NodeKind::Affine) == 1);
    CHECK(g.eval_exact({{"x", 0.5}}) == doctest::Approx(3.5).epsilon(1e-15));

    // with no unary nodes the composed evaluation is exact
    g.fit_tolerances({}, FitMethod::Bisect);
    const auto [exact, approx] = g.eval_composed({{"x", 0.25}});
    CHECK(exact == approx);
    CHECK(g.propagate_error(ErrorMode::DerivBound).at(g.output()) == 0.0);
}

TEST_CASE("tower decomposition shape") {
    DecompGraph g = decompose(tower_expression(), tower_box());
    int recips = 0, squares = 0;
    for (const DecompNode& n : g.nodes()) {
        recips += is_recip(n) ? 1 : 0;
        squares += is_square(n) ? 1 : 0;
    }
    CHECK(recips == 4);
    CHECK(squares == 8);
    CHECK(g.unary_ids().size() == 12);
    CHECK(g.count_kind(NodeKind::Input) == 2);
}

TEST_CASE("degenerate and product decompositions") {
    // the output of an identity expression is the input node itself
    DecompGraph ident = decompose(parse_expression("x"), {{"x", Interval(0.0, 1.0)}});
    CHECK(ident.nodes().size() == 1);
    ident.fit_tolerances({}, FitMethod::Bisect);
    const auto [e, a] = ident.eval_composed({{"x", 0.5}});
    CHECK(e == 0.5);
    CHECK(a == 0.5);

    // a constant expression becomes a parentless affine node
    DecompGraph con = decompose(parse_expression("3"), {{"x", Interval(0.0, 1.0)}});
    CHECK(con.nodes().size() == 1);
    CHECK(con.node(0).kind == NodeKind::Affine);

    // x*x folds to one square node instead of the quarter-square form
    DecompGraph sq = decompose(parse_expression("x*x"), {{"x", Interval(-1.0, 2.0)}});
    CHECK(sq.unary_ids().size() == 1);
    CHECK(is_square(sq.node(sq.unary_ids()[0])));

    // factors differing by a constant also need only one square
    DecompGraph shifted =
        decompose(parse_expression("(x+1)*(x+3)"), {{"x", Interval(0.0, 1.0)}});
    CHECK(shifted.unary_ids().size() == 1);
    CHECK(shifted.eval_exact({{"x", 0.5}}) == doctest::Approx(5.25).epsilon(1e-12));

    // general products go through the quarter-square identity
    DecompGraph prod = decompose(parse_expression("x*sin(x)"), {{"x", Interval(0.0, 1.0)}});
    CHECK(prod.unary_ids().size() == 3); // sin plus two squares
    CHECK(prod.eval_exact({{"x", 0.7}}) ==
          doctest::Approx(0.7 * std::sin(0.7)).epsilon(1e-12));
}

TEST_CASE("unsupported and unbound inputs") {
    CHECK_THROWS_AS(decompose(parse_expression("abs(x)"), {{"x", Interval(0.0, 1.0)}}),
                    UnsupportedNode);
    CHECK_THROWS_AS(decompose(parse_expression("x + y"), {{"x", Interval(0.0, 1.0)}}),
                    UnboundVariable);
}

TEST_CASE("domain propagation along the chain") {
    DecompGraph g = chain_graph();
    g.propagate_domains();
    const double slack = 1e-9;

    CHECK(g.node(0).domain.lo == 1.0);
    CHECK(g.node(0).domain.hi == 3.0);
    CHECK(g.node(1).domain.lo == doctest::Approx(1.0 / 3.0).epsilon(slack));
    CHECK(g.node(1).domain.hi == doctest::Approx(1.0).epsilon(slack));
    CHECK(g.node(2).domain.lo == doctest::Approx(std::sin(1.0 / 3.0)).epsilon(slack));
    CHECK(g.node(2).domain.hi == doctest::Approx(std::sin(1.0)).epsilon(slack));
    CHECK(g.node(3).domain.lo == doctest::Approx(std::pow(std::sin(1.0 / 3.0), 2)).epsilon(slack));
    CHECK(g.node(3).domain.hi == doctest::Approx(std::pow(std::sin(1.0), 2)).epsilon(slack));
}

TEST_CASE("tower output domain is contained in [0, 4]") {
    DecompGraph g = decompose(tower_expression(), tower_box());
    g.propagate_domains();
    const Interval out = g.node(g.output()).domain;
    CHECK(out.lo >= -1e-9);
    CHECK(out.hi <= 4.0 + 1e-9);

    // dense sampling stays inside the enclosure
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = g.eval_exact({{"x1", unit(rng)}, {"x2", unit(rng)}});
        CHECK(out.contains(v));
    }
}

TEST_CASE("decomposition evaluates exactly") {
    std::mt19937_64 rng(19);
    const Expr exprs[] = {
        parse_expression("(sin(1/x))^2"),
        parse_expression("x*sin(x) + cos(x)*cos(x)"),
        parse_expression("exp(sin(x)) / (x + 3)"),
        tower_expression(),
    };
    const std::map<std::string, Interval> boxes[] = {
        {{"x", Interval(1.0, 3.0)}},
        {{"x", Interval(-2.0, 2.0)}},
        {{"x", Interval(-1.0, 4.0)}},
        tower_box(),
    };
    for (int which = 0; which < 4; ++which) {
        DecompGraph g = decompose(exprs[which], boxes[which]);
        for (int i = 0; i < 250; ++i) {
            std::map<std::string, double> point;
            std::map<std::string, double> bind;
            for (const auto& [name, iv] : boxes[which]) {
                std::uniform_real_distribution<double> dist(iv.lo, iv.hi);
                point[name] = dist(rng);
                bind[name] = point[name];
            }
            const double direct = exprs[which].eval(bind);
            const double via_graph = g.eval_exact(point);
            CHECK(std::abs(direct - via_graph) <= 1e-10 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST_CASE("per-node tolerance fits reproduce the known error table") {
    DecompGraph g = chain_graph();
    g.fit_tolerances(uniform_taus(g, 0.01), FitMethod::Bisect);

    const auto slope = g.propagate_error(ErrorMode::SlopeBound);
    const auto deriv = g.propagate_error(ErrorMode::DerivBound);

    CHECK(slope.at(1) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(slope.at(2) == doctest::Approx(0.0186).epsilon(0.05));
    CHECK(std::abs(slope.at(2) - 0.0186) <= 1e-3);
    CHECK(std::abs(slope.at(3) - 0.0391) <= 1e-3);

    CHECK(deriv.at(1) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(std::abs(deriv.at(2) - 0.0194) <= 1e-3);
    CHECK(std::abs(deriv.at(3) - 0.0427) <= 1e-3);

    // the derivative-bound amplification for the sin node is cos(1/3)
    CHECK(deriv.at(2) ==
          doctest::Approx(0.01 + std::cos(1.0 / 3.0) * 0.01).epsilon(1e-12));

    // slope-based bounds never exceed derivative-based ones
    for (const DecompNode& n : g.nodes())
        CHECK(slope.at(n.id) <= deriv.at(n.id) + 1e-12);

    // d_pwa of the sin fit is the known max secant slope
    CHECK(g.node(2).d_pwa == doctest::Approx(0.856).epsilon(5e-3));
    CHECK(g.node(2).d_pwa <= g.node(2).d_bound + 1e-12);

    // only unary nodes carry fits
    DecompGraph tower = decompose(tower_expression(), tower_box());
    std::map<int, double> taus;
    for (int id : tower.unary_ids())
        taus[id] = 0.05;
    tower.fit_tolerances(taus, FitMethod::Bisect);
    for (const DecompNode& n : tower.nodes()) {
        if (n.kind == NodeKind::Unary)
            CHECK(n.pwa.has_value());
        else
            CHECK(!n.pwa.has_value());
    }
}

TEST_CASE("secant mode reproduces the affine propagation table") {
    DecompGraph g = chain_graph();
    std::map<int, double> taus{{1, 0.05}, {2, 0.0342}, {3, 0.0661}};
    g.fit_tolerances(taus, FitMethod::Secant);

    // the first node keeps a multi-segment fit (its input is exact)
    CHECK(g.node(1).pwa->segment_count() >= 2);
    CHECK(g.node(2).pwa->segment_count() == 1);
    CHECK(g.node(3).pwa->segment_count() == 1);

    // secant coefficients over the exact domains
    const PwaSegment w3 = g.node(2).pwa->segments()[0];
    CHECK(std::abs(w3.slope - 0.771) <= 1e-3);
    CHECK(std::abs(w3.intercept - 0.0701) <= 1e-3);
    const PwaSegment w4 = g.node(3).pwa->segments()[0];
    CHECK(w4.slope == doctest::Approx(std::sin(1.0 / 3.0) + std::sin(1.0)).epsilon(1e-9));
    CHECK(std::abs(w4.intercept - (-0.2753)) <= 1e-3);

    const auto eps = g.propagate_error(ErrorMode::Secant);
    CHECK(eps.at(1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(std::abs(eps.at(2) - 0.0728) <= 1e-3);
    CHECK(std::abs(eps.at(3) - 0.1512) <= 1e-3);
}

TEST_CASE("secant propagation rejects multi-segment fits downstream") {
    DecompGraph g = chain_graph();
    g.fit_tolerances(uniform_taus(g, 0.01), FitMethod::Bisect);
    CHECK_THROWS_AS(g.propagate_error(ErrorMode::Secant), NotSos);
}

TEST_CASE("propagation requires fits") {
    DecompGraph g = chain_graph();
    g.propagate_domains();
    CHECK_THROWS_AS(g.propagate_error(ErrorMode::DerivBound), MissingFit);
    CHECK_THROWS_AS(g.eval_composed({{"x", 2.0}}), MissingFit);
    CHECK_THROWS_AS(g.fit_tolerances({{1, 0.01}}, FitMethod::Bisect), std::invalid_argument);

    DecompGraph fresh = chain_graph();
    CHECK_THROWS_AS(fresh.sensitivity(), MissingBounds);
}

TEST_CASE("sensitivity coefficients") {
    DecompGraph g = chain_graph();
    g.propagate_domains();
    const auto coeffs = g.sensitivity();

    // output tolerance enters with coefficient one
    CHECK(coeffs.at(3) == doctest::Approx(1.0));
    // one composition level: amplified by max |2u| over the sin image
    const double d_square = 2.0 * std::sin(1.0);
    CHECK(coeffs.at(2) == doctest::Approx(d_square).epsilon(1e-9));
    // two levels: cos bound times the square bound
    const double d_sin = std::cos(1.0 / 3.0);
    CHECK(coeffs.at(1) == doctest::Approx(d_sin * d_square).epsilon(1e-9));

    // reconstruction identity: weighted tolerances equal the propagated bound
    g.fit_tolerances(uniform_taus(g, 0.01), FitMethod::Bisect);
    const auto deriv = g.propagate_error(ErrorMode::DerivBound);
    double reconstructed = 0.0;
    for (int id : g.unary_ids())
        reconstructed += g.sensitivity().at(id) * 0.01;
    CHECK(std::abs(reconstructed - deriv.at(g.output())) <= 1e-12);
}

TEST_CASE("raising one tolerance never lowers a downstream bound") {
    DecompGraph g = chain_graph();
    g.fit_tolerances(uniform_taus(g, 0.01), FitMethod::Bisect);
    const auto before = g.propagate_error(ErrorMode::DerivBound);

    DecompGraph h = chain_graph();
    auto taus = uniform_taus(h, 0.01);
    taus[1] = 0.03;
    h.fit_tolerances(taus, FitMethod::Bisect);
    const auto after = h.propagate_error(ErrorMode::DerivBound);

    for (int id : g.unary_ids())
        CHECK(after.at(id) >= before.at(id) - 1e-12);
}

TEST_CASE("composed evaluation respects the propagated bound") {
    DecompGraph g = chain_graph();
    g.fit_tolerances(uniform_taus(g, 0.01), FitMethod::Bisect);
    const auto slope = g.propagate_error(ErrorMode::SlopeBound);
    const auto deriv = g.propagate_error(ErrorMode::DerivBound);
    const double bound_slope = slope.at(g.output());
    const double bound_deriv = deriv.at(g.output());
    CHECK(bound_slope <= bound_deriv);

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> xs(1.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = xs(rng);
        const auto [exact, approx] = g.eval_composed({{"x", x}});
        worst = std::max(worst, std::abs(approx - exact));
        // intermediate approximations stay inside the certified regions
        // (checked internally; an escape raises OutOfDomain)
    }
    CHECK(worst <= bound_slope + 1e-9);
    CHECK(worst <= 0.0427 + 1e-3);

    CHECK_THROWS_AS(g.eval_composed({{"x", 5.0}}), OutOfDomain);
}

TEST_CASE("uniform grid fits propagate their measured tolerances") {
    DecompGraph g = chain_graph();
    std::map<int, int> counts;
    for (int id : g.unary_ids())
        counts[id] = 9;
    g.fit_uniform(counts);
    for (int id : g.unary_ids()) {
        CHECK(g.node(id).pwa->breakpoint_count() == 9);
        CHECK(g.node(id).tau > 0.0);
    }
    const double bound = g.propagate_error(ErrorMode::DerivBound).at(g.output());
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> xs(1.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        const auto [exact, approx] = g.eval_composed({{"x", xs(rng)}});
        CHECK(std::abs(approx - exact) <= bound + 1e-9);
    }
}

TEST_CASE("graph serialization") {
    DecompGraph g = chain_graph();
    g.fit_tolerances(uniform_taus(g, 0.01), FitMethod::Bisect);
    const nlohmann::json j = g.to_json();
    CHECK(j.at("nodes").size() == 4);
    CHECK(j.at("output").get<int>() == 3);
    CHECK(j.at("nodes")[1].at("kind") == "unary");
    CHECK(j.at("nodes")[1].at("fn") == "1 / u");
    CHECK(j.at("nodes")[1].at("pwa").contains("breakpoints"));
    CHECK(j.at("inputs").contains("x"));
}
