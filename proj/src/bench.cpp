#include "pwax/bench.hpp"

namespace pwax {

std::vector<BenchFunction> table1_functions() {
    const double two_pi = 6.283185307179586476925286766559;
    const Expr x = Expr::variable("x");
    return {
        {"sin", sin(x), Interval(0.0, two_pi)},
        {"square", pow_int(x, 2), Interval(-5.0, 5.0)},
        {"cube", pow_int(x, 3), Interval(-5.0, 5.0)},
        {"recip", Expr::constant(1.0) / x, Interval(1.0, 10.0)},
    };
}

Expr tower_expression() {
    const Expr x1 = Expr::variable("x1");
    const Expr x2 = Expr::variable("x2");
    const double sources[4][2] = {{1.0, 3.0}, {-2.0, 2.0}, {3.0, 0.0}, {-1.0, -4.0}};
    Expr sum = Expr::constant(0.0);
    bool first = true;
    for (const auto& s : sources) {
        const Expr d2 = pow_int(x1 - Expr::constant(s[0]), 2) +
                        pow_int(x2 - Expr::constant(s[1]), 2);
        const Expr term = Expr::constant(1.0) / (d2 + Expr::constant(1.0));
        sum = first ? term : sum + term;
        first = false;
    }
    return sum;
}

std::map<std::string, Interval> tower_box() {
    return {{"x1", Interval(-5.0, 5.0)}, {"x2", Interval(-5.0, 5.0)}};
}

} // namespace pwax
