#pragma once

#include <map>
#include <string>
#include <vector>

#include "pwax/expr.hpp"
#include "pwax/interval.hpp"

namespace pwax {

struct BenchFunction {
    std::string name;
    Expr f;
    Interval domain;
};

/// The four study functions: sin on [0, 2pi], square and cube on
/// [-5, 5], reciprocal on [1, 10].
std::vector<BenchFunction> table1_functions();

/// Sum of four inverse-quadratic signal towers on [-5, 5]^2, written
/// directly in the squared distances so no square roots appear.
Expr tower_expression();
std::map<std::string, Interval> tower_box();

} // namespace pwax
