#pragma once

#include <map>
#include <vector>

#include "json.hpp"

#include "pwax/approx.hpp"
#include "pwax/chain.hpp"

namespace pwax {

struct InfeasibleBudget : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleTolerance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StaircasePoint {
    double tau = 0.0;
    int breakpoints = 0;
};

/// Tolerance / breakpoint-count tradeoff frontier of one function:
/// strictly increasing tau, strictly decreasing count. Each entry keeps
/// the smallest sampled tolerance achievable with its count.
struct Staircase {
    int node_id = -1;
    std::vector<StaircasePoint> candidates;

    int min_breakpoints() const { return candidates.back().breakpoints; }
    int max_breakpoints() const { return candidates.front().breakpoints; }
};

/// Sample log-spaced tolerances, fit at each, and prune to the frontier.
Staircase build_staircase(const Expr& f, const Interval& domain, double tau_lo, double tau_hi,
                          int samples = 500, FitMethod method = FitMethod::Bisect,
                          const BisectConfig& base_cfg = {});

/// Staircases for every unary node of a graph over its fit domain.
std::map<int, Staircase> build_staircases(const DecompGraph& g, double tau_lo, double tau_hi,
                                          int samples = 500,
                                          FitMethod method = FitMethod::Bisect,
                                          const BisectConfig& base_cfg = {});

struct AllocationChoice {
    int node_id = -1;
    double tau = 0.0;
    int breakpoints = 0;
};

struct AllocationResult {
    std::vector<AllocationChoice> choices; // by node id
    long total_breakpoints = 0;
    double composed_bound = 0.0;
    std::string objective; // "min_bound" or "min_breakpoints"
    std::map<int, double> coefficients;

    std::map<int, double> taus() const;
    nlohmann::json to_json() const;
};

/// Minimize the composed error bound (sensitivity-weighted tolerance
/// sum) subject to a total breakpoint budget; exact multi-choice
/// knapsack dynamic program over the budget.
AllocationResult minimize_bound(const DecompGraph& g, const std::map<int, Staircase>& staircases,
                                long budget);

/// Minimize total breakpoints subject to a composed error bound; binary
/// search on the budget over minimize_bound, which is exact because the
/// optimal bound is nonincreasing in the budget.
AllocationResult minimize_breakpoints(const DecompGraph& g,
                                      const std::map<int, Staircase>& staircases,
                                      double tolerance);

} // namespace pwax
