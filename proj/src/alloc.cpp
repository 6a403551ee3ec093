#include "pwax/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pwax {

namespace {

std::vector<double> log_spaced(double lo, double hi, int samples) {
    if (!(lo > 0.0) || !(hi > lo))
        throw std::invalid_argument("tolerance range requires 0 < tau_lo < tau_hi");
    if (samples < 2)
        throw std::invalid_argument("need at least 2 tolerance samples");
    std::vector<double> out(static_cast<std::size_t>(samples));
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < samples; ++i)
        out[static_cast<std::size_t>(i)] =
            (i + 1 == samples) ? hi : lo * std::exp(ratio * i / (samples - 1));
    return out;
}

Staircase prune_frontier(int node_id, std::vector<StaircasePoint> raw) {
    // raw is tau-ascending; keep the first (smallest) tau per count and
    // drop any entry that does not strictly lower the count
    Staircase out;
    out.node_id = node_id;
    int last_n = std::numeric_limits<int>::max();
    for (const StaircasePoint& p : raw) {
        if (p.breakpoints < last_n) {
            out.candidates.push_back(p);
            last_n = p.breakpoints;
        }
    }
    return out;
}

int fit_count(const Expr& f, const CompiledUnary& fn, const Interval& domain, double tau,
              FitMethod method, const BisectConfig& base_cfg) {
    BisectConfig cfg = base_cfg;
    cfg.tolerance = tau;
    switch (method) {
    case FitMethod::Secant:
    case FitMethod::Bisect: {
        const PwaFunction1D p =
            bisect_breakpoints([&fn](double x) { return fn(x); }, domain, cfg);
        return static_cast<int>(p.breakpoint_count());
    }
    case FitMethod::Curvature: {
        const CurvatureConfig ccfg = make_curvature_config(f, domain, tau);
        const PwaFunction1D p = curvature_breakpoints(f, domain, ccfg);
        return static_cast<int>(p.breakpoint_count());
    }
    }
    throw std::logic_error("unreachable fit method");
}

} // namespace

Staircase build_staircase(const Expr& f, const Interval& domain, double tau_lo, double tau_hi,
                          int samples, FitMethod method, const BisectConfig& base_cfg) {
    const std::string var = f.single_variable();
    const CompiledUnary fn(f, var.empty() ? "x" : var);
    std::vector<StaircasePoint> raw;
    raw.reserve(static_cast<std::size_t>(samples));
    for (double tau : log_spaced(tau_lo, tau_hi, samples))
        raw.push_back({tau, fit_count(f, fn, domain, tau, method, base_cfg)});
    return prune_frontier(-1, std::move(raw));
}

std::map<int, Staircase> build_staircases(const DecompGraph& g, double tau_lo, double tau_hi,
                                          int samples, FitMethod method,
                                          const BisectConfig& base_cfg) {
    std::map<int, Staircase> out;
    for (int id : g.unary_ids()) {
        const DecompNode& n = g.node(id);
        const Interval fit_dom = g.node(n.parents[0]).domain;
        const CompiledUnary fn(n.fn, "u");
        std::vector<StaircasePoint> raw;
        raw.reserve(static_cast<std::size_t>(samples));
        for (double tau : log_spaced(tau_lo, tau_hi, samples))
            raw.push_back({tau, fit_count(n.fn, fn, fit_dom, tau, method, base_cfg)});
        Staircase stairs = prune_frontier(id, std::move(raw));
        out.emplace(id, std::move(stairs));
    }
    return out;
}

std::map<int, double> AllocationResult::taus() const {
    std::map<int, double> out;
    for (const AllocationChoice& c : choices)
        out[c.node_id] = c.tau;
    return out;
}

nlohmann::json AllocationResult::to_json() const {
    nlohmann::json jchoices = nlohmann::json::array();
    for (const AllocationChoice& c : choices)
        jchoices.push_back({{"id", c.node_id}, {"tau", c.tau}, {"breakpoints", c.breakpoints}});
    nlohmann::json jcoeffs;
    for (const auto& [id, v] : coefficients)
        jcoeffs[std::to_string(id)] = v;
    return nlohmann::json{{"choices", std::move(jchoices)},
                          {"total_breakpoints", total_breakpoints},
                          {"composed_bound", composed_bound},
                          {"objective", objective},
                          {"coefficients", std::move(jcoeffs)}};
}

AllocationResult minimize_bound(const DecompGraph& g, const std::map<int, Staircase>& staircases,
                                long budget) {
    const std::vector<int> unary = g.unary_ids();
    for (int id : unary)
        if (staircases.find(id) == staircases.end())
            throw std::invalid_argument("missing staircase for unary node " +
                                        std::to_string(id));
    const std::map<int, double> coeffs = g.sensitivity();

    long min_total = 0;
    for (int id : unary)
        min_total += staircases.at(id).min_breakpoints();
    if (budget < min_total)
        throw InfeasibleBudget("budget below the minimal feasible total of " +
                               std::to_string(min_total));

    const std::size_t width = static_cast<std::size_t>(budget) + 1;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // lexicographic DP value: composed bound first, then tolerance sum
    std::vector<double> cost(width, kInf);
    std::vector<double> tausum(width, kInf);
    std::vector<std::vector<int>> pick(unary.size(), std::vector<int>(width, -1));
    cost[0] = 0.0;
    tausum[0] = 0.0;

    std::vector<double> next_cost(width), next_tausum(width);
    for (std::size_t k = 0; k < unary.size(); ++k) {
        const Staircase& stairs = staircases.at(unary[k]);
        const double coeff = coeffs.at(unary[k]);
        std::fill(next_cost.begin(), next_cost.end(), kInf);
        std::fill(next_tausum.begin(), next_tausum.end(), kInf);
        for (std::size_t b = 0; b < width; ++b) {
            if (cost[b] == kInf)
                continue;
            for (std::size_t ci = 0; ci < stairs.candidates.size(); ++ci) {
                const StaircasePoint& cand = stairs.candidates[ci];
                const std::size_t nb = b + static_cast<std::size_t>(cand.breakpoints);
                if (nb >= width)
                    continue;
                const double c = cost[b] + coeff * cand.tau;
                const double ts = tausum[b] + cand.tau;
                if (c < next_cost[nb] || (c == next_cost[nb] && ts < next_tausum[nb])) {
                    next_cost[nb] = c;
                    next_tausum[nb] = ts;
                    pick[k][nb] = static_cast<int>(ci);
                }
            }
        }
        cost.swap(next_cost);
        tausum.swap(next_tausum);
    }

    std::size_t best_b = 0;
    double best_cost = kInf;
    double best_tausum = kInf;
    for (std::size_t b = 0; b < width; ++b) {
        if (cost[b] < best_cost || (cost[b] == best_cost && tausum[b] < best_tausum)) {
            best_cost = cost[b];
            best_tausum = tausum[b];
            best_b = b;
        }
    }
    if (best_cost == kInf)
        throw InfeasibleBudget("no candidate selection fits the budget");

    AllocationResult result;
    result.objective = "min_bound";
    result.coefficients = coeffs;
    result.choices.resize(unary.size());
    std::size_t b = best_b;
    for (std::size_t k = unary.size(); k-- > 0;) {
        const int ci = pick[k][b];
        const StaircasePoint& cand = staircases.at(unary[k]).candidates[static_cast<std::size_t>(ci)];
        result.choices[k] = {unary[k], cand.tau, cand.breakpoints};
        b -= static_cast<std::size_t>(cand.breakpoints);
    }
    for (const AllocationChoice& c : result.choices) {
        result.total_breakpoints += c.breakpoints;
        result.composed_bound += coeffs.at(c.node_id) * c.tau;
    }
    return result;
}

AllocationResult minimize_breakpoints(const DecompGraph& g,
                                      const std::map<int, Staircase>& staircases,
                                      double tolerance) {
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    const std::vector<int> unary = g.unary_ids();
    long lo = 0;
    long hi = 0;
    for (int id : unary) {
        const Staircase& s = staircases.at(id);
        lo += s.min_breakpoints();
        hi += s.max_breakpoints();
    }

    AllocationResult finest = minimize_bound(g, staircases, hi);
    if (finest.composed_bound > tolerance)
        throw InfeasibleTolerance("even the finest candidates only reach a bound of " +
                                  std::to_string(finest.composed_bound));

    // smallest budget whose optimal bound meets the tolerance; the
    // optimal bound is nonincreasing in the budget
    AllocationResult best = std::move(finest);
    while (lo < hi) {
        const long mid = lo + (hi - lo) / 2;
        AllocationResult res = minimize_bound(g, staircases, mid);
        if (res.composed_bound <= tolerance) {
            best = std::move(res);
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    best.objective = "min_breakpoints";
    return best;
}

} // namespace pwax
