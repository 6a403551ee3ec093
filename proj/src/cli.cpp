#include "pwax/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "pwax/alloc.hpp"
#include "pwax/approx.hpp"
#include "pwax/bench.hpp"
#include "pwax/chain.hpp"
#include "pwax/expr.hpp"
#include "pwax/pwa.hpp"

namespace pwax::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Interval parse_range(const std::string& text, const std::string& what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument(what + " must be written as lo:hi");
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    return Interval(lo, hi);
}

std::map<std::string, Interval> parse_boxes(const std::vector<std::string>& boxes) {
    std::map<std::string, Interval> out;
    for (const std::string& b : boxes) {
        const auto eq = b.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--box must be written as name=lo:hi");
        out[b.substr(0, eq)] = parse_range(b.substr(eq + 1), "--box range");
    }
    return out;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos)
            comma = text.size();
        out.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

FitMethod method_from_flag(int method) {
    if (method == 1)
        return FitMethod::Bisect;
    if (method == 2)
        return FitMethod::Curvature;
    throw std::invalid_argument("--method must be 1 or 2");
}

std::map<int, double> assign_taus(const DecompGraph& g, double uniform_tau,
                                  const std::string& tau_list) {
    const std::vector<int> unary = g.unary_ids();
    std::map<int, double> taus;
    if (unary.empty())
        return taus; // nothing to fit; affine graphs are exact
    if (!tau_list.empty()) {
        const std::vector<double> values = parse_csv_doubles(tau_list);
        if (values.size() != unary.size())
            throw std::invalid_argument("--tols needs exactly " +
                                        std::to_string(unary.size()) +
                                        " values (one per unary node)");
        for (std::size_t i = 0; i < unary.size(); ++i)
            taus[unary[i]] = values[i];
    } else {
        if (!(uniform_tau > 0.0))
            throw std::invalid_argument("either --tol or --tols is required");
        for (int id : unary)
            taus[id] = uniform_tau;
    }
    return taus;
}

// deterministic sample points inside the box: a grid for one input,
// seeded uniform samples otherwise
std::vector<std::map<std::string, double>> sample_points(
    const std::map<std::string, Interval>& box, int grid, unsigned long seed) {
    std::vector<std::map<std::string, double>> points;
    if (box.size() == 1) {
        const auto& [name, iv] = *box.begin();
        points.reserve(static_cast<std::size_t>(grid));
        for (int i = 0; i < grid; ++i) {
            const double t = static_cast<double>(i) / (grid - 1);
            points.push_back({{name, i + 1 == grid ? iv.hi : iv.lo + t * iv.width()}});
        }
        return points;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    points.reserve(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        std::map<std::string, double> p;
        for (const auto& [name, iv] : box)
            p[name] = iv.lo + unit(rng) * iv.width();
        points.push_back(std::move(p));
    }
    return points;
}

// dense grid over a 2-D box (used by the allocation validation)
double grid_max_error(const DecompGraph& g, int per_axis) {
    const auto& box = g.input_box();
    double worst = 0.0;
    if (box.size() == 2) {
        const auto it1 = box.begin();
        const auto it2 = std::next(it1);
        for (int i = 0; i < per_axis; ++i) {
            const double t1 = static_cast<double>(i) / (per_axis - 1);
            const double x1 =
                i + 1 == per_axis ? it1->second.hi : it1->second.lo + t1 * it1->second.width();
            for (int j = 0; j < per_axis; ++j) {
                const double t2 = static_cast<double>(j) / (per_axis - 1);
                const double x2 = j + 1 == per_axis ? it2->second.hi
                                                    : it2->second.lo + t2 * it2->second.width();
                const auto [exact, approx] =
                    g.eval_composed({{it1->first, x1}, {it2->first, x2}});
                worst = std::max(worst, std::abs(approx - exact));
            }
        }
        return worst;
    }
    for (const auto& point : sample_points(box, per_axis * per_axis, 20240801)) {
        const auto [exact, approx] = g.eval_composed(point);
        worst = std::max(worst, std::abs(approx - exact));
    }
    return worst;
}

// ---------------------------------------------------------------------------

struct ApproxArgs {
    std::string f;
    std::string domain;
    double tol = 0.0;
    int method = 1;
    double delta_x = 0.0;
    int err_samples = 1024;
    int grid = 2001;
    std::string out = ".";
};

int cmd_approx(const ApproxArgs& args) {
    if (args.grid < 2)
        throw std::invalid_argument("--grid must be at least 2");
    const Expr f = parse_expression(args.f);
    const Interval domain = parse_range(args.domain, "--domain");
    BisectConfig cfg;
    cfg.tolerance = args.tol;
    cfg.eval_err_samples = args.err_samples;
    if (args.delta_x > 0.0)
        cfg.breakpoint_tol = args.delta_x;

    PwaFunction1D p = [&] {
        if (args.method == 2) {
            CurvatureConfig ccfg = make_curvature_config(f, domain, args.tol);
            return curvature_breakpoints(f, domain, ccfg);
        }
        return bisect_breakpoints(f, domain, cfg);
    }();

    // re-measure every segment against the tolerance before reporting
    double worst_err = 0.0;
    const auto& bps = p.breakpoints();
    for (std::size_t i = 0; i + 1 < bps.size(); ++i)
        worst_err = std::max(worst_err, max_secant_error(f, bps[i], bps[i + 1], cfg));
    if (worst_err > args.tol + 1e-8) {
        std::cerr << "verification failed: segment error " << fmt(worst_err)
                  << " exceeds the tolerance\n";
        return 1;
    }
    if (args.method == 2) {
        const std::string var = f.single_variable();
        const Expr d2 = f.derivative(var).derivative(var);
        const double d3 = third_derivative_bound(f, domain);
        std::map<std::string, double> bind;
        for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
            bind[var] = bps[i];
            const double bound =
                curvature_error_bound(std::abs(d2.eval(bind)), d3, bps[i + 1] - bps[i]);
            std::cout << "segment [" << fmt(bps[i]) << ", " << fmt(bps[i + 1])
                      << "] bound: " << fmt(bound) << "\n";
            if (bound > args.tol * (1.0 + 1e-9) + 1e-12) {
                std::cerr << "verification failed: segment bound " << fmt(bound)
                          << " exceeds the tolerance\n";
                return 1;
            }
        }
    }

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);
    write_json(out_dir / "pwa.json", p.to_json());

    std::string csv = "x,f,approx,error\n";
    const std::string var = f.single_variable();
    const CompiledUnary fn(f, var.empty() ? "x" : var);
    for (int i = 0; i < args.grid; ++i) {
        const double t = static_cast<double>(i) / (args.grid - 1);
        const double x = i + 1 == args.grid ? domain.hi : domain.lo + t * domain.width();
        const double fx = fn(x);
        const double px = p.eval(x);
        csv += fmt(x) + "," + fmt(fx) + "," + fmt(px) + "," + fmt(std::abs(px - fx)) + "\n";
    }
    write_text(out_dir / "approx_samples.csv", csv);

    std::cout << "breakpoints: " << p.breakpoint_count() << "\n";
    std::cout << "max segment error: " << fmt(worst_err) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct ComposeArgs {
    std::string f;
    std::vector<std::string> boxes;
    double tol = 0.0;
    std::string tols;
    int method = 1;
    std::string mode = "pwa";
    int grid = 0;
    unsigned long seed = 1;
    std::string out = ".";
};

int cmd_compose(const ComposeArgs& args) {
    if (args.grid != 0 && args.grid < 2)
        throw std::invalid_argument("--grid must be at least 2");
    const Expr f = parse_expression(args.f);
    const auto box = parse_boxes(args.boxes);
    DecompGraph g = decompose(f, box);
    g.propagate_domains();
    const std::map<int, double> taus = assign_taus(g, args.tol, args.tols);

    const bool secant_mode = args.mode == "secant";
    if (!secant_mode && args.mode != "pwa")
        throw std::invalid_argument("--mode must be pwa or secant");
    g.fit_tolerances(taus, secant_mode ? FitMethod::Secant : method_from_flag(args.method));

    std::map<int, double> eps_a;
    std::map<int, double> eps_b;
    if (secant_mode) {
        eps_a = g.propagate_error(ErrorMode::Secant);
    } else {
        eps_a = g.propagate_error(ErrorMode::SlopeBound);
        eps_b = g.propagate_error(ErrorMode::DerivBound);
    }
    const double eps_out = secant_mode ? eps_a.at(g.output()) : eps_b.at(g.output());

    // node table
    for (const DecompNode& n : g.nodes()) {
        std::cout << "node " << n.id << " ";
        switch (n.kind) {
        case NodeKind::Input: std::cout << "input(" << n.input_name << ")"; break;
        case NodeKind::Affine: std::cout << "affine"; break;
        case NodeKind::Unary: std::cout << "unary(" << n.fn.str() << ")"; break;
        }
        std::cout << " domain " << to_string(n.domain) << " tau " << fmt(n.tau);
        if (secant_mode)
            std::cout << " eps " << fmt(eps_a.at(n.id));
        else
            std::cout << " eps_slope " << fmt(eps_a.at(n.id)) << " eps_deriv "
                      << fmt(eps_b.at(n.id));
        std::cout << "\n";
    }

    // internal verification on sample points
    const int grid = args.grid > 0 ? args.grid : 2001;
    const auto points = sample_points(box, grid, args.seed);
    double worst = 0.0;
    for (const auto& point : points) {
        const auto [exact, approx] = g.eval_composed(point);
        worst = std::max(worst, std::abs(approx - exact));
    }
    if (worst > eps_out * (1.0 + 1e-9) + 1e-12) {
        std::cerr << "verification failed: sampled error " << fmt(worst)
                  << " exceeds the propagated bound " << fmt(eps_out) << "\n";
        return 1;
    }

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);
    nlohmann::json j = g.to_json();
    auto eps_json = [](const std::map<int, double>& eps) {
        nlohmann::json out;
        for (const auto& [id, v] : eps)
            out[std::to_string(id)] = v;
        return out;
    };
    if (secant_mode) {
        j["eps_secant"] = eps_json(eps_a);
    } else {
        j["eps_slope"] = eps_json(eps_a);
        j["eps_deriv"] = eps_json(eps_b);
    }
    write_json(out_dir / "graph.json", j);

    std::string csv;
    for (const auto& [name, iv] : box)
        csv += name + ",";
    csv += "exact,approx,error,eps_bound\n";
    for (const auto& point : points) {
        const auto [exact, approx] = g.eval_composed(point);
        for (const auto& [name, value] : point)
            csv += fmt(value) + ",";
        csv += fmt(exact) + "," + fmt(approx) + "," + fmt(std::abs(approx - exact)) + "," +
               fmt(eps_out) + "\n";
    }
    write_text(out_dir / "compose_samples.csv", csv);

    std::cout << "sampled max error: " << fmt(worst) << "\n";
    std::cout << "output eps: " << fmt(eps_out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct AllocateArgs {
    std::string f;
    std::vector<std::string> boxes;
    std::string bench;
    long budget = -1;
    double tolerance = -1.0;
    int samples = 500;
    double tau_lo = 1e-3;
    double tau_hi = 1.0;
    int method = 1;
    int err_samples = 128;
    bool uniform_baseline = false;
    int grid = 0;
    unsigned long seed = 1;
    std::string out = ".";
};

int cmd_allocate(const AllocateArgs& args) {
    if (args.grid != 0 && args.grid < 2)
        throw std::invalid_argument("--grid must be at least 2");
    Expr f;
    std::map<std::string, Interval> box;
    if (args.bench == "tower") {
        f = tower_expression();
        box = tower_box();
    } else if (!args.bench.empty()) {
        throw std::invalid_argument("unknown bench: " + args.bench);
    } else {
        f = parse_expression(args.f);
        box = parse_boxes(args.boxes);
    }
    const bool has_budget = args.budget >= 0;
    const bool has_tolerance = args.tolerance >= 0.0;
    if (has_budget == has_tolerance)
        throw std::invalid_argument("exactly one of --budget and --tolerance is required");

    DecompGraph g = decompose(f, box);
    g.propagate_domains();
    const std::vector<int> unary = g.unary_ids();
    const int grid = args.grid > 0 ? args.grid : 2001; // per axis

    BisectConfig cfg;
    cfg.eval_err_samples = args.err_samples;

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);

    if (args.uniform_baseline) {
        if (!has_budget)
            throw std::invalid_argument("--uniform-baseline needs --budget");
        const long k = static_cast<long>(unary.size());
        if (args.budget < 2 * k)
            throw InfeasibleBudget("uniform baseline needs at least 2 breakpoints per node");
        std::map<int, int> counts;
        const long base = args.budget / k;
        long extra = args.budget % k;
        for (int id : unary) {
            counts[id] = static_cast<int>(base + (extra > 0 ? 1 : 0));
            if (extra > 0)
                --extra;
        }
        g.fit_uniform(counts, cfg);
        const double bound = g.propagate_error(ErrorMode::DerivBound).at(g.output());
        const double empirical = grid_max_error(g, grid);

        nlohmann::json j;
        j["objective"] = "uniform_baseline";
        j["budget"] = args.budget;
        nlohmann::json jchoices = nlohmann::json::array();
        long total = 0;
        for (int id : unary) {
            jchoices.push_back({{"id", id},
                                {"tau", g.node(id).tau},
                                {"breakpoints", counts.at(id)}});
            total += counts.at(id);
        }
        j["choices"] = std::move(jchoices);
        j["total_breakpoints"] = total;
        j["composed_bound"] = bound;
        j["empirical_max_error"] = empirical;
        write_json(out_dir / "allocation.json", j);

        std::cout << "total breakpoints: " << total << "\n";
        std::cout << "composed bound: " << fmt(bound) << "\n";
        std::cout << "empirical max error: " << fmt(empirical) << "\n";
        return empirical <= bound * (1.0 + 1e-9) + 1e-12 ? 0 : 1;
    }

    const auto staircases = build_staircases(g, args.tau_lo, args.tau_hi, args.samples,
                                             method_from_flag(args.method), cfg);
    AllocationResult result = has_budget
                                  ? minimize_bound(g, staircases, args.budget)
                                  : minimize_breakpoints(g, staircases, args.tolerance);

    g.fit_tolerances(result.taus(), method_from_flag(args.method), cfg);
    const double bound = g.propagate_error(ErrorMode::DerivBound).at(g.output());
    if (std::abs(bound - result.composed_bound) > 1e-9 * std::max(1.0, bound)) {
        std::cerr << "verification failed: refit bound " << fmt(bound)
                  << " does not match the allocation bound " << fmt(result.composed_bound)
                  << "\n";
        return 1;
    }
    const double empirical = grid_max_error(g, grid);
    if (empirical > bound * (1.0 + 1e-9) + 1e-12) {
        std::cerr << "verification failed: empirical error " << fmt(empirical)
                  << " exceeds the bound " << fmt(bound) << "\n";
        return 1;
    }

    nlohmann::json j = result.to_json();
    j["empirical_max_error"] = empirical;
    write_json(out_dir / "allocation.json", j);
    write_json(out_dir / "graph.json", g.to_json());

    std::cout << "total breakpoints: " << result.total_breakpoints << "\n";
    std::cout << "composed bound: " << fmt(result.composed_bound) << "\n";
    std::cout << "empirical max error: " << fmt(empirical) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct StaircaseArgs {
    std::string f;
    std::string domain;
    std::string bench;
    double tau_lo = 1e-4;
    double tau_hi = 1.0;
    int samples = 500;
    int method = 1;
    int err_samples = 1024;
    std::string out = ".";
};

int cmd_staircase(const StaircaseArgs& args) {
    BisectConfig cfg;
    cfg.eval_err_samples = args.err_samples;
    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);

    if (args.bench == "table1") {
        for (const BenchFunction& bench : table1_functions()) {
            std::string csv = "tau,breakpoints_method1,breakpoints_method2\n";
            const std::string var = bench.f.single_variable();
            const CompiledUnary fn(bench.f, var);
            const double ratio = std::log(args.tau_hi / args.tau_lo);
            for (int i = 0; i < args.samples; ++i) {
                const double tau = i + 1 == args.samples
                                       ? args.tau_hi
                                       : args.tau_lo * std::exp(ratio * i / (args.samples - 1));
                BisectConfig c = cfg;
                c.tolerance = tau;
                const auto p1 = bisect_breakpoints(bench.f, bench.domain, c);
                const auto p2 = curvature_breakpoints(
                    bench.f, bench.domain, make_curvature_config(bench.f, bench.domain, tau));
                csv += fmt(tau) + "," + std::to_string(p1.breakpoint_count()) + "," +
                       std::to_string(p2.breakpoint_count()) + "\n";
            }
            write_text(out_dir / ("staircase_" + bench.name + ".csv"), csv);
        }
        std::cout << "wrote 4 staircase files\n";
        return 0;
    }
    if (!args.bench.empty())
        throw std::invalid_argument("unknown bench: " + args.bench);

    const Expr f = parse_expression(args.f);
    const Interval domain = parse_range(args.domain, "--domain");
    const Staircase stairs =
        build_staircase(f, domain, args.tau_lo, args.tau_hi, args.samples,
                        method_from_flag(args.method), cfg);
    for (std::size_t i = 1; i < stairs.candidates.size(); ++i) {
        if (stairs.candidates[i].tau <= stairs.candidates[i - 1].tau ||
            stairs.candidates[i].breakpoints >= stairs.candidates[i - 1].breakpoints) {
            std::cerr << "verification failed: staircase frontier is not strictly monotone\n";
            return 1;
        }
    }
    std::string csv = "tau,breakpoints\n";
    for (const StaircasePoint& p : stairs.candidates)
        csv += fmt(p.tau) + "," + std::to_string(p.breakpoints) + "\n";
    write_text(out_dir / "staircase.csv", csv);
    std::cout << "frontier points: " << stairs.candidates.size() << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"certified piecewise-affine approximation toolkit"};
    app.require_subcommand(1);

    ApproxArgs approx_args;
    CLI::App* approx = app.add_subcommand(
        "approx", "fit one function with a certified breakpoint placement");
    approx->add_option("--f", approx_args.f, "expression in one variable")->required();
    approx->add_option("--domain", approx_args.domain, "domain lo:hi")->required();
    approx->add_option("--tol", approx_args.tol, "error tolerance")->required();
    approx->add_option("--method", approx_args.method,
                       "1: bisection on measured error, 2: curvature-bound steps");
    approx->add_option("--delta-x", approx_args.delta_x, "bisection resolution");
    approx->add_option("--err-samples", approx_args.err_samples, "error scan samples");
    approx->add_option("--grid", approx_args.grid, "sample CSV grid size");
    approx->add_option("--out", approx_args.out, "output directory");

    ComposeArgs compose_args;
    CLI::App* compose = app.add_subcommand(
        "compose", "decompose, fit every node, and propagate error bounds");
    compose->add_option("--f", compose_args.f, "expression")->required();
    compose->add_option("--box", compose_args.boxes, "input box name=lo:hi (repeatable)")
        ->required();
    compose->add_option("--tol", compose_args.tol, "uniform per-node tolerance");
    compose->add_option("--tols", compose_args.tols, "per-node tolerances, comma separated");
    compose->add_option("--method", compose_args.method, "fit method (1 or 2)");
    compose->add_option("--mode", compose_args.mode, "pwa (default) or secant");
    compose->add_option("--grid", compose_args.grid, "validation sample count");
    compose->add_option("--seed", compose_args.seed, "sampling seed");
    compose->add_option("--out", compose_args.out, "output directory");

    AllocateArgs allocate_args;
    CLI::App* allocate = app.add_subcommand(
        "allocate", "optimally split a tolerance or breakpoint budget across nodes");
    allocate->add_option("--f", allocate_args.f, "expression");
    allocate->add_option("--box", allocate_args.boxes, "input box name=lo:hi (repeatable)");
    allocate->add_option("--bench", allocate_args.bench, "built-in benchmark (tower)");
    allocate->add_option("--budget", allocate_args.budget, "total breakpoint budget");
    allocate->add_option("--tolerance", allocate_args.tolerance, "composed bound target");
    allocate->add_option("--samples", allocate_args.samples, "staircase tolerance samples");
    allocate->add_option("--tau-lo", allocate_args.tau_lo, "staircase low tolerance");
    allocate->add_option("--tau-hi", allocate_args.tau_hi, "staircase high tolerance");
    allocate->add_option("--method", allocate_args.method, "fit method (1 or 2)");
    allocate->add_option("--err-samples", allocate_args.err_samples, "error scan samples");
    allocate->add_flag("--uniform-baseline", allocate_args.uniform_baseline,
                       "skip optimization; spread the budget uniformly");
    allocate->add_option("--grid", allocate_args.grid, "validation grid (per axis)");
    allocate->add_option("--seed", allocate_args.seed, "sampling seed");
    allocate->add_option("--out", allocate_args.out, "output directory");

    StaircaseArgs staircase_args;
    CLI::App* staircase = app.add_subcommand(
        "staircase", "tolerance vs breakpoint-count frontier of one function");
    staircase->add_option("--f", staircase_args.f, "expression in one variable");
    staircase->add_option("--domain", staircase_args.domain, "domain lo:hi");
    staircase->add_option("--bench", staircase_args.bench, "built-in benchmark (table1)");
    staircase->add_option("--tau-lo", staircase_args.tau_lo, "low tolerance");
    staircase->add_option("--tau-hi", staircase_args.tau_hi, "high tolerance");
    staircase->add_option("--samples", staircase_args.samples, "tolerance samples");
    staircase->add_option("--method", staircase_args.method, "fit method (1 or 2)");
    staircase->add_option("--err-samples", staircase_args.err_samples, "error scan samples");
    staircase->add_option("--out", staircase_args.out, "output directory");

    std::vector<std::string> argv_storage;
    argv_storage.emplace_back("pwax");
    for (const std::string& a : args)
        argv_storage.push_back(a);
    std::vector<char*> argv;
    argv.reserve(argv_storage.size());
    for (std::string& a : argv_storage)
        argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (approx->parsed())
            return cmd_approx(approx_args);
        if (compose->parsed())
            return cmd_compose(compose_args);
        if (allocate->parsed())
            return cmd_allocate(allocate_args);
        if (staircase->parsed())
            return cmd_staircase(staircase_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace pwax::cli
