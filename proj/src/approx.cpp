#include "pwax/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pwax {

namespace {

constexpr double kGoldenRatio = 0.61803398874989484820;

// golden-section maximization of g on [lo, hi] down to x-resolution xtol
double golden_max(const ScalarFn& g, double lo, double hi, double xtol) {
    double a = lo, b = hi;
    double c = b - kGoldenRatio * (b - a);
    double d = a + kGoldenRatio * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > xtol) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - kGoldenRatio * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + kGoldenRatio * (b - a);
            gd = g(d);
        }
    }
    return std::max(gc, gd);
}

ScalarFn compile(const Expr& f) {
    const std::string var = f.single_variable();
    return CompiledUnary(f, var.empty() ? "x" : var);
}

} // namespace

double max_secant_error(const ScalarFn& f, double a, double b, const BisectConfig& cfg) {
    if (!(a < b))
        throw std::invalid_argument("max_secant_error requires a < b");
    const double fa = f(a);
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb))
        throw EvalDomainError("function not evaluable at the interval endpoints");
    const double slope = (fb - fa) / (b - a);
    auto err = [&](double x) { return std::abs(fa + slope * (x - a) - f(x)); };

    const int samples = std::max(cfg.eval_err_samples, 8);
    const double step = (b - a) / samples;
    std::vector<double> g(static_cast<std::size_t>(samples) + 1);
    for (int i = 0; i <= samples; ++i) {
        const double x = (i == samples) ? b : a + i * step;
        g[i] = err(x);
        if (!std::isfinite(g[i]))
            throw EvalDomainError("function not evaluable inside the interval");
    }

    // refine every interior local maximum bracket
    const double xtol = std::max(cfg.refine_tol * (b - a), 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)));
    double best = 0.0;
    for (int i = 1; i < samples; ++i) {
        best = std::max(best, g[i]);
        if (g[i] >= g[i - 1] && g[i] >= g[i + 1])
            best = std::max(best, golden_max(err, a + (i - 1) * step, a + (i + 1) * step, xtol));
    }
    return best;
}

double max_secant_error(const Expr& f, double a, double b, const BisectConfig& cfg) {
    return max_secant_error(compile(f), a, b, cfg);
}

double curvature_error_bound(double second_deriv_at_left, double third_deriv_bound,
                             double width) {
    if (second_deriv_at_left < 0.0 || third_deriv_bound < 0.0 || width < 0.0)
        throw NegativeInput("curvature_error_bound requires nonnegative inputs");
    return (third_deriv_bound / 8.0) * width * width * width +
           (second_deriv_at_left / 8.0) * width * width;
}

PwaFunction1D bisect_breakpoints(const ScalarFn& f, const Interval& domain,
                                 const BisectConfig& cfg) {
    if (!(cfg.tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    const double lo = domain.lo;
    const double hi = domain.hi;
    if (!(lo < hi))
        throw std::invalid_argument("domain must have positive width");
    const double tol = cfg.tolerance;
    const double delta = cfg.breakpoint_tol.value_or(1e-6 * (hi - lo));
    if (!(delta > 0.0))
        throw std::invalid_argument("breakpoint tolerance must be positive");
    const double collapse =
        4.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(lo), std::abs(hi), 1.0});

    std::vector<double> bps{lo};
    double e = max_secant_error(f, lo, hi, cfg);
    while (e > tol) {
        const double xk = bps.back();
        double l = xk;
        double u = hi;
        double m = 0.5 * (l + u);
        // the guard reuses the stale error from the previous round on
        // first entry; the body recomputes it before it is acted on
        while (u - l > delta || e > tol) {
            if (m - xk <= collapse)
                throw ToleranceUnreachable("bisection collapsed; tolerance unreachable");
            e = max_secant_error(f, xk, m, cfg);
            if (e < tol)
                l = m;
            else if (e > tol)
                u = m;
            else {
                l = m;
                u = m;
            }
            m = 0.5 * (l + u);
            if (u - l <= collapse && e > tol)
                throw ToleranceUnreachable("bisection collapsed; tolerance unreachable");
        }
        if (l <= xk + collapse)
            throw ToleranceUnreachable("no breakpoint progress; tolerance unreachable");
        bps.push_back(l);
        e = max_secant_error(f, l, hi, cfg);
    }
    bps.push_back(hi);

    std::vector<double> values(bps.size());
    for (std::size_t i = 0; i < bps.size(); ++i)
        values[i] = f(bps[i]);
    return PwaFunction1D(std::move(bps), std::move(values));
}

PwaFunction1D bisect_breakpoints(const Expr& f, const Interval& domain, const BisectConfig& cfg) {
    return bisect_breakpoints(compile(f), domain, cfg);
}

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    auto poly = [&](double s) { return ((c3 * s + c2) * s + c1) * s + c0; };
    auto dpoly = [&](double s) { return (3.0 * c3 * s + 2.0 * c2) * s + c1; };
    auto polish = [&](double s) {
        for (int i = 0; i < 2; ++i) {
            const double d = dpoly(s);
            if (d == 0.0)
                break;
            const double step = poly(s) / d;
            if (!std::isfinite(step))
                break;
            s -= step;
        }
        return s;
    };

    std::vector<double> roots;
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    if (scale == 0.0)
        return roots;
    if (std::abs(c3) <= 1e-300 * scale || c3 == 0.0) {
        if (std::abs(c2) <= 1e-300 * scale || c2 == 0.0) {
            if (c1 != 0.0)
                roots.push_back(-c0 / c1);
            return roots;
        }
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0)
            return roots;
        const double r = std::sqrt(disc);
        // stable quadratic formula
        const double q = -0.5 * (c1 + std::copysign(r, c1));
        roots.push_back(polish(q / c2));
        if (q != 0.0)
            roots.push_back(polish(c0 / q));
        else
            roots.push_back(polish(-c1 / c2 - roots[0]));
        return roots;
    }

    // monic cubic s^3 + a s^2 + b s + c, depressed via s = t - a/3
    const double a = c2 / c3;
    const double b = c1 / c3;
    const double c = c0 / c3;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double shift = -a / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;

    if (disc > 0.0) {
        // one real root (Cardano)
        const double r = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + r);
        const double v = std::cbrt(-q / 2.0 - r);
        roots.push_back(polish(u + v + shift));
    } else if (p == 0.0 && q == 0.0) {
        roots.push_back(polish(shift));
    } else {
        // three real roots (trigonometric form)
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back(polish(m * std::cos(theta - 2.0 * M_PI * k / 3.0) + shift));
    }
    return roots;
}

PwaFunction1D curvature_breakpoints(const Expr& f, const Interval& domain,
                                    const CurvatureConfig& cfg) {
    if (!(cfg.tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    if (cfg.third_deriv_bound < 0.0 || !std::isfinite(cfg.third_deriv_bound))
        throw InvalidThirdDerivativeBound("third derivative bound must be finite and >= 0");
    const double lo = domain.lo;
    const double hi = domain.hi;
    if (!(lo < hi))
        throw std::invalid_argument("domain must have positive width");
    const double tol = cfg.tolerance;
    const double d3 = cfg.third_deriv_bound;
    const std::string var = cfg.second_derivative.single_variable();
    const CompiledUnary d2fn(cfg.second_derivative, var.empty() ? "x" : var);
    const double progress = 1e-12 * (hi - lo);

    std::vector<double> bps{lo};
    double d2 = std::abs(d2fn(lo));
    double e = curvature_error_bound(d2, d3, hi - lo);
    while (e > tol) {
        const double xk = bps.back();
        // largest real step s with (d3/8) s^3 + (d2/8) s^2 = tol that
        // stays inside the domain
        double best = -std::numeric_limits<double>::infinity();
        for (double s : cubic_real_roots(d3 / 8.0, d2 / 8.0, 0.0, -tol)) {
            const double x = xk + s;
            if (x >= lo && x <= hi && x > xk + progress)
                best = std::max(best, x);
        }
        if (!std::isfinite(best)) {
            if (d2 == 0.0 && d3 == 0.0)
                throw DegenerateStep("flat curvature but remaining-span bound exceeds tolerance");
            throw DegenerateStep("no admissible breakpoint step");
        }
        if (best >= hi - progress)
            break;
        bps.push_back(best);
        d2 = std::abs(d2fn(best));
        e = curvature_error_bound(d2, d3, hi - best);
    }
    bps.push_back(hi);

    const ScalarFn fn = compile(f);
    std::vector<double> values(bps.size());
    for (std::size_t i = 0; i < bps.size(); ++i)
        values[i] = fn(bps[i]);
    return PwaFunction1D(std::move(bps), std::move(values));
}

double third_derivative_bound(const Expr& f, const Interval& domain) {
    const std::string var = f.single_variable();
    if (var.empty())
        return 0.0;
    const Expr d3 = f.derivative(var).derivative(var).derivative(var);
    return d3.eval(std::map<std::string, Interval>{{var, domain}}).max_abs();
}

CurvatureConfig make_curvature_config(const Expr& f, const Interval& domain, double tolerance) {
    CurvatureConfig cfg;
    cfg.tolerance = tolerance;
    const std::string var = f.single_variable();
    if (var.empty()) {
        cfg.second_derivative = Expr::constant(0.0);
        cfg.third_deriv_bound = 0.0;
        return cfg;
    }
    cfg.second_derivative = f.derivative(var).derivative(var);
    cfg.third_deriv_bound = third_derivative_bound(f, domain);
    return cfg;
}

PwaFunction1D uniform_breakpoints(const Expr& f, const Interval& domain, int n) {
    if (n < 2)
        throw BadCount("uniform_breakpoints requires n >= 2");
    if (!(domain.lo < domain.hi))
        throw std::invalid_argument("domain must have positive width");
    std::vector<double> bps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        bps[static_cast<std::size_t>(i)] =
            (i + 1 == n) ? domain.hi : domain.lo + domain.width() * i / (n - 1);
    const ScalarFn fn = compile(f);
    std::vector<double> values(bps.size());
    for (std::size_t i = 0; i < bps.size(); ++i)
        values[i] = fn(bps[i]);
    return PwaFunction1D(std::move(bps), std::move(values));
}

} // namespace pwax
