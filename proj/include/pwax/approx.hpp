#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pwax/expr.hpp"
#include "pwax/interval.hpp"
#include "pwax/pwa.hpp"

namespace pwax {

struct ToleranceUnreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NegativeInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidThirdDerivativeBound : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateStep : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadCount : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Parameters for the bisection-based placement and for secant error
/// measurement. `breakpoint_tol` is the bisection resolution in input
/// units; when unset it defaults to 1e-6 times the domain width.
struct BisectConfig {
    double tolerance = 0.0;
    std::optional<double> breakpoint_tol;
    int eval_err_samples = 1024;
    double refine_tol = 1e-10;
};

/// Parameters for curvature-bound placement: a bound on |f'''| over the
/// domain and the symbolic second derivative used at each breakpoint.
struct CurvatureConfig {
    double tolerance = 0.0;
    double third_deriv_bound = 0.0;
    Expr second_derivative;
};

using ScalarFn = std::function<double(double)>;

/// Max |secant - f| over [a, b], where the secant interpolates f at the
/// endpoints: coarse scan followed by golden-section refinement of each
/// local maximum bracket.
double max_secant_error(const ScalarFn& f, double a, double b, const BisectConfig& cfg = {});
double max_secant_error(const Expr& f, double a, double b, const BisectConfig& cfg = {});

/// Closed-form bound on the secant error over a width-w interval given
/// |f''| at the left endpoint and a bound on |f'''| over the interval:
///   (d3/8) w^3 + (d2/8) w^2.
double curvature_error_bound(double second_deriv_at_left, double third_deriv_bound, double width);

/// Greedy breakpoint placement: each breakpoint is pushed as far right
/// as bisection on the measured secant error allows while keeping every
/// segment's error within cfg.tolerance. Minimizes the breakpoint count
/// at the cost of many error evaluations.
PwaFunction1D bisect_breakpoints(const ScalarFn& f, const Interval& domain,
                                 const BisectConfig& cfg);
PwaFunction1D bisect_breakpoints(const Expr& f, const Interval& domain, const BisectConfig& cfg);

/// Algebraic placement: each step width is the largest real root of
/// (d3/8) s^3 + (d2/8) s^2 = tolerance, with d2 = |f''| refreshed at
/// every new breakpoint. No error measurements, but the conservative
/// bound usually needs more breakpoints than bisect_breakpoints.
PwaFunction1D curvature_breakpoints(const Expr& f, const Interval& domain,
                                    const CurvatureConfig& cfg);

/// Sound bound on max |f'''| over the domain via interval evaluation of
/// the symbolic third derivative.
double third_derivative_bound(const Expr& f, const Interval& domain);

/// Convenience: curvature config with certified third-derivative bound
/// and symbolic second derivative for f over the domain.
CurvatureConfig make_curvature_config(const Expr& f, const Interval& domain, double tolerance);

/// n equally spaced on-graph breakpoints.
PwaFunction1D uniform_breakpoints(const Expr& f, const Interval& domain, int n);

/// Real roots of c3 s^3 + c2 s^2 + c1 s + c0 = 0 (degenerate leading
/// coefficients fall back to the quadratic/linear case). Closed form
/// plus one Newton polish per root.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

} // namespace pwax
