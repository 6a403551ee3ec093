#pragma once

#include <vector>

#include "json.hpp"

#include "pwax/expr.hpp"
#include "pwax/interval.hpp"

namespace pwax {

struct OutOfDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PwaSegment {
    Interval domain;
    double slope = 0.0;
    double intercept = 0.0;
};

/// Continuous piecewise-affine function on an interval, stored as
/// strictly increasing breakpoints with their values. When built from a
/// source function the values lie on its graph, so every segment is a
/// secant of that function.
class PwaFunction1D {
  public:
    PwaFunction1D(std::vector<double> breakpoints, std::vector<double> values);

    /// On-graph interpolant of f at the given breakpoints.
    static PwaFunction1D interpolate(const CompiledUnary& f, std::vector<double> breakpoints);

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    std::size_t breakpoint_count() const { return xs_.size(); }
    std::size_t segment_count() const { return xs_.size() - 1; }
    Interval domain() const { return {xs_.front(), xs_.back()}; }

    /// Linear interpolation; throws OutOfDomain outside [x_0, x_N].
    double eval(double x) const;
    /// Like eval, but extends the boundary segments linearly beyond the
    /// domain. The extension has the same Lipschitz constant as the
    /// interior, which keeps composed error bounds valid for inputs
    /// perturbed slightly outside the fit domain.
    double eval_extended(double x) const;

    /// Largest |slope| over all segments.
    double max_abs_slope() const;

    std::vector<PwaSegment> segments() const;

    nlohmann::json to_json() const;
    static PwaFunction1D from_json(const nlohmann::json& j);

  private:
    double eval_segment(std::size_t seg, double x) const;
    std::size_t segment_index(double x) const;

    std::vector<double> xs_;
    std::vector<double> ys_;
};

/// Max |p(x) - f(x)| over a uniform grid of `grid_size` points plus all
/// breakpoints. f must have at most one free variable.
double empirical_max_error(const PwaFunction1D& p, const Expr& f, int grid_size);

} // namespace pwax
