#include "pwax/pwa.hpp"

#include <algorithm>
#include <cmath>

namespace pwax {

PwaFunction1D::PwaFunction1D(std::vector<double> breakpoints, std::vector<double> values)
    : xs_(std::move(breakpoints)), ys_(std::move(values)) {
    if (xs_.size() < 2)
        throw std::invalid_argument("a PWA function needs at least two breakpoints");
    if (ys_.size() != xs_.size())
        throw std::invalid_argument("breakpoint and value counts differ");
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i]))
            throw std::invalid_argument("breakpoints and values must be finite");
        if (i > 0 && xs_[i] <= xs_[i - 1])
            throw std::invalid_argument("breakpoints must be strictly increasing");
    }
}

PwaFunction1D PwaFunction1D::interpolate(const CompiledUnary& f, std::vector<double> breakpoints) {
    std::vector<double> values(breakpoints.size());
    for (std::size_t i = 0; i < breakpoints.size(); ++i)
        values[i] = f(breakpoints[i]);
    return PwaFunction1D(std::move(breakpoints), std::move(values));
}

std::size_t PwaFunction1D::segment_index(double x) const {
    // boundary points belong to the segment on their left (except x_0)
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin())
        return 0;
    std::size_t idx = static_cast<std::size_t>(it - xs_.begin());
    if (it != xs_.end() && *it == x)
        return idx == 0 ? 0 : idx - 1;
    return std::min(idx - 1, xs_.size() - 2);
}

double PwaFunction1D::eval_segment(std::size_t seg, double x) const {
    const double slope = (ys_[seg + 1] - ys_[seg]) / (xs_[seg + 1] - xs_[seg]);
    return ys_[seg] + slope * (x - xs_[seg]);
}

double PwaFunction1D::eval(double x) const {
    if (x < xs_.front() || x > xs_.back())
        throw OutOfDomain("PWA evaluation outside the domain");
    // breakpoints return their stored values exactly
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it != xs_.end() && *it == x)
        return ys_[static_cast<std::size_t>(it - xs_.begin())];
    return eval_segment(segment_index(x), x);
}

double PwaFunction1D::eval_extended(double x) const {
    if (x < xs_.front())
        return eval_segment(0, x);
    if (x > xs_.back())
        return eval_segment(xs_.size() - 2, x);
    return eval(x);
}

double PwaFunction1D::max_abs_slope() const {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
        const double slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        best = std::max(best, std::abs(slope));
    }
    return best;
}

std::vector<PwaSegment> PwaFunction1D::segments() const {
    std::vector<PwaSegment> out;
    out.reserve(xs_.size() - 1);
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
        PwaSegment seg;
        seg.domain = Interval(xs_[i], xs_[i + 1]);
        seg.slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        seg.intercept = ys_[i] - seg.slope * xs_[i];
        out.push_back(seg);
    }
    return out;
}

nlohmann::json PwaFunction1D::to_json() const {
    return nlohmann::json{{"breakpoints", xs_}, {"values", ys_}};
}

PwaFunction1D PwaFunction1D::from_json(const nlohmann::json& j) {
    return PwaFunction1D(j.at("breakpoints").get<std::vector<double>>(),
                         j.at("values").get<std::vector<double>>());
}

double empirical_max_error(const PwaFunction1D& p, const Expr& f, int grid_size) {
    if (grid_size < 2)
        throw std::invalid_argument("grid_size must be at least 2");
    const std::string var = f.single_variable();
    const CompiledUnary fn(f, var.empty() ? "x" : var);
    const Interval dom = p.domain();

    double worst = 0.0;
    auto probe = [&](double x) {
        const double err = std::abs(p.eval(x) - fn(x));
        if (!std::isfinite(err))
            throw EvalDomainError("function not evaluable on the PWA domain");
        worst = std::max(worst, err);
    };
    for (int i = 0; i < grid_size; ++i) {
        const double t = static_cast<double>(i) / (grid_size - 1);
        probe(i + 1 == grid_size ? dom.hi : dom.lo + t * dom.width());
    }
    for (double x : p.breakpoints())
        probe(x);
    return worst;
}

} // namespace pwax
