#include "pwax/interval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pwax {

namespace {

void check_valid(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("interval endpoints must be finite");
    if (lo > hi)
        throw std::invalid_argument("interval requires lo <= hi");
}

// outward widening by a relative slack; keeps zero endpoints exact
Interval widened(double lo, double hi) {
    return {lo - std::abs(lo) * kIntervalSlack, hi + std::abs(hi) * kIntervalSlack};
}

// true iff some point theta + k*period (integer k) lies in [lo, hi]
bool contains_periodic(double lo, double hi, double theta, double period) {
    const double k_min = std::ceil((lo - theta) / period);
    return theta + k_min * period <= hi;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHalfPi = 1.5707963267948966192313216916398;
constexpr double kSinArgCap = 1e8;

} // namespace

Interval::Interval(double point) : lo(point), hi(point) { check_valid(lo, hi); }

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) { check_valid(lo, hi); }

double Interval::max_abs() const { return std::max(std::abs(lo), std::abs(hi)); }

double Interval::clamp(double x) const { return std::min(std::max(x, lo), hi); }

Interval add(const Interval& a, const Interval& b) { return widened(a.lo + b.lo, a.hi + b.hi); }

Interval sub(const Interval& a, const Interval& b) { return widened(a.lo - b.hi, a.hi - b.lo); }

Interval neg(const Interval& a) { return {-a.hi, -a.lo}; }

Interval scale(const Interval& a, double c) {
    if (c >= 0)
        return widened(a.lo * c, a.hi * c);
    return widened(a.hi * c, a.lo * c);
}

Interval mul(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return widened(std::min(std::min(p1, p2), std::min(p3, p4)),
                   std::max(std::max(p1, p2), std::max(p3, p4)));
}

Interval recip(const Interval& a) {
    if (a.lo <= 0.0 && a.hi >= 0.0)
        throw DomainError("reciprocal of an interval containing zero");
    return widened(1.0 / a.hi, 1.0 / a.lo);
}

Interval pow_image(const Interval& a, int n) {
    if (n <= 0)
        throw std::invalid_argument("pow_image requires a positive exponent");
    const double plo = std::pow(a.lo, n);
    const double phi = std::pow(a.hi, n);
    if (n % 2 != 0)
        return widened(plo, phi);
    if (a.contains(0.0))
        return widened(0.0, std::max(plo, phi));
    return widened(std::min(plo, phi), std::max(plo, phi));
}

Interval sin_image(const Interval& a) {
    if (a.max_abs() > kSinArgCap || a.width() >= kTwoPi)
        return {-1.0, 1.0};
    double lo = std::min(std::sin(a.lo), std::sin(a.hi));
    double hi = std::max(std::sin(a.lo), std::sin(a.hi));
    if (contains_periodic(a.lo, a.hi, kHalfPi, kTwoPi))
        hi = 1.0;
    if (contains_periodic(a.lo, a.hi, -kHalfPi, kTwoPi))
        lo = -1.0;
    const Interval w = widened(lo, hi);
    return {std::max(w.lo, -1.0), std::min(w.hi, 1.0)};
}

Interval cos_image(const Interval& a) {
    if (a.max_abs() > kSinArgCap || a.width() >= kTwoPi)
        return {-1.0, 1.0};
    double lo = std::min(std::cos(a.lo), std::cos(a.hi));
    double hi = std::max(std::cos(a.lo), std::cos(a.hi));
    if (contains_periodic(a.lo, a.hi, 0.0, kTwoPi))
        hi = 1.0;
    if (contains_periodic(a.lo, a.hi, kTwoPi / 2.0, kTwoPi))
        lo = -1.0;
    const Interval w = widened(lo, hi);
    return {std::max(w.lo, -1.0), std::min(w.hi, 1.0)};
}

Interval sqrt_image(const Interval& a) {
    if (a.lo < 0.0)
        throw DomainError("sqrt of an interval with negative part");
    const Interval w = widened(std::sqrt(a.lo), std::sqrt(a.hi));
    return {std::max(w.lo, 0.0), w.hi};
}

Interval exp_image(const Interval& a) {
    const double lo = std::exp(a.lo);
    const double hi = std::exp(a.hi);
    if (!std::isfinite(hi))
        throw DomainError("exp image overflows");
    const Interval w = widened(lo, hi);
    return {std::max(w.lo, 0.0), w.hi};
}

Interval log_image(const Interval& a) {
    if (a.lo <= 0.0)
        throw DomainError("log of an interval with non-positive part");
    return widened(std::log(a.lo), std::log(a.hi));
}

Interval abs_image(const Interval& a) {
    if (a.contains(0.0))
        return widened(0.0, a.max_abs());
    const double lo = std::min(std::abs(a.lo), std::abs(a.hi));
    const Interval w = widened(lo, a.max_abs());
    return {std::max(w.lo, 0.0), w.hi};
}

Interval inflate(const Interval& a, double eps) {
    if (eps < 0.0)
        throw NegativeInflation("inflate requires eps >= 0");
    return {a.lo - eps, a.hi + eps};
}

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

std::string to_string(const Interval& a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "[%.17g, %.17g]", a.lo, a.hi);
    return buf;
}

} // namespace pwax
