#pragma once

#include <stdexcept>
#include <string>

namespace pwax {

/// Thrown when an interval image is requested where the function is not
/// defined on the whole interval (reciprocal across zero, sqrt of a
/// partially negative interval, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NegativeInflation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Closed real interval [lo, hi], lo <= hi, both finite.
///
/// Image operations widen their result by a fixed relative slack per
/// operation instead of using directed rounding, so every returned
/// interval contains the exact image.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    explicit Interval(double point);
    Interval(double lo_, double hi_);

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    double max_abs() const;
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
    double clamp(double x) const;

    bool operator==(const Interval& other) const = default;
};

// relative outward slack applied to every image operation
inline constexpr double kIntervalSlack = 1e-14;

Interval add(const Interval& a, const Interval& b);
Interval sub(const Interval& a, const Interval& b);
Interval neg(const Interval& a);
Interval scale(const Interval& a, double c);
Interval mul(const Interval& a, const Interval& b);
Interval recip(const Interval& a);
Interval pow_image(const Interval& a, int n);
Interval sin_image(const Interval& a);
Interval cos_image(const Interval& a);
Interval sqrt_image(const Interval& a);
Interval exp_image(const Interval& a);
Interval log_image(const Interval& a);
Interval abs_image(const Interval& a);
Interval inflate(const Interval& a, double eps);
Interval hull(const Interval& a, const Interval& b);

inline Interval operator+(const Interval& a, const Interval& b) { return add(a, b); }
inline Interval operator-(const Interval& a, const Interval& b) { return sub(a, b); }
inline Interval operator-(const Interval& a) { return neg(a); }
inline Interval operator*(const Interval& a, const Interval& b) { return mul(a, b); }

std::string to_string(const Interval& a);

} // namespace pwax
