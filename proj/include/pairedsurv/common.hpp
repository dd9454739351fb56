#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace pairedsurv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input could not be parsed (CSV cells, scenario JSON, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// Input parsed but violates a data invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A variance estimate needed for studentization is zero.
class DegenerateVarianceError : public Error {
public:
    using Error::Error;
};

// Every resampling replicate was degenerate.
class ResamplingDegenerateError : public Error {
public:
    using Error::Error;
};

// The empirical positivity condition G-(x)S(x) > 0 failed at an observed time.
class PositivityError : public Error {
public:
    using Error::Error;
};

// A ratio-scale quantity is undefined (zero denominator).
class RatioUndefinedError : public Error {
public:
    using Error::Error;
};

// Scenario configuration is inconsistent with the requested methods.
class ScenarioError : public Error {
public:
    using Error::Error;
};

enum class QuantileSource { gauss, randomization, permutation, bootstrap };

inline const char* to_string(QuantileSource s) {
    switch (s) {
        case QuantileSource::gauss: return "gauss";
        case QuantileSource::randomization: return "randomization";
        case QuantileSource::permutation: return "permutation";
        case QuantileSource::bootstrap: return "bootstrap";
    }
    return "?";
}

enum class Side { left, right, two };

inline const char* to_string(Side s) {
    switch (s) {
        case Side::left: return "left";
        case Side::right: return "right";
        case Side::two: return "two";
    }
    return "?";
}

// Closed interval [lo, hi]; lo = -inf or hi = +inf encode one-sided intervals.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    bool contains(double x) const { return lo <= x && x <= hi; }

    Interval clipped(double a, double b) const {
        return Interval{std::max(lo, a), std::min(hi, b)};
    }
};

}  // namespace pairedsurv
