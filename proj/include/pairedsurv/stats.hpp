#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "pairedsurv/common.hpp"

namespace pairedsurv {

inline double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> standard_normal;
    return boost::math::quantile(standard_normal, p);
}

inline double beta_quantile(double p, double a, double b) {
    return boost::math::quantile(boost::math::beta_distribution<double>(a, b), p);
}

// p-quantile of a finite sample by the ceiling-rank convention: the
// ceil(p*B)-th order statistic. With B = 1 every p in (0,1] yields the single
// value, matching the resampling edge-case contract.
inline double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error("empirical_quantile: empty sample");
    std::sort(values.begin(), values.end());
    const auto b = static_cast<double>(values.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(p * b));
    rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(values.size()));
    return values[static_cast<std::size_t>(rank - 1)];
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Empirical variance with 1/n normalization.
inline double variance_biased(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

// Unbiased sample variance (1/(n-1)).
inline double variance_unbiased(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    return variance_biased(v) * static_cast<double>(v.size()) /
           static_cast<double>(v.size() - 1);
}

// Critical values for a one-sided (greater) test at level alpha together with
// the mirrored and equal-tailed two-sided quantiles.
struct CriticalValues {
    double upper;      // q_{1-alpha}
    double lower;      // q_{alpha}
    double two_upper;  // q_{1-alpha/2}
    double two_lower;  // q_{alpha/2}
};

inline CriticalValues gauss_critical_values(double alpha) {
    const double z1 = normal_quantile(1.0 - alpha);
    const double z2 = normal_quantile(1.0 - alpha / 2.0);
    return CriticalValues{z1, -z1, z2, -z2};
}

inline CriticalValues empirical_critical_values(const std::vector<double>& stats, double alpha) {
    return CriticalValues{empirical_quantile(stats, 1.0 - alpha),
                          empirical_quantile(stats, alpha),
                          empirical_quantile(stats, 1.0 - alpha / 2.0),
                          empirical_quantile(stats, alpha / 2.0)};
}

// Studentized replicate statistic sqrt(n) * numerator / sigma with the
// 0/0 := 0 convention: a replicate whose numerator and variance both vanish
// carries the value 0; zero variance with a nonzero numerator is degenerate
// and the replicate is discarded (returns false).
inline bool studentized_statistic(double numerator, double sigma2, std::size_t n, double& out) {
    if (sigma2 > 0.0) {
        out = numerator / std::sqrt(sigma2 / static_cast<double>(n));
        return true;
    }
    if (numerator == 0.0) {
        out = 0.0;
        return true;
    }
    return false;
}

}  // namespace pairedsurv
