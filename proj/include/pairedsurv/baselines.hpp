#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pairedsurv/common.hpp"
#include "pairedsurv/data.hpp"
#include "pairedsurv/stats.hpp"
#include "pairedsurv/survcore.hpp"

namespace pairedsurv::baselines {

enum class CiKind { clopper_pearson, wald };

struct BinomialCI {
    long k = 0;
    long n = 0;
    double level = 0.95;
    Interval interval;
    CiKind kind = CiKind::clopper_pearson;
    Side side = Side::two;

    double estimate() const { return static_cast<double>(k) / static_cast<double>(n); }
};

// Exact binomial interval from beta quantiles, with the conventions lo = 0 at
// k = 0 and hi = 1 at k = n.
inline BinomialCI clopper_pearson(long k, long n, double level, Side side = Side::two) {
    if (k < 0 || n <= 0 || k > n) throw ValidationError("clopper_pearson: need 0 <= k <= n");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0,1)");
    const double tail = side == Side::two ? (1.0 - level) / 2.0 : 1.0 - level;
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    double lo = 0.0, hi = 1.0;
    if (side != Side::right) lo = k == 0 ? 0.0 : beta_quantile(tail, kd, nd - kd + 1.0);
    if (side != Side::left) hi = k == n ? 1.0 : beta_quantile(1.0 - tail, kd + 1.0, nd - kd);
    BinomialCI ci{k, n, level, Interval{lo, hi}, CiKind::clopper_pearson, side};
    return ci;
}

inline BinomialCI binomial_wald(long k, long n, double level, Side side = Side::two) {
    if (k < 0 || n <= 0 || k > n) throw ValidationError("binomial_wald: need 0 <= k <= n");
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const double z = side == Side::two ? normal_quantile(1.0 - (1.0 - level) / 2.0)
                                       : normal_quantile(level);
    double lo = side == Side::right ? 0.0 : p - z * se;
    double hi = side == Side::left ? 1.0 : p + z * se;
    BinomialCI ci{k, n, level, Interval{lo, hi}.clipped(0.0, 1.0), CiKind::wald, side};
    return ci;
}

struct BaselineResult {
    double estimate = 0.0;
    Interval ci;
    long k = 0;
    long n_effective = 0;
    bool transform_fallback = false;  // KM method only
};

// Counts y2/t1 >= delta on all records, censored or not. Censored second
// times are treated as if they were event times, which is the method's
// documented downward bias.
inline BaselineResult von_hoff(const PairedDataset& ds, double delta, double level,
                               Side side = Side::two) {
    long k = 0;
    for (const auto& r : ds.records) {
        if (r.y2 / r.t1 >= delta) ++k;
    }
    const auto ci = clopper_pearson(k, static_cast<long>(ds.n()), level, side);
    return BaselineResult{ci.estimate(), ci.interval, k, ci.n, false};
}

// Drops records censored below the success threshold, then counts as above.
inline BaselineResult mick_ignore(const PairedDataset& ds, double delta, double level,
                                  Side side = Side::two) {
    long k = 0, n = 0;
    for (const auto& r : ds.records) {
        if (r.delta2 == 0 && r.y2 < delta * r.t1) continue;
        ++n;
        if (r.y2 / r.t1 >= delta) ++k;
    }
    if (n == 0) {
        throw ValidationError("every record is censored below the threshold; nothing remains");
    }
    const auto ci = clopper_pearson(k, n, level, side);
    return BaselineResult{ci.estimate(), ci.interval, k, n, false};
}

enum class KmTransform { log, cloglog };

// Kaplan-Meier estimate of P(T2/T1 > delta) treating the within-pair ratio as
// a right-censored time, with a Greenwood standard error and a transformed
// interval. When S(delta) is 0 or 1 the transforms are undefined; the result
// falls back to an untransformed Wald interval and flags it.
inline BaselineResult km_ratio(const PairedDataset& ds, double delta, double level,
                               KmTransform transform, Side side = Side::two) {
    std::vector<double> ratios;
    std::vector<int> indicators;
    ratios.reserve(ds.n());
    indicators.reserve(ds.n());
    for (const auto& r : ds.records) {
        ratios.push_back(r.y2 / r.t1);
        indicators.push_back(r.delta2);
    }
    const RiskTable rt = risk_table(ratios, indicators);
    const StepFunction surv = kaplan_meier(rt);
    const double s = surv(delta);

    // Greenwood: Var(S) = S^2 sum d / (Y (Y - d)).
    double gw = 0.0;
    for (std::size_t i = 0; i < rt.size() && rt.times[i] <= delta; ++i) {
        const double d = rt.events[0][i];
        const double y = rt.at_risk[i];
        if (d > 0.0 && y > d) gw += d / (y * (y - d));
    }
    const double se = s * std::sqrt(gw);

    BaselineResult res;
    res.estimate = s;
    res.n_effective = static_cast<long>(ds.n());
    if (s <= 0.0 || s >= 1.0) {
        res.transform_fallback = true;
        const double z = side == Side::two ? normal_quantile(1.0 - (1.0 - level) / 2.0)
                                           : normal_quantile(level);
        double lo = side == Side::right ? 0.0 : s - z * se;
        double hi = side == Side::left ? 1.0 : s + z * se;
        res.ci = Interval{lo, hi}.clipped(0.0, 1.0);
        return res;
    }

    const double z = side == Side::two ? normal_quantile(1.0 - (1.0 - level) / 2.0)
                                       : normal_quantile(level);
    double lo = 0.0, hi = 1.0;
    if (transform == KmTransform::log) {
        const double se_log = se / s;
        lo = std::exp(std::log(s) - z * se_log);
        hi = std::exp(std::log(s) + z * se_log);
    } else {
        const double se_cll = se / std::fabs(s * std::log(s));
        lo = std::pow(s, std::exp(z * se_cll));
        hi = std::pow(s, std::exp(-z * se_cll));
    }
    if (side == Side::left) hi = 1.0;
    if (side == Side::right) lo = 0.0;
    res.ci = Interval{lo, hi}.clipped(0.0, 1.0);
    return res;
}

struct MidrankTable {
    // Per pair: lower/upper rank bounds and midranks for both entries.
    std::vector<double> l1, r1, m1;
    std::vector<double> l2, r2, m2;
};

namespace detail {

inline long count_lt(const std::vector<double>& sorted, double v) {
    return static_cast<long>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

inline long count_le(const std::vector<double>& sorted, double v) {
    return static_cast<long>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

}  // namespace detail

// Rank bounds for the censored-data midrank method. Entry (j,i) carries the
// value S_1i = delta*t1_i (always uncensored) or S_2i = y2_i with indicator
// delta2_i. The lower bound ranks the observed value in the joint sample with
// every *other* censored entry pushed to +inf; the upper bound ranks the
// entry's own value (or +inf when censored) among the observed values. Exact
// ties receive average ranks.
inline MidrankTable midrank_table(const PairedDataset& ds, double delta) {
    const std::size_t n = ds.n();
    std::vector<double> values(2 * n);
    std::vector<int> unc(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = delta * ds.records[i].t1;
        unc[i] = 1;
        values[n + i] = ds.records[i].y2;
        unc[n + i] = ds.records[i].delta2;
    }

    std::vector<double> all_sorted = values;
    std::sort(all_sorted.begin(), all_sorted.end());
    std::vector<double> unc_sorted;
    for (std::size_t e = 0; e < 2 * n; ++e) {
        if (unc[e]) unc_sorted.push_back(values[e]);
    }
    std::sort(unc_sorted.begin(), unc_sorted.end());

    const auto total = static_cast<double>(2 * n);
    MidrankTable tab;
    for (auto* v : {&tab.l1, &tab.r1, &tab.m1, &tab.l2, &tab.r2, &tab.m2}) v->resize(n);
    for (std::size_t e = 0; e < 2 * n; ++e) {
        const double v = values[e];
        // Lower bound: other censored entries sit at +inf, the entry itself at
        // its observed value.
        const long lt = detail::count_lt(unc_sorted, v);
        const long eq_others =
            detail::count_le(unc_sorted, v) - lt - (unc[e] ? 1 : 0);
        const double lower = static_cast<double>(lt) +
                             (static_cast<double>(eq_others) + 2.0) / 2.0;
        // Upper bound: the entry moves to +inf when censored, everyone else
        // keeps the observed value.
        double upper = 0.0;
        if (unc[e]) {
            const long lt_all = detail::count_lt(all_sorted, v);
            const long eq_all = detail::count_le(all_sorted, v) - lt_all;
            upper = static_cast<double>(lt_all) + (static_cast<double>(eq_all) + 1.0) / 2.0;
        } else {
            upper = total;
        }
        const std::size_t i = e % n;
        if (e < n) {
            tab.l1[i] = lower;
            tab.r1[i] = upper;
            tab.m1[i] = (lower + upper) / 2.0;
        } else {
            tab.l2[i] = lower;
            tab.r2[i] = upper;
            tab.m2[i] = (lower + upper) / 2.0;
        }
    }
    return tab;
}

// Midrank estimate #(M2 >= M1)/n with a Clopper-Pearson or Wald interval.
inline BaselineResult midrank(const PairedDataset& ds, double delta, double level, CiKind kind,
                              Side side = Side::two) {
    const auto tab = midrank_table(ds, delta);
    long k = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (tab.m2[i] >= tab.m1[i]) ++k;
    }
    const auto ci = kind == CiKind::clopper_pearson
                        ? clopper_pearson(k, static_cast<long>(ds.n()), level, side)
                        : binomial_wald(k, static_cast<long>(ds.n()), level, side);
    return BaselineResult{ci.estimate(), ci.interval, k, ci.n, false};
}

}  // namespace pairedsurv::baselines
