#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pairedsurv/common.hpp"
#include "pairedsurv/data.hpp"
#include "pairedsurv/rng.hpp"
#include "pairedsurv/stats.hpp"
#include "pairedsurv/survcore.hpp"

namespace pairedsurv::rmst {

// Common horizon tau with null margins eta (difference scale,
// H0: mu2 - mu1 <= eta) and zeta (ratio scale, H0: mu2/mu1 <= 1 + zeta).
struct RmstConfig {
    double tau = 0.0;
    double eta = 0.0;
    double zeta = 0.0;
    double alpha = 0.05;

    void check() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
        if (!(eta >= -tau && eta <= tau)) throw ValidationError("eta must lie in [-tau, tau]");
        if (!(zeta > -1.0)) throw ValidationError("zeta must exceed -1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
    }
};

// Area under the Kaplan-Meier curve on [0, tau], exact on the step partition.
inline double restricted_mean(const RiskTable& rt, double tau) {
    return kaplan_meier(rt).integral_to(tau);
}

inline double restricted_mean(const std::vector<double>& times, const std::vector<int>& indicators,
                              double tau) {
    return restricted_mean(risk_table(times, indicators), tau);
}

namespace detail {

struct ComponentFit {
    double mu = 0.0;
    std::vector<double> if_values;
};

// Per-observation influence values of the RMST estimator for one censored
// component, oriented so that on uncensored data IF_i = min(x_i, tau) - mu.
// All pieces are exact sums over the step partition:
//   H(w)  = sum_{u <= w} dA(u) / (G-(u) S(u)),
//   R(x)  = int_x^tau S(t) dt,   P(x) = int_0^x S(t) H(t) dt,
//   IF(x,d) = P(x) + H(x) R(x) - d R(x) / (G-(x) S(x)),
// and for x > tau simply IF = P(tau). Requires the empirical positivity
// condition G-(x) S(x) > 0 at every observed x <= tau.
inline ComponentFit component_fit(const std::vector<double>& times,
                                  const std::vector<int>& indicators, double tau) {
    const RiskTable rt = risk_table(times, indicators);
    const std::size_t k = rt.size();

    // Per distinct time: post-jump survival, left limit of the censoring KM,
    // and the hazard increment.
    std::vector<double> surv(k), cens_left(k), hazard(k);
    {
        double s = 1.0, g = 1.0;
        for (std::size_t m = 0; m < k; ++m) {
            const double y = rt.at_risk[m];
            const double d = rt.events[0][m];
            const double c = rt.censored[m];
            cens_left[m] = g;
            s *= 1.0 - d / y;
            surv[m] = s;
            hazard[m] = d / y;
            if (c > 0.0) g *= 1.0 - c / (y - d);
        }
    }

    for (std::size_t m = 0; m < k && rt.times[m] <= tau; ++m) {
        if (!(cens_left[m] * surv[m] > 0.0)) {
            throw PositivityError(
                "G-(x) S(x) = 0 at an observed time <= tau; the influence values are "
                "undefined (empirical analogue of the positivity assumption fails)");
        }
    }

    // Cumulative pieces at the distinct times <= tau.
    std::vector<double> H(k, 0.0), IS(k, 0.0), ISH(k, 0.0);
    double h = 0.0, is = 0.0, ish = 0.0;
    double prev_t = 0.0, prev_s = 1.0, prev_h = 0.0;
    double is_tau = 0.0, ish_tau = 0.0;
    bool closed = false;
    for (std::size_t m = 0; m < k; ++m) {
        if (rt.times[m] > tau) {
            is_tau = is + (tau - prev_t) * prev_s;
            ish_tau = ish + (tau - prev_t) * prev_s * prev_h;
            closed = true;
            break;
        }
        is += (rt.times[m] - prev_t) * prev_s;
        ish += (rt.times[m] - prev_t) * prev_s * prev_h;
        if (hazard[m] > 0.0) h += hazard[m] / (cens_left[m] * surv[m]);
        H[m] = h;
        IS[m] = is;
        ISH[m] = ish;
        prev_t = rt.times[m];
        prev_s = surv[m];
        prev_h = h;
    }
    if (!closed) {
        is_tau = is + (tau - prev_t) * prev_s;
        ish_tau = ish + (tau - prev_t) * prev_s * prev_h;
    }

    ComponentFit fit;
    fit.mu = is_tau;
    fit.if_values.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double x = times[i];
        if (x > tau) {
            fit.if_values.push_back(ish_tau);
            continue;
        }
        const auto it = std::lower_bound(rt.times.begin(), rt.times.end(), x);
        const auto m = static_cast<std::size_t>(it - rt.times.begin());
        const double r = is_tau - IS[m];
        double value = ISH[m] + H[m] * r;
        if (indicators[i] == 1) value -= r / (cens_left[m] * surv[m]);
        fit.if_values.push_back(value);
    }
    return fit;
}

struct PairFit {
    double mu1 = 0.0, mu2 = 0.0;
    double sigma2_diff = 0.0, sigma2_rat = 0.0;
};

inline std::vector<double> component_times(const PairedDataset& ds, int component) {
    std::vector<double> v;
    v.reserve(ds.n());
    for (const auto& r : ds.records) v.push_back(component == 1 ? r.t1 : r.y2);
    return v;
}

inline std::vector<int> component_indicators(const PairedDataset& ds, int component) {
    std::vector<int> v;
    v.reserve(ds.n());
    for (const auto& r : ds.records) v.push_back(component == 1 ? r.delta1 : r.delta2);
    return v;
}

inline PairFit pair_fit(const PairedDataset& ds, double tau) {
    const auto fit1 = component_fit(component_times(ds, 1), component_indicators(ds, 1), tau);
    const auto fit2 = component_fit(component_times(ds, 2), component_indicators(ds, 2), tau);
    PairFit out;
    out.mu1 = fit1.mu;
    out.mu2 = fit2.mu;
    if (!(out.mu1 > 0.0) || !(out.mu2 > 0.0)) {
        throw RatioUndefinedError("RMST estimate is zero; the ratio scale is undefined");
    }
    const std::size_t n = ds.n();
    std::vector<double> diff(n), rat(n);
    for (std::size_t i = 0; i < n; ++i) {
        diff[i] = fit2.if_values[i] - fit1.if_values[i];
        rat[i] = fit2.if_values[i] / out.mu2 - fit1.if_values[i] / out.mu1;
    }
    out.sigma2_diff = variance_biased(diff);
    out.sigma2_rat = variance_biased(rat);
    return out;
}

}  // namespace detail

inline std::vector<double> influence_values(const std::vector<double>& times,
                                            const std::vector<int>& indicators, double tau) {
    return detail::component_fit(times, indicators, tau).if_values;
}

// Empirical variance (1/n) of the per-pair influence differences.
inline double variance_diff(const PairedDataset& ds, double tau) {
    const auto f1 = detail::component_fit(detail::component_times(ds, 1),
                                          detail::component_indicators(ds, 1), tau);
    const auto f2 = detail::component_fit(detail::component_times(ds, 2),
                                          detail::component_indicators(ds, 2), tau);
    std::vector<double> diff(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) diff[i] = f2.if_values[i] - f1.if_values[i];
    return variance_biased(diff);
}

// Empirical variance (1/n) of IF2/mu2 - IF1/mu1 (the log-ratio scale).
inline double variance_rat(const PairedDataset& ds, double tau) {
    const auto f1 = detail::component_fit(detail::component_times(ds, 1),
                                          detail::component_indicators(ds, 1), tau);
    const auto f2 = detail::component_fit(detail::component_times(ds, 2),
                                          detail::component_indicators(ds, 2), tau);
    if (!(f1.mu > 0.0) || !(f2.mu > 0.0)) {
        throw RatioUndefinedError("RMST estimate is zero; the ratio scale is undefined");
    }
    std::vector<double> rat(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        rat[i] = f2.if_values[i] / f2.mu - f1.if_values[i] / f1.mu;
    }
    return variance_biased(rat);
}

struct RmstResult {
    double mu1_hat = 0.0, mu2_hat = 0.0;
    double diff_hat = 0.0, ratio_hat = 1.0;
    double sigma2_diff = 0.0, sigma2_rat = 0.0;
    double stat_diff = 0.0, stat_rat = 0.0;
    double quantile_diff = 0.0, quantile_rat = 0.0;
    bool reject_diff = false, reject_rat = false;
    Interval diff_one_sided_raw, diff_two_sided_raw;  // as reported, unclipped
    Interval diff_one_sided, diff_two_sided;          // clipped to [-tau, tau]
    Interval ratio_one_sided, ratio_two_sided;
    QuantileSource source = QuantileSource::gauss;
    std::size_t requested_B = 0;
    std::size_t effective_B_diff = 0;
    std::size_t effective_B_rat = 0;
    double tau = 0.0;
};

namespace detail {

inline RmstResult make_rmst_result(const PairFit& fit, std::size_t n, const RmstConfig& cfg,
                                   const CriticalValues& cv_diff, const CriticalValues& cv_rat,
                                   QuantileSource source, std::size_t requested_B,
                                   std::size_t eff_diff, std::size_t eff_rat) {
    if (!(fit.sigma2_diff > 0.0) || !(fit.sigma2_rat > 0.0)) {
        throw DegenerateVarianceError(
            "RMST variance estimate is zero; the studentized statistics are undefined "
            "(the theory requires positive limit variances)");
    }
    RmstResult res;
    res.mu1_hat = fit.mu1;
    res.mu2_hat = fit.mu2;
    res.diff_hat = fit.mu2 - fit.mu1;
    res.ratio_hat = fit.mu2 / fit.mu1;
    res.sigma2_diff = fit.sigma2_diff;
    res.sigma2_rat = fit.sigma2_rat;
    res.source = source;
    res.requested_B = requested_B;
    res.effective_B_diff = eff_diff;
    res.effective_B_rat = eff_rat;
    res.tau = cfg.tau;

    const double root_n = std::sqrt(static_cast<double>(n));
    const double se_diff = std::sqrt(fit.sigma2_diff) / root_n;
    const double se_rat = std::sqrt(fit.sigma2_rat) / root_n;

    res.stat_diff = (res.diff_hat - cfg.eta) / se_diff;
    res.stat_rat = (std::log(res.ratio_hat) - std::log1p(cfg.zeta)) / se_rat;
    res.quantile_diff = cv_diff.upper;
    res.quantile_rat = cv_rat.upper;
    res.reject_diff = res.stat_diff > cv_diff.upper;
    res.reject_rat = res.stat_rat > cv_rat.upper;

    res.diff_one_sided_raw = Interval{res.diff_hat - cv_diff.upper * se_diff, kInf};
    res.diff_two_sided_raw = Interval{res.diff_hat - cv_diff.two_upper * se_diff,
                                      res.diff_hat - cv_diff.two_lower * se_diff};
    res.diff_one_sided = res.diff_one_sided_raw.clipped(-cfg.tau, cfg.tau);
    res.diff_two_sided = res.diff_two_sided_raw.clipped(-cfg.tau, cfg.tau);

    res.ratio_one_sided = Interval{res.ratio_hat * std::exp(-cv_rat.upper * se_rat), kInf};
    res.ratio_two_sided = Interval{res.ratio_hat * std::exp(-cv_rat.two_upper * se_rat),
                                   res.ratio_hat * std::exp(-cv_rat.two_lower * se_rat)};
    return res;
}

}  // namespace detail

inline RmstResult asymptotic_inference(const PairedDataset& ds, const RmstConfig& cfg) {
    cfg.check();
    const auto fit = detail::pair_fit(ds, cfg.tau);
    const auto cv = gauss_critical_values(cfg.alpha);
    return detail::make_rmst_result(fit, ds.n(), cfg, cv, cv, QuantileSource::gauss, 0, 0, 0);
}

// Independently per pair, with probability 1/2 the two (time, indicator)
// components are swapped.
inline PairedDataset permute_pairs(const PairedDataset& ds, Rng& rng) {
    PairedDataset out = ds;
    for (auto& r : out.records) {
        if (rng.bernoulli(0.5)) {
            std::swap(r.t1, r.y2);
            std::swap(r.delta1, r.delta2);
        }
    }
    return out;
}

// Within-pair permutation test: the critical values are Monte Carlo quantiles
// of the uncentered studentized statistics on permuted data.
inline RmstResult permutation_inference(const PairedDataset& ds, const RmstConfig& cfg,
                                        std::size_t B, Rng& rng) {
    cfg.check();
    if (B < 1) throw ValidationError("B must be at least 1");
    const auto fit = detail::pair_fit(ds, cfg.tau);

    const std::uint64_t base = rng.next_u64();
    std::vector<double> stats_diff, stats_rat;
    stats_diff.reserve(B);
    stats_rat.reserve(B);
    for (std::size_t b = 0; b < B; ++b) {
        Rng replicate_rng = Rng::stream(base, b);
        const auto permuted = permute_pairs(ds, replicate_rng);
        detail::PairFit pfit;
        try {
            pfit = detail::pair_fit(permuted, cfg.tau);
        } catch (const Error&) {
            continue;  // degenerate permuted sample; discarded with bookkeeping
        }
        double stat = 0.0;
        if (studentized_statistic(pfit.mu2 - pfit.mu1, pfit.sigma2_diff, ds.n(), stat)) {
            stats_diff.push_back(stat);
        }
        if (studentized_statistic(std::log(pfit.mu2 / pfit.mu1), pfit.sigma2_rat, ds.n(),
                                  stat)) {
            stats_rat.push_back(stat);
        }
    }
    if (stats_diff.empty() || stats_rat.empty()) {
        throw ResamplingDegenerateError("all permutation replicates are degenerate");
    }
    return detail::make_rmst_result(fit, ds.n(), cfg,
                                    empirical_critical_values(stats_diff, cfg.alpha),
                                    empirical_critical_values(stats_rat, cfg.alpha),
                                    QuantileSource::permutation, B, stats_diff.size(),
                                    stats_rat.size());
}

// Pair-level bootstrap with centered studentized replicate statistics.
inline RmstResult bootstrap_inference(const PairedDataset& ds, const RmstConfig& cfg,
                                      std::size_t B, Rng& rng) {
    cfg.check();
    if (B < 1) throw ValidationError("B must be at least 1");
    const auto fit = detail::pair_fit(ds, cfg.tau);
    const double diff_hat = fit.mu2 - fit.mu1;
    const double log_ratio_hat = std::log(fit.mu2 / fit.mu1);

    const std::size_t n = ds.n();
    const std::uint64_t base = rng.next_u64();
    std::vector<double> stats_diff, stats_rat;
    stats_diff.reserve(B);
    stats_rat.reserve(B);
    PairedDataset resampled;
    resampled.records.resize(n);
    for (std::size_t b = 0; b < B; ++b) {
        Rng replicate_rng = Rng::stream(base, b);
        for (std::size_t i = 0; i < n; ++i) {
            resampled.records[i] = ds.records[replicate_rng.uniform_index(n)];
        }
        detail::PairFit rfit;
        try {
            rfit = detail::pair_fit(resampled, cfg.tau);
        } catch (const Error&) {
            continue;
        }
        double stat = 0.0;
        if (studentized_statistic((rfit.mu2 - rfit.mu1) - diff_hat, rfit.sigma2_diff, n, stat)) {
            stats_diff.push_back(stat);
        }
        if (studentized_statistic(std::log(rfit.mu2 / rfit.mu1) - log_ratio_hat, rfit.sigma2_rat,
                                  n, stat)) {
            stats_rat.push_back(stat);
        }
    }
    if (stats_diff.empty() || stats_rat.empty()) {
        throw ResamplingDegenerateError("all bootstrap replicates are degenerate");
    }
    return detail::make_rmst_result(fit, n, cfg, empirical_critical_values(stats_diff, cfg.alpha),
                                    empirical_critical_values(stats_rat, cfg.alpha),
                                    QuantileSource::bootstrap, B, stats_diff.size(),
                                    stats_rat.size());
}

}  // namespace pairedsurv::rmst
