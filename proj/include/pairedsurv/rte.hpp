#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pairedsurv/common.hpp"
#include "pairedsurv/data.hpp"
#include "pairedsurv/rng.hpp"
#include "pairedsurv/stats.hpp"
#include "pairedsurv/survcore.hpp"

namespace pairedsurv::rte {

// Configuration of the relative-treatment-effect analysis. The ratio
// threshold delta and the follow-up horizons tau1, tau2 define the effective
// horizon tau = min(delta*tau1, tau2), which must be finite.
struct RteConfig {
    double delta = 1.3;
    double tau1 = kInf;
    double tau2 = kInf;
    double theta0 = 0.5;
    double alpha = 0.05;

    double tau() const { return std::min(delta * tau1, tau2); }

    void check() const {
        if (!(delta > 0.0)) throw ValidationError("delta must be positive");
        if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw ValidationError("horizons must be positive");
        if (!std::isfinite(tau())) {
            throw ValidationError("min(delta*tau1, tau2) must be finite: at most one horizon "
                                  "may be infinite");
        }
        if (!(theta0 > 0.0 && theta0 < 1.0)) throw ValidationError("theta0 must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
    }
};

// The recoded competing-risks sample (Z_i, eps_i): Z is the observed minimum
// of the two rescaled, horizon-capped times and eps in {0,1,2,3} records which
// component was smaller (1: second smaller, 2: first smaller, 3: tie,
// 0: censored).
struct CompetingRisksSample {
    std::vector<double> z;
    std::vector<int> eps;
    double tau = 0.0;

    std::size_t n() const { return z.size(); }
};

inline CompetingRisksSample recode(const PairedDataset& ds, const RteConfig& cfg) {
    cfg.check();
    CompetingRisksSample crs;
    crs.tau = cfg.tau();
    crs.z.reserve(ds.n());
    crs.eps.reserve(ds.n());
    for (const auto& r : ds.records) {
        const double a1 = cfg.delta * std::min(r.t1, cfg.tau1);
        const double a2 = std::min(r.y2, cfg.tau2);
        // Whether the capped true value delta*min(T_j, tau_j) is known from
        // the observation: either the time is an event, or the cap binds.
        const bool e1 = r.delta1 == 1 || r.t1 >= cfg.tau1;
        const bool e2 = r.delta2 == 1 || r.y2 >= cfg.tau2;
        int eps = 0;
        if (a2 < a1) {
            eps = e2 ? 1 : 0;
        } else if (a1 < a2) {
            eps = e1 ? 2 : 0;
        } else {
            // Observed tie. A component censored exactly at the other's event
            // time must truly exceed it, so the event goes to the other side.
            if (e1 && e2) eps = 3;
            else if (e1) eps = 2;
            else if (e2) eps = 1;
            else eps = 0;
        }
        crs.z.push_back(std::min(a1, a2));
        crs.eps.push_back(eps);
    }
    return crs;
}

namespace detail {

struct ThetaVariance {
    double theta = 0.0;
    double variance_raw = 0.0;  // may be a small negative rounding artifact
};

// One pass over the recoded risk table computing the Aalen-Johansen plug-in
// theta = F2(tau) + F3(tau)/2 and the three-term Greenwood-type variance
// estimator of sqrt(n)(theta_hat - theta). The double and triple integrals
// collapse to prefix sums over the jump times; all integrals over [0,tau]
// close at tau, and 0/0 := 0 throughout.
inline ThetaVariance theta_variance_pass(const RiskTable& rt) {
    const double n = static_cast<double>(rt.n);
    double surv_left = 1.0;  // S-(u)
    double theta = 0.0;
    double term1 = 0.0, term2 = 0.0, term3 = 0.0;
    double prefix2 = 0.0;   // sum_{l<m} S-(l) dM2(l) / (1 - dA(l))
    double w = 0.0;         // W(u_m) = sum_{l<m} dTotal(l) / (1 - dA(l))^2
    double prefix3 = 0.0;   // sum_{l<m} q(l) W(l)
    for (std::size_t m = 0; m < rt.size(); ++m) {
        const double y = rt.at_risk[m];
        const double d1 = rt.events[0][m];
        const double d2 = rt.events[1][m];
        const double d3 = rt.events[2][m];
        const double d = d1 + d2 + d3;
        if (d == 0.0) continue;
        const double haz = d / y;
        const double dN = (d2 + 0.5 * d3) / y;

        const double g1 = n * (1.0 - d1 / y) * d1 / (y * y);
        const double g2 = n * (1.0 - d2 / y) * d2 / (y * y);
        const double g3 = n * (1.0 - d3 / y) * d3 / (y * y);
        const double g12 = -n * d1 * d2 / (y * y * y);
        const double g13 = -n * d1 * d3 / (y * y * y);
        const double g23 = -n * d2 * d3 / (y * y * y);
        const double dM1 = g2 + g23 + 0.25 * g3;
        const double dM2 = g12 + g2 + 1.5 * g23 + 0.5 * g13 + 0.5 * g3;
        const double dTotal = g1 + g2 + g3 + 2.0 * (g12 + g13 + g23);

        const double q = surv_left * dN;
        theta += q;
        term1 += surv_left * surv_left * dM1;
        term2 += q * prefix2;
        term3 += q * q * w + 2.0 * q * prefix3;

        prefix3 += q * w;
        const double one_minus = 1.0 - haz;
        if (one_minus > 0.0) {
            prefix2 += surv_left * dM2 / one_minus;
            w += dTotal / (one_minus * one_minus);
        }
        // else: everyone at risk leaves at u_m, so no later jump exists and
        // the prefixes are never read again (0/0 := 0).
        surv_left *= one_minus;
    }
    return ThetaVariance{theta, term1 - 2.0 * term2 + term3};
}

inline ThetaVariance theta_variance_pass(const CompetingRisksSample& crs) {
    if (crs.n() == 0) throw ValidationError("empty competing-risks sample");
    return theta_variance_pass(risk_table(crs.z, crs.eps));
}

}  // namespace detail

// theta_hat = F2_hat(tau) + F3_hat(tau)/2 via the Aalen-Johansen estimators
// of the recoded table.
inline double estimate_theta(const CompetingRisksSample& crs) {
    if (crs.n() == 0) throw ValidationError("empty competing-risks sample");
    const RiskTable rt = risk_table(crs.z, crs.eps);
    return aalen_johansen(rt, 2, crs.tau) + 0.5 * aalen_johansen(rt, 3, crs.tau);
}

inline double variance_theta_unclipped(const CompetingRisksSample& crs) {
    return detail::theta_variance_pass(crs).variance_raw;
}

// Greenwood-type plug-in estimate of Var(sqrt(n)(theta_hat - theta)), clipped
// at zero against negative rounding artifacts.
inline double variance_theta(const CompetingRisksSample& crs) {
    return std::max(0.0, variance_theta_unclipped(crs));
}

// Every event label in {1,2} is independently relabeled as 1 or 2 with
// probability 1/2; times, censorings and ties are untouched.
inline CompetingRisksSample randomize_labels(const CompetingRisksSample& crs, Rng& rng) {
    CompetingRisksSample out = crs;
    for (auto& e : out.eps) {
        if (e == 1 || e == 2) e = rng.bernoulli(0.5) ? 1 : 2;
    }
    return out;
}

struct RteResult {
    double theta_hat = 0.0;
    double sigma2_hat = 0.0;
    double statistic = 0.0;  // sqrt(n)(theta_hat - theta0)/sigma_hat
    double quantile = 0.0;   // (1-alpha) critical value used
    bool reject = false;
    Interval ci_one_sided;   // [lo, 1]
    Interval ci_two_sided;   // clipped to [0, 1]
    QuantileSource source = QuantileSource::gauss;
    std::size_t requested_B = 0;
    std::size_t effective_B = 0;
};

namespace detail {

inline RteResult make_rte_result(double theta_hat, double sigma2, std::size_t n,
                                 const RteConfig& cfg, const CriticalValues& cv,
                                 QuantileSource source, std::size_t requested_B,
                                 std::size_t effective_B) {
    if (!(sigma2 > 0.0)) {
        throw DegenerateVarianceError(
            "variance estimate for theta is zero; the test statistic is undefined. "
            "Assumption 2 requires a positive limit variance, which holds e.g. when "
            "both event types occur before tau and observations reach tau");
    }
    RteResult res;
    res.theta_hat = theta_hat;
    res.sigma2_hat = sigma2;
    res.source = source;
    res.requested_B = requested_B;
    res.effective_B = effective_B;
    res.quantile = cv.upper;
    const double se = std::sqrt(sigma2 / static_cast<double>(n));
    res.statistic = (theta_hat - cfg.theta0) / se;
    res.reject = res.statistic > cv.upper;
    res.ci_one_sided = Interval{theta_hat - cv.upper * se, 1.0}.clipped(0.0, 1.0);
    res.ci_two_sided =
        Interval{theta_hat - cv.two_upper * se, theta_hat - cv.two_lower * se}.clipped(0.0, 1.0);
    return res;
}

}  // namespace detail

// Gauss test: reject when sqrt(n)(theta_hat - theta0)/sigma_hat > z_{1-alpha}.
inline RteResult asymptotic_inference(const CompetingRisksSample& crs, const RteConfig& cfg) {
    cfg.check();
    const auto fit = detail::theta_variance_pass(crs);
    return detail::make_rte_result(fit.theta, std::max(0.0, fit.variance_raw), crs.n(), cfg,
                                   gauss_critical_values(cfg.alpha),
                                   QuantileSource::gauss, 0, 0);
}

// Randomization test: the critical value is the Monte Carlo (1-alpha)-quantile
// of sqrt(n)(theta_tilde - 1/2)/sigma_tilde over B relabeled samples.
inline RteResult randomization_inference(const CompetingRisksSample& crs, const RteConfig& cfg,
                                         std::size_t B, Rng& rng) {
    cfg.check();
    if (B < 1) throw ValidationError("B must be at least 1");
    const auto fit = detail::theta_variance_pass(crs);

    const std::uint64_t base = rng.next_u64();
    std::vector<double> stats;
    stats.reserve(B);
    for (std::size_t b = 0; b < B; ++b) {
        Rng replicate_rng = Rng::stream(base, b);
        const auto randomized = randomize_labels(crs, replicate_rng);
        const auto rfit = detail::theta_variance_pass(randomized);
        double stat = 0.0;
        if (studentized_statistic(rfit.theta - 0.5, std::max(0.0, rfit.variance_raw),
                                        crs.n(), stat)) {
            stats.push_back(stat);
        }
    }
    if (stats.empty()) {
        throw ResamplingDegenerateError(
            "all randomized replicates have zero variance (Assumption 3)");
    }
    return detail::make_rte_result(fit.theta, std::max(0.0, fit.variance_raw), crs.n(), cfg,
                                   empirical_critical_values(stats, cfg.alpha),
                                   QuantileSource::randomization, B, stats.size());
}

// Pair-level bootstrap: records are drawn with replacement and recoded; the
// replicate statistic is sqrt(n)(theta* - theta_hat)/sigma*.
inline RteResult bootstrap_inference(const PairedDataset& ds, const RteConfig& cfg, std::size_t B,
                                     Rng& rng) {
    cfg.check();
    if (B < 1) throw ValidationError("B must be at least 1");
    const auto crs = recode(ds, cfg);
    const auto fit = detail::theta_variance_pass(crs);

    const std::size_t n = crs.n();
    const std::uint64_t base = rng.next_u64();
    std::vector<double> stats;
    stats.reserve(B);
    CompetingRisksSample resampled;
    resampled.tau = crs.tau;
    for (std::size_t b = 0; b < B; ++b) {
        Rng replicate_rng = Rng::stream(base, b);
        resampled.z.clear();
        resampled.eps.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = replicate_rng.uniform_index(n);
            resampled.z.push_back(crs.z[idx]);
            resampled.eps.push_back(crs.eps[idx]);
        }
        const auto rfit = detail::theta_variance_pass(resampled);
        double stat = 0.0;
        if (studentized_statistic(rfit.theta - fit.theta,
                                        std::max(0.0, rfit.variance_raw), n, stat)) {
            stats.push_back(stat);
        }
    }
    if (stats.empty()) {
        throw ResamplingDegenerateError("all bootstrap replicates have zero variance");
    }
    return detail::make_rte_result(fit.theta, std::max(0.0, fit.variance_raw), n, cfg,
                                   empirical_critical_values(stats, cfg.alpha),
                                   QuantileSource::bootstrap, B, stats.size());
}

// Empirical analogues of the positivity assumptions: observations reaching
// tau, uncensored mass at tau, and pre-tau events of both types.
inline std::vector<std::string> check_assumptions(const CompetingRisksSample& crs) {
    std::size_t at_tau = 0, at_tau_event = 0, pre_tau_type1 = 0, pre_tau_type2 = 0;
    for (std::size_t i = 0; i < crs.n(); ++i) {
        if (crs.z[i] == crs.tau) {
            ++at_tau;
            if (crs.eps[i] != 0) ++at_tau_event;
        } else {
            if (crs.eps[i] == 1) ++pre_tau_type1;
            if (crs.eps[i] == 2) ++pre_tau_type2;
        }
    }
    std::vector<std::string> warnings;
    if (at_tau == 0) {
        warnings.emplace_back(
            "Assumption 1: no observation reaches tau; the censoring survival "
            "at tau cannot be positive in this sample");
    }
    if (at_tau_event == 0) {
        warnings.emplace_back(
            "Assumption 1: no uncensored observation at tau; P(delta*T1 >= tau, T2 >= tau) "
            "has empirical mass zero");
    }
    if ((pre_tau_type1 == 0 || at_tau_event == 0) && (pre_tau_type2 == 0 || at_tau_event == 0)) {
        warnings.emplace_back(
            "Assumption 2: no sufficient condition for a positive variance holds "
            "empirically (needs a pre-tau event type together with mass at tau)");
    }
    if (pre_tau_type1 == 0 && pre_tau_type2 == 0) {
        warnings.emplace_back(
            "Assumption 3: no pre-tau type-1 or type-2 events; the randomization "
            "variance is degenerate in this sample");
    }
    return warnings;
}

}  // namespace pairedsurv::rte
