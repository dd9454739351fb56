#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pairedsurv/common.hpp"
#include "pairedsurv/data.hpp"
#include "pairedsurv/rng.hpp"

namespace pairedsurv::simgen {

// Marginal Weibull scales/shapes plus the dependence parameter nu in (0,1];
// nu = 1 is independence and dependence increases as nu decreases.
struct BivWeibullParams {
    double theta1 = 1.0;
    double theta2 = 1.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double nu = 1.0;

    void check() const {
        if (!(theta1 > 0.0 && theta2 > 0.0 && gamma1 > 0.0 && gamma2 > 0.0)) {
            throw ValidationError("Weibull parameters must be positive");
        }
        if (!(nu > 0.0 && nu <= 1.0)) throw ValidationError("nu must lie in (0,1]");
    }
};

struct Censoring {
    enum class Kind { none, exponential };
    Kind kind = Kind::none;
    double rate = 0.0;

    static Censoring none() { return Censoring{Kind::none, 0.0}; }
    static Censoring exponential(double rate) {
        if (!(rate > 0.0)) throw ValidationError("censoring rate must be positive");
        return Censoring{Kind::exponential, rate};
    }
};

struct Scenario {
    std::string id;
    BivWeibullParams params;
    std::size_t n = 100;
    Censoring censoring = Censoring::none();
    double delta = 1.0;
    double tau1 = 1.2;
    double tau2 = 1.2;
    std::vector<std::string> methods;
    std::vector<Side> sides = {Side::left};

    void check() const {
        params.check();
        if (n < 2) throw ValidationError("scenario sample size must be at least 2");
        if (!(delta > 0.0) || !(tau1 > 0.0) || !(tau2 > 0.0)) {
            throw ValidationError("delta and horizons must be positive");
        }
    }
};

// Joint survival P(T1 > t1, T2 > t2) of the Gumbel-coupled Weibull pair.
inline double joint_survival(const BivWeibullParams& p, double t1, double t2) {
    p.check();
    if (t1 < 0.0 || t2 < 0.0) throw ValidationError("joint_survival: times must be nonnegative");
    const double s1 = std::pow(t1 / p.theta1, p.gamma1 / p.nu);
    const double s2 = std::pow(t2 / p.theta2, p.gamma2 / p.nu);
    return std::exp(-std::pow(s1 + s2, p.nu));
}

// Positive stable variate with index nu in (0,1): Laplace transform
// E exp(-sV) = exp(-s^nu), by the Chambers-Mallows-Stuck representation.
inline double sample_positive_stable(double nu, Rng& rng) {
    const double u = rng.uniform_open(M_PI);
    const double w = rng.exponential(1.0);
    const double a = std::sin(nu * u) / std::pow(std::sin(u), 1.0 / nu);
    const double b = std::sin((1.0 - nu) * u) / w;
    return a * std::pow(b, (1.0 - nu) / nu);
}

// Frailty construction of the bivariate Weibull: V positive stable with index
// nu, E1, E2 iid unit exponentials, U_j = exp(-(E_j/V)^nu) and
// T_j = theta_j (-log U_j)^(1/gamma_j). nu = 1 short-circuits to independent
// Weibull marginals.
inline std::pair<double, double> sample_pair(const BivWeibullParams& p, Rng& rng) {
    const double e1 = rng.exponential(1.0);
    const double e2 = rng.exponential(1.0);
    double m1 = e1, m2 = e2;  // -log U_j
    if (p.nu < 1.0) {
        const double v = sample_positive_stable(p.nu, rng);
        m1 = std::pow(e1 / v, p.nu);
        m2 = std::pow(e2 / v, p.nu);
    }
    return {p.theta1 * std::pow(m1, 1.0 / p.gamma1), p.theta2 * std::pow(m2, 1.0 / p.gamma2)};
}

inline std::vector<std::pair<double, double>> sample_pairs(const BivWeibullParams& p,
                                                           std::size_t n, Rng& rng) {
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_pair(p, rng));
    return out;
}

// Censors the second component with an independent exponential time; the
// first component stays uncensored and the pair order is preserved.
inline PairedDataset apply_censoring(const std::vector<std::pair<double, double>>& pairs,
                                     const Censoring& censoring, Rng& rng) {
    PairedDataset ds;
    ds.records.reserve(pairs.size());
    std::size_t i = 0;
    for (const auto& [t1, t2] : pairs) {
        PairedRecord r;
        r.id = std::to_string(++i);
        r.t1 = t1;
        r.delta1 = 1;
        if (censoring.kind == Censoring::Kind::exponential) {
            const double c = rng.exponential(censoring.rate);
            r.y2 = std::min(t2, c);
            r.delta2 = t2 <= c ? 1 : 0;
        } else {
            r.y2 = t2;
            r.delta2 = 1;
        }
        ds.records.push_back(std::move(r));
    }
    return ds;
}

inline std::atomic<long>& true_theta_call_count() {
    static std::atomic<long> count{0};
    return count;
}

// Monte Carlo plug-in for the estimand theta on N uncensored pairs: on
// uncensored data the Aalen-Johansen plug-in reduces to the empirical
// proportion of {a2 > a1} plus half the ties of the capped rescaled times.
inline double true_theta(const Scenario& scn, std::size_t N, Rng& rng) {
    scn.check();
    true_theta_call_count().fetch_add(1, std::memory_order_relaxed);
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto [t1, t2] = sample_pair(scn.params, rng);
        const double a1 = scn.delta * std::min(t1, scn.tau1);
        const double a2 = std::min(t2, scn.tau2);
        if (a2 > a1) sum += 1.0;
        else if (a2 == a1) sum += 0.5;
    }
    return sum / static_cast<double>(N);
}

// Monte Carlo estimate of the uncapped success probability
// P(T2 > delta T1) + P(T2 = delta T1)/2, the estimand of the legacy methods.
inline double true_success_probability(const Scenario& scn, std::size_t N, Rng& rng) {
    scn.check();
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto [t1, t2] = sample_pair(scn.params, rng);
        if (t2 > scn.delta * t1) sum += 1.0;
        else if (t2 == scn.delta * t1) sum += 0.5;
    }
    return sum / static_cast<double>(N);
}

// int_0^tau exp(-(t/theta)^gamma) dt by adaptive Gauss-Kronrod quadrature
// (absolute tolerance 1e-8).
inline double true_rmst(double theta, double gamma, double tau) {
    if (!(theta > 0.0 && gamma > 0.0)) throw ValidationError("Weibull parameters must be positive");
    if (tau <= 0.0) return 0.0;
    auto f = [&](double t) { return std::exp(-std::pow(t / theta, gamma)); };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, 0.0, tau, 15, 1e-10, &error);
    if (error > 1e-8) throw Error("true_rmst: quadrature did not reach tolerance");
    return value;
}

// (theta1/theta2)^gamma1, defined only under proportional hazards
// (equal shapes).
inline double hazard_ratio(const BivWeibullParams& p) {
    p.check();
    if (p.gamma1 != p.gamma2) {
        throw ValidationError("hazard ratio is time-varying when the shapes differ");
    }
    return std::pow(p.theta1 / p.theta2, p.gamma1);
}

// The three marginal parameter sets used throughout the simulation study.
inline BivWeibullParams preset(const std::string& name) {
    if (name == "equal") return BivWeibullParams{1.0, 1.0, 1.0, 1.0, 1.0};
    if (name == "prophaz") return BivWeibullParams{1.5, 1.0, 1.3, 1.3, 1.0};
    if (name == "nonprophaz") return BivWeibullParams{1.5, 1.1, 1.2, 1.5, 1.0};
    throw ValidationError("unknown preset \"" + name + "\" (expected equal, prophaz or "
                          "nonprophaz)");
}

inline Censoring parse_censoring(const std::string& name) {
    if (name == "none") return Censoring::none();
    if (name == "exp0.5") return Censoring::exponential(0.5);
    if (name == "exp1") return Censoring::exponential(1.0);
    throw ValidationError("unknown censoring \"" + name + "\" (expected none, exp0.5 or exp1)");
}

inline std::string censoring_name(const Censoring& c) {
    if (c.kind == Censoring::Kind::none) return "none";
    if (c.rate == 0.5) return "exp0.5";
    if (c.rate == 1.0) return "exp1";
    return "exp" + std::to_string(c.rate);
}

}  // namespace pairedsurv::simgen
