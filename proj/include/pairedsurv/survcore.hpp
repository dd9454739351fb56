#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <vector>

#include "pairedsurv/common.hpp"
#include "pairedsurv/step_function.hpp"

namespace pairedsurv {

// Counting-process bookkeeping over the distinct observed times: the number at
// risk Y(u) and the per-cause event counts d_j(u). Cause 0 is censoring.
struct RiskTable {
    std::vector<double> times;  // distinct, increasing
    std::vector<int> at_risk;
    std::array<std::vector<int>, 3> events;  // d_1, d_2, d_3
    std::vector<int> censored;
    std::size_t n = 0;

    std::size_t size() const { return times.size(); }

    int total_events(std::size_t i) const {
        return events[0][i] + events[1][i] + events[2][i];
    }
};

inline RiskTable risk_table(const std::vector<double>& times, const std::vector<int>& causes) {
    if (times.empty()) throw ValidationError("risk_table: empty input");
    if (times.size() != causes.size()) {
        throw ValidationError("risk_table: times and causes must have equal length");
    }
    for (int c : causes) {
        if (c < 0 || c > 3) throw ValidationError("risk_table: causes must lie in {0,1,2,3}");
    }

    const std::size_t n = times.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    RiskTable rt;
    rt.n = n;
    std::size_t i = 0;
    while (i < n) {
        const double t = times[order[i]];
        int d[4] = {0, 0, 0, 0};
        std::size_t j = i;
        while (j < n && times[order[j]] == t) {
            ++d[causes[order[j]]];
            ++j;
        }
        rt.times.push_back(t);
        rt.at_risk.push_back(static_cast<int>(n - i));
        rt.censored.push_back(d[0]);
        for (int c = 0; c < 3; ++c) rt.events[static_cast<std::size_t>(c)].push_back(d[c + 1]);
        i = j;
    }
    return rt;
}

// All-cause Kaplan-Meier: S(t) = prod_{u<=t} (1 - d(u)/Y(u)).
inline StepFunction kaplan_meier(const RiskTable& rt) {
    StepFunction s = StepFunction::constant(1.0);
    double value = 1.0;
    for (std::size_t i = 0; i < rt.size(); ++i) {
        const int d = rt.total_events(i);
        if (d == 0) continue;
        value *= 1.0 - static_cast<double>(d) / rt.at_risk[i];
        s.append(rt.times[i], value);
    }
    return s;
}

// Kaplan-Meier of the censoring distribution. At tied times events are
// processed before censorings, so the censoring risk set at u is Y(u) - d(u).
inline StepFunction censoring_km(const RiskTable& rt) {
    StepFunction g = StepFunction::constant(1.0);
    double value = 1.0;
    for (std::size_t i = 0; i < rt.size(); ++i) {
        const int c = rt.censored[i];
        if (c == 0) continue;
        const int risk = rt.at_risk[i] - rt.total_events(i);
        value *= 1.0 - static_cast<double>(c) / risk;
        g.append(rt.times[i], value);
    }
    return g;
}

// Cause-specific cumulative hazard A_j(t) = sum_{u<=t} d_j(u)/Y(u).
inline StepFunction nelson_aalen(const RiskTable& rt, int cause) {
    if (cause < 1 || cause > 3) throw ValidationError("nelson_aalen: cause must lie in {1,2,3}");
    StepFunction a = StepFunction::constant(0.0);
    double value = 0.0;
    const auto& d = rt.events[static_cast<std::size_t>(cause - 1)];
    for (std::size_t i = 0; i < rt.size(); ++i) {
        if (d[i] == 0) continue;
        value += static_cast<double>(d[i]) / rt.at_risk[i];
        a.append(rt.times[i], value);
    }
    return a;
}

// Cumulative incidence F_j(t) = sum_{u<=t} S-(u) d_j(u)/Y(u) with the
// all-cause Kaplan-Meier S from the same table.
inline StepFunction aalen_johansen_curve(const RiskTable& rt, int cause) {
    if (cause < 1 || cause > 3) {
        throw ValidationError("aalen_johansen: cause must lie in {1,2,3}");
    }
    StepFunction f = StepFunction::constant(0.0);
    double surv_left = 1.0;
    double value = 0.0;
    const auto& d = rt.events[static_cast<std::size_t>(cause - 1)];
    for (std::size_t i = 0; i < rt.size(); ++i) {
        if (d[i] > 0) {
            value += surv_left * static_cast<double>(d[i]) / rt.at_risk[i];
            f.append(rt.times[i], value);
        }
        surv_left *= 1.0 - static_cast<double>(rt.total_events(i)) / rt.at_risk[i];
    }
    return f;
}

inline double aalen_johansen(const RiskTable& rt, int cause, double tau) {
    return aalen_johansen_curve(rt, cause)(tau);
}

// Greenwood-type (co)variance processes for the cause-specific cumulative
// hazards, in the discrete plug-in form dA_j = d_j/Y, y = Y/n:
//   var_j   jumps by n (1 - d_j/Y) d_j / Y^2,
//   cov_jl  jumps by -n d_j d_l / Y^3,
//   total = sum_j var_j + 2 sum_{j<l} cov_jl.
struct GreenwoodProcesses {
    StepFunction var1, var2, var3;
    StepFunction cov12, cov13, cov23;
    StepFunction total;
};

inline GreenwoodProcesses greenwood_processes(const RiskTable& rt) {
    GreenwoodProcesses g;
    for (StepFunction* f : {&g.var1, &g.var2, &g.var3, &g.cov12, &g.cov13, &g.cov23, &g.total}) {
        *f = StepFunction::constant(0.0);
    }
    const double n = static_cast<double>(rt.n);
    double v[3] = {0.0, 0.0, 0.0};
    double c[3] = {0.0, 0.0, 0.0};  // (1,2), (1,3), (2,3)
    double total = 0.0;
    for (std::size_t i = 0; i < rt.size(); ++i) {
        if (rt.total_events(i) == 0) continue;
        const double y = rt.at_risk[i];
        const double d[3] = {static_cast<double>(rt.events[0][i]),
                             static_cast<double>(rt.events[1][i]),
                             static_cast<double>(rt.events[2][i])};
        for (int j = 0; j < 3; ++j) v[j] += n * (1.0 - d[j] / y) * d[j] / (y * y);
        c[0] += -n * d[0] * d[1] / (y * y * y);
        c[1] += -n * d[0] * d[2] / (y * y * y);
        c[2] += -n * d[1] * d[2] / (y * y * y);
        total = v[0] + v[1] + v[2] + 2.0 * (c[0] + c[1] + c[2]);
        const double t = rt.times[i];
        g.var1.append(t, v[0]);
        g.var2.append(t, v[1]);
        g.var3.append(t, v[2]);
        g.cov12.append(t, c[0]);
        g.cov13.append(t, c[1]);
        g.cov23.append(t, c[2]);
        g.total.append(t, total);
    }
    return g;
}

}  // namespace pairedsurv
