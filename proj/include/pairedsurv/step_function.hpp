#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace pairedsurv {

// Right-continuous piecewise-constant function on [0, inf). `values[i]` is the
// value on [jump_times[i], jump_times[i+1]); `initial_value` is the value on
// [0, jump_times[0]). Beyond the last jump the function stays at the last value.
struct StepFunction {
    std::vector<double> jump_times;  // strictly increasing
    std::vector<double> values;
    double initial_value = 0.0;

    static StepFunction constant(double v) {
        StepFunction f;
        f.initial_value = v;
        return f;
    }

    void append(double t, double v) {
        assert(jump_times.empty() || t > jump_times.back());
        jump_times.push_back(t);
        values.push_back(v);
    }

    std::size_t size() const { return jump_times.size(); }

    // Value at t (right-continuous: the jump at t counts).
    double operator()(double t) const {
        auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
        if (it == jump_times.begin()) return initial_value;
        return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
    }

    // Left limit: the value strictly before t.
    double left_limit(double t) const {
        auto it = std::lower_bound(jump_times.begin(), jump_times.end(), t);
        if (it == jump_times.begin()) return initial_value;
        return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
    }

    double last_value() const { return values.empty() ? initial_value : values.back(); }

    // Lebesgue integral over [0, tau], exact on the segment partition.
    double integral_to(double tau) const {
        if (tau <= 0.0) return 0.0;
        double area = 0.0;
        double seg_start = 0.0;
        double seg_value = initial_value;
        for (std::size_t i = 0; i < jump_times.size(); ++i) {
            const double t = jump_times[i];
            if (t >= tau) break;
            area += (t - seg_start) * seg_value;
            seg_start = t;
            seg_value = values[i];
        }
        area += (tau - seg_start) * seg_value;
        return area;
    }
};

}  // namespace pairedsurv
