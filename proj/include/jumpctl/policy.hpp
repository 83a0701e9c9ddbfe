#pragma once

#include <algorithm>
#include <functional>
#include <string>

namespace jumpctl {

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

enum class PolicyKind { constant, linear_feedback, threshold, sign, custom };

// Feedback control clipped to the closed interval [lo, hi].
struct ControlPolicy {
    PolicyKind kind = PolicyKind::constant;
    double lo = 0.0;
    double hi = 0.0;
    std::function<double(double, double)> raw;  // (t, x) before clipping
    std::string name;

    double operator()(double t, double x) const { return std::clamp(raw(t, x), lo, hi); }
    double abs_bound() const { return std::max(std::abs(lo), std::abs(hi)); }
};

inline ControlPolicy constant_policy(double a, double lo, double hi,
                                     std::string name = "constant") {
    return {PolicyKind::constant, lo, hi, [a](double, double) { return a; }, std::move(name)};
}

inline ControlPolicy zero_policy() { return constant_policy(0.0, 0.0, 0.0, "zero"); }

}  // namespace jumpctl
