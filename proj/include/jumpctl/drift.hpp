#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "jumpctl/piecewise.hpp"

namespace jumpctl {

// Control-coupled drift part, bounded and C1 in both arguments.
struct ControlTerm {
    std::function<double(double, double)> value;  // (x, a)
    std::function<double(double, double)> dx;
    std::function<double(double, double)> da;
    double bound = 0.0;
};

// State-only C1 drift part with bounded derivative and linear growth.
struct StateTerm {
    std::function<double(double)> value;
    std::function<double(double)> dx;
    double growth = 0.0;  // K in |value(x)| <= K(1+|x|)
};

inline ControlTerm zero_control_term() {
    return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
            [](double, double) { return 0.0; }, 0.0};
}

inline StateTerm zero_state_term() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
}

inline StateTerm linear_state_term(double slope) {
    return {[slope](double x) { return slope * x; }, [slope](double) { return slope; },
            std::abs(slope)};
}

// Drift split value(x,a) = b1(x,a) + b2(x) + b3(x) where only b2 may jump.
// A smooth override can replace the b2 slot (same evaluation surface) for
// coupled runs against a smoothed drift.
struct DriftDecomposition {
    ControlTerm b1;
    PiecewiseLipschitzFn b2;
    StateTerm b3;

    struct B2Override {
        std::function<double(double)> value;
        std::function<double(double)> derivative;
        std::function<double(double)> antiderivative;
        double sup_bound = 0.0;
    };
    std::optional<B2Override> b2_override;

    double b2_value(double x) const { return b2_override ? b2_override->value(x) : b2(x); }
    double b2_antiderivative(double x) const {
        return b2_override ? b2_override->antiderivative(x) : b2.antiderivative(x);
    }
    double b2_sup_bound() const {
        return b2_override ? b2_override->sup_bound : b2.global_bound();
    }
    double total(double x, double a) const { return b1.value(x, a) + b2_value(x) + b3.value(x); }

    DriftDecomposition with_b2_override(B2Override o) const {
        DriftDecomposition d = *this;
        d.b2_override = std::move(o);
        return d;
    }
};

}  // namespace jumpctl
