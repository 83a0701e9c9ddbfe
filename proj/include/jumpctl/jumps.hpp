#pragma once

#include <functional>
#include <vector>

#include "jumpctl/rng.hpp"

namespace jumpctl {

struct JumpRecord {
    std::vector<double> epochs;  // sorted within (0, horizon]
    std::vector<double> sizes;   // raw sizes z, same length
    std::size_t count() const { return epochs.size(); }
};

// Compound Poisson description: finite intensity, i.i.d. sizes, and the state
// increment map gamma applied per event.
struct JumpModel {
    double intensity = 0.0;                            // events per unit time
    std::function<double(RngStream&)> sample_size;     // draw z
    std::function<double(double)> gamma;               // z -> state increment
    double size_mean = 0.0;
    double size_sd = 0.0;
    double gamma_mean_rate = 0.0;   // integral of gamma against the Levy measure
    double gamma_abs_moment1 = 0.0; // integral of |gamma|
    double gamma_moment2 = 0.0;     // integral of gamma^2

    bool active() const { return intensity > 0.0; }
    // p in {1,2}
    double moment_gamma(int p) const { return p == 1 ? gamma_abs_moment1 : gamma_moment2; }
};

JumpModel no_jumps();
// gamma(z) = gamma_sign * z with z ~ Normal(mu, tau^2).
JumpModel gaussian_jumps(double lambda, double mu, double tau, double gamma_sign = 1.0);
// z identically equal to `size` (handy in tests).
JumpModel deterministic_jumps(double lambda, double size);

// Event count ~ Poisson(intensity * horizon); epochs are the order statistics
// of i.i.d. uniforms, generated as exponential gaps.
JumpRecord sample_jumps(const JumpModel& jumps, double horizon, RngStream& stream);

}  // namespace jumpctl
