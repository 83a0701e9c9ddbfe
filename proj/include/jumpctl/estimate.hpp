#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace jumpctl {

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    double ci95 = 0.0;
    std::size_t n = 0;
};

inline MonteCarloEstimate mc_from_samples(std::span<const double> samples) {
    MonteCarloEstimate e;
    e.n = samples.size();
    if (e.n == 0) return e;
    double sum = 0.0;
    for (double v : samples) sum += v;
    e.mean = sum / static_cast<double>(e.n);
    if (e.n > 1) {
        double ss = 0.0;
        for (double v : samples) {
            const double d = v - e.mean;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(e.n - 1);
        e.std_err = std::sqrt(var / static_cast<double>(e.n));
    }
    e.ci95 = 1.96 * e.std_err;
    return e;
}

}  // namespace jumpctl
