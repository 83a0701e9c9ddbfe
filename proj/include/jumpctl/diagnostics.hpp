#pragma once

#include <span>
#include <vector>

#include "jumpctl/estimate.hpp"
#include "jumpctl/path.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

// B(n, 1/2) by the Gamma recurrence: B(1,1/2) = 2, B(n+1,1/2) = B(n,1/2) * n/(n+1/2).
double beta_half(int n);

struct GapMomentCheck {
    double t = 0.0;
    int n = 0;
    MonteCarloEstimate mc;
    double analytic = 0.0;
};

// Conditional inverse-square-root moment of the gap between the last of n
// uniform event times on (0,t) and t, against its closed form n*B(n,1/2)/sqrt(t).
// n = 0 (or lambda = 0) is the no-event case with gap exactly t.
GapMomentCheck last_jump_gap_moment(double lambda, double t, int n, std::size_t n_mc,
                                    RngStream& stream);

struct DensityScan {
    std::vector<double> times;
    std::vector<double> sup_density;
    std::vector<double> scaled;  // sqrt(t) * sup_density
    std::vector<double> bandwidth;
};

// Gaussian-kernel density estimate per time slice with Silverman bandwidth;
// the sup is taken over a 2048-point grid spanning mean +/- 6 sd.
DensityScan density_sup_scan(const std::vector<std::vector<double>>& slices,
                             std::span<const double> t_list);

// Slices are read off the bundle's uniform grid at the nodes nearest each t.
DensityScan density_sup_scan(const PathBundle& bundle, std::span<const double> t_list);

// Kernel density estimate at a point (shared with the scan; exposed for tests).
double kde_sup(std::span<const double> sorted_samples, double bandwidth, double grid_lo,
               double grid_hi, int grid_points);
double silverman_bandwidth(std::span<const double> samples);

}  // namespace jumpctl
