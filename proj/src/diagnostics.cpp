#include "jumpctl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jumpctl/errors.hpp"

namespace jumpctl {

double beta_half(int n) {
    if (n < 1) throw std::invalid_argument("n >= 1");
    double b = 2.0;
    for (int k = 1; k < n; ++k) b *= static_cast<double>(k) / (static_cast<double>(k) + 0.5);
    return b;
}

GapMomentCheck last_jump_gap_moment(double lambda, double t, int n, std::size_t n_mc,
                                    RngStream& stream) {
    if (!(t > 0.0)) throw std::invalid_argument("t > 0");
    if (n < 0) throw std::invalid_argument("n >= 0");
    GapMomentCheck check;
    check.t = t;
    check.n = n;
    if (lambda == 0.0 || n == 0) {
        // No events: the gap is exactly t.
        check.n = 0;
        check.analytic = 1.0 / std::sqrt(t);
        check.mc.mean = check.analytic;
        check.mc.n = 1;
        return check;
    }
    check.analytic = static_cast<double>(n) * beta_half(n) / std::sqrt(t);
    std::vector<double> samples(n_mc);
    for (std::size_t k = 0; k < n_mc; ++k) {
        double last = 0.0;
        for (int j = 0; j < n; ++j) last = std::max(last, t * stream.next_u01());
        samples[k] = 1.0 / std::sqrt(t - last);
    }
    check.mc = mc_from_samples(samples);
    return check;
}

double silverman_bandwidth(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("need at least two samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double q1 = sorted[static_cast<std::size_t>(0.25 * static_cast<double>(n - 1))];
    const double q3 = sorted[static_cast<std::size_t>(0.75 * static_cast<double>(n - 1))];
    const double iqr = q3 - q1;
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) throw std::invalid_argument("degenerate sample spread");
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double kde_sup(std::span<const double> sorted_samples, double bandwidth, double grid_lo,
               double grid_hi, int grid_points) {
    const std::size_t n = sorted_samples.size();
    const double inv_h = 1.0 / bandwidth;
    const double norm = inv_h / (static_cast<double>(n) * std::sqrt(2.0 * 3.14159265358979323846));
    const double window = 8.0 * bandwidth;  // exp(-32) tails are negligible
    double sup = 0.0;
    for (int g = 0; g < grid_points; ++g) {
        const double y =
            grid_lo + (grid_hi - grid_lo) * static_cast<double>(g) / (grid_points - 1);
        const auto lo =
            std::lower_bound(sorted_samples.begin(), sorted_samples.end(), y - window);
        const auto hi =
            std::upper_bound(sorted_samples.begin(), sorted_samples.end(), y + window);
        double acc = 0.0;
        for (auto it = lo; it != hi; ++it) {
            const double u = (y - *it) * inv_h;
            acc += std::exp(-0.5 * u * u);
        }
        sup = std::max(sup, norm * acc);
    }
    return sup;
}

DensityScan density_sup_scan(const std::vector<std::vector<double>>& slices,
                             std::span<const double> t_list) {
    if (slices.size() != t_list.size())
        throw std::invalid_argument("one sample slice per time required");
    DensityScan scan;
    scan.times.assign(t_list.begin(), t_list.end());
    scan.sup_density.resize(slices.size());
    scan.scaled.resize(slices.size());
    scan.bandwidth.resize(slices.size());
    const std::int64_t ns = static_cast<std::int64_t>(slices.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t s = 0; s < ns; ++s) {
        if (slices[s].empty()) continue;
        std::vector<double> sorted = slices[s];
        std::sort(sorted.begin(), sorted.end());
        const double h = silverman_bandwidth(sorted);
        double mean = 0.0;
        for (double v : sorted) mean += v;
        mean /= static_cast<double>(sorted.size());
        double ss = 0.0;
        for (double v : sorted) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(sorted.size() - 1));
        const double sup = kde_sup(sorted, h, mean - 6.0 * sd, mean + 6.0 * sd, 2048);
        scan.sup_density[s] = sup;
        scan.scaled[s] = std::sqrt(scan.times[s]) * sup;
        scan.bandwidth[s] = h;
    }
    for (std::size_t s = 0; s < slices.size(); ++s)
        if (slices[s].empty()) throw EmptyBundle("density_sup_scan: empty slice");
    return scan;
}

DensityScan density_sup_scan(const PathBundle& bundle, std::span<const double> t_list) {
    if (bundle.empty()) throw EmptyBundle("density_sup_scan: empty bundle");
    const SamplePath& first = bundle.paths.front();
    std::vector<std::vector<double>> slices(t_list.size());
    for (std::size_t s = 0; s < t_list.size(); ++s) {
        // Nearest uniform node to the requested time.
        std::size_t best = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < first.uniform_nodes.size(); ++u) {
            const double gap = std::abs(first.times[first.uniform_nodes[u]] - t_list[s]);
            if (gap < best_gap) {
                best_gap = gap;
                best = u;
            }
        }
        slices[s].resize(bundle.size());
        for (std::size_t p = 0; p < bundle.size(); ++p) {
            const SamplePath& path = bundle.paths[p];
            slices[s][p] = path.states[path.uniform_nodes[best]];
        }
    }
    return density_sup_scan(slices, t_list);
}

}  // namespace jumpctl
