#include "jumpctl/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jumpctl/errors.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

double phi_bump(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return w * w * w;
}

namespace {

double phi_bump_d1(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return -6.0 * u * w * w;
}

double phi_bump_d2(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return w * (30.0 * u * u - 6.0);
}

double gprime_at(const std::vector<BreakCoefficient>& coeffs, double c, double x) {
    double g = 1.0;
    for (const BreakCoefficient& bc : coeffs) {
        const double s = x - bc.xi;
        if (std::abs(s) >= c) continue;
        const double u = s / c;
        g += bc.alpha * (phi_bump_d1(u) / c * s * std::abs(s) + 2.0 * phi_bump(u) * std::abs(s));
    }
    return g;
}

bool gprime_positive_on_bumps(const std::vector<BreakCoefficient>& coeffs, double c) {
    constexpr int kGrid = 4001;
    for (const BreakCoefficient& bc : coeffs) {
        for (int i = 0; i < kGrid; ++i) {
            const double x = bc.xi - c + 2.0 * c * static_cast<double>(i) / (kGrid - 1);
            if (!(gprime_at(coeffs, c, x) > 1e-12)) return false;
        }
    }
    return true;
}

}  // namespace

std::vector<BreakCoefficient> discontinuity_coefficients(const DriftDecomposition& drift) {
    std::vector<BreakCoefficient> out;
    std::ostringstream removable;
    const PiecewiseLipschitzFn& b2 = drift.b2;
    for (std::size_t k = 0; k < b2.breakpoints().size(); ++k) {
        // b1 and b3 are continuous, so only b2 contributes to the drift jump.
        const double alpha = 0.5 * (b2.left_limit(k) - b2.right_limit(k));
        if (alpha == 0.0) {
            if (removable.tellp() > 0) removable << ", ";
            removable << b2.breakpoints()[k];
        }
        out.push_back({b2.breakpoints()[k], alpha});
    }
    if (removable.tellp() > 0)
        throw ZeroJump("removable breakpoint(s) at x = " + removable.str());
    return out;
}

std::vector<BreakCoefficient> active_discontinuities(const DriftDecomposition& drift) {
    std::vector<BreakCoefficient> out;
    const PiecewiseLipschitzFn& b2 = drift.b2;
    for (std::size_t k = 0; k < b2.breakpoints().size(); ++k) {
        const double alpha = 0.5 * (b2.left_limit(k) - b2.right_limit(k));
        if (alpha != 0.0) out.push_back({b2.breakpoints()[k], alpha});
    }
    return out;
}

double select_c(const std::vector<BreakCoefficient>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("select_c requires at least one breakpoint");
    double bound = std::numeric_limits<double>::infinity();
    for (const BreakCoefficient& bc : coeffs) bound = std::min(bound, 1.0 / (6.0 * std::abs(bc.alpha)));
    for (std::size_t k = 1; k < coeffs.size(); ++k)
        bound = std::min(bound, 0.5 * (coeffs[k].xi - coeffs[k - 1].xi));
    double c = 0.9 * bound;
    for (int halvings = 0; halvings <= 20; ++halvings) {
        if (gprime_positive_on_bumps(coeffs, c)) return c;
        c *= 0.5;
    }
    throw NoValidC("no bump radius with positive derivative after 20 halvings");
}

TransformG::TransformG(std::vector<BreakCoefficient> coeffs, double c)
    : coeffs_(std::move(coeffs)), c_(c) {
    if (coeffs_.empty()) {
        c_ = 0.0;
        return;
    }
    if (!(c > 0.0)) throw std::invalid_argument("bump radius must be positive");
    double amax = 0.0;
    double lo = 1.0, hi = 1.0;
    for (const BreakCoefficient& bc : coeffs_) amax = std::max(amax, std::abs(bc.alpha));
    constexpr int kGrid = 4001;
    for (const BreakCoefficient& bc : coeffs_) {
        for (int i = 0; i < kGrid; ++i) {
            const double x = bc.xi - c_ + 2.0 * c_ * static_cast<double>(i) / (kGrid - 1);
            const double gp = gprime_at(coeffs_, c_, x);
            lo = std::min(lo, gp);
            hi = std::max(hi, gp);
        }
    }
    if (!(lo > 0.0)) throw NoValidC("derivative not positive for the given bump radius");
    g_lower_ = lo;
    g_upper_ = hi;
    inverse_halfwidth_ = amax * c_ * c_ + 1.0;
}

TransformG TransformG::build(const DriftDecomposition& drift) {
    const std::vector<BreakCoefficient> coeffs = active_discontinuities(drift);
    if (coeffs.empty()) return identity();
    return TransformG(coeffs, select_c(coeffs));
}

TransformG TransformG::build_for_noise(const DriftDecomposition& drift, double sigma) {
    if (sigma == 0.0 || sigma == 1.0) return build(drift);
    std::vector<BreakCoefficient> coeffs = active_discontinuities(drift);
    if (coeffs.empty()) return identity();
    for (BreakCoefficient& bc : coeffs) bc.alpha /= sigma * sigma;
    return TransformG(coeffs, select_c(coeffs));
}

double TransformG::operator()(double x) const {
    double y = x;
    for (const BreakCoefficient& bc : coeffs_) {
        const double s = x - bc.xi;
        if (std::abs(s) >= c_) continue;
        y += bc.alpha * phi_bump(s / c_) * s * std::abs(s);
    }
    return y;
}

double TransformG::prime(double x) const {
    if (coeffs_.empty()) return 1.0;
    return gprime_at(coeffs_, c_, x);
}

double TransformG::second(double x) const {
    double g = 0.0;
    for (const BreakCoefficient& bc : coeffs_) {
        const double s = x - bc.xi;
        if (std::abs(s) >= c_) continue;
        const double u = s / c_;
        // Right-sided value at the node itself, matching the right-limit
        // convention of the drift's discontinuous part.
        const double side = s >= 0.0 ? 1.0 : -1.0;
        g += bc.alpha * (phi_bump_d2(u) / (c_ * c_) * s * std::abs(s) +
                         4.0 * phi_bump_d1(u) / c_ * std::abs(s) + 2.0 * phi_bump(u) * side);
    }
    return g;
}

double TransformG::inverse(double y) const { return inverse(y, y); }

double TransformG::inverse(double y, double hint) const {
    if (coeffs_.empty()) return y;
    double lo = y - inverse_halfwidth_;
    double hi = y + inverse_halfwidth_;
    double x = std::clamp(hint, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = (*this)(x)-y;
        if (std::abs(fx) <= 1e-12) return x;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        const double gp = prime(x);
        double next = x - fx / gp;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return x;
        x = next;
    }
    throw NoConvergence("inverse of the change of variable did not converge");
}

TransformedCoefficients transformed_coefficients(const TransformG& g,
                                                 const DriftDecomposition& drift, double sigma,
                                                 const JumpModel& jumps) {
    TransformedCoefficients tc;
    const double half_sig2 = 0.5 * sigma * sigma;
    tc.drift = [g, drift, half_sig2](double y, double a) {
        const double x = g.inverse(y);
        return g.prime(x) * drift.total(x, a) + half_sig2 * g.second(x);
    };
    tc.drift_state_only = [tc](double y) { return tc.drift(y, 0.0); };
    tc.diffusion = [g, sigma](double y) { return sigma * g.prime(g.inverse(y)); };
    tc.jump = [g, gamma = jumps.gamma](double y, double z) {
        return g(g.inverse(y) + gamma(z)) - y;
    };
    return tc;
}

SamplePath simulate_transformed(const DriftDecomposition& drift, const ControlPolicy& policy,
                                const JumpModel& jumps, const SimConfig& cfg, double x0,
                                RngStream& stream) {
    cfg.validate();
    const TransformG g = TransformG::build_for_noise(drift, cfg.sigma);
    const JumpRecord rec = sample_jumps(jumps, cfg.horizon, stream);
    detail::AdaptedGrid grid = detail::build_grid(cfg.horizon, cfg.dt, rec);

    SamplePath path;
    path.times = std::move(grid.times);
    path.uniform_nodes = std::move(grid.uniform_nodes);
    path.sigma = cfg.sigma;
    path.scheme = Scheme::transformed;
    const std::size_t n = path.times.size();
    path.states_pre.resize(n);
    path.states.resize(n);
    path.brownian.resize(n - 1);
    path.controls.resize(n - 1);

    const double half_sig2 = 0.5 * cfg.sigma * cfg.sigma;
    std::size_t next_jump = 0;
    double x = x0;
    double y = g(x0);
    detail::check_finite(x, 0.0);
    path.states_pre[0] = x;
    path.states[0] = x;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = path.times[i];
        const double step = path.times[i + 1] - t;
        const double a = policy(t, x);
        const double dB = std::sqrt(step) * stream.next_normal();
        path.controls[i] = a;
        path.brownian[i] = dB;
        const double gp = g.prime(x);
        const double bar_drift = gp * drift.total(x, a) + half_sig2 * g.second(x);
        y = y + bar_drift * step + gp * cfg.sigma * dB;
        detail::check_finite(y, path.times[i + 1]);
        x = g.inverse(y, x);
        path.states_pre[i + 1] = x;
        while (next_jump < grid.jump_nodes.size() && grid.jump_nodes[next_jump].first == i + 1) {
            const std::size_t jidx = grid.jump_nodes[next_jump].second;
            const double z = rec.sizes[jidx];
            const double pre = x;
            x += jumps.gamma(z);
            y = g(x);
            path.jumps.push_back({path.times[i + 1], z, x - pre, i + 1});
            ++next_jump;
        }
        detail::check_finite(x, path.times[i + 1]);
        path.states[i + 1] = x;
    }
    return path;
}

}  // namespace jumpctl
