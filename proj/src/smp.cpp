#include "jumpctl/smp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jumpctl/errors.hpp"

namespace jumpctl {

double antiderivative_b2(const PiecewiseLipschitzFn& b2, double x) {
    return b2.antiderivative(x);
}

FirstVariationEvaluator::FirstVariationEvaluator(const SamplePath& path,
                                                 const DriftDecomposition& drift)
    : path_(&path) {
    if (path.scheme != Scheme::direct_euler)
        throw std::invalid_argument("flow derivative needs a direct-scheme path");
    const std::size_t n = path.n_nodes();
    if (path.brownian.size() + 1 != n || path.controls.size() + 1 != n)
        throw MissingNoise("path lacks stored increments");

    has_b2_ = drift.b2_override.has_value() ? true : !drift.b2.is_zero();
    sigma_ = path.sigma;
    if (has_b2_) {
        if (!(sigma_ > 0.0))
            throw std::invalid_argument(
                "flow derivative with a discontinuous drift part needs sigma > 0");
        two_over_sig2_ = 2.0 / (sigma_ * sigma_);
    }

    cum_db1_.assign(n, 0.0);
    cum_db3_.assign(n, 0.0);
    if (has_b2_) {
        cum_cross_.assign(n, 0.0);
        cum_stoch_.assign(n, 0.0);
        cum_jump_.assign(n, 0.0);
        btilde_.assign(n, 0.0);
        btilde_[0] = drift.b2_antiderivative(path.states[0]);
    }
    std::size_t jn = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double x = path.states[i];
        const double a = path.controls[i];
        const double step = path.times[i + 1] - path.times[i];
        cum_db1_[i + 1] = cum_db1_[i] + drift.b1.dx(x, a) * step;
        cum_db3_[i + 1] = cum_db3_[i] + drift.b3.dx(x) * step;
        if (has_b2_) {
            const double b2v = drift.b2_value(x);
            cum_cross_[i + 1] = cum_cross_[i] + b2v * drift.total(x, a) * step;
            cum_stoch_[i + 1] = cum_stoch_[i] + b2v * path.brownian[i];
            double jump_part = 0.0;
            while (jn < path.jumps.size() && path.jumps[jn].node == i + 1) {
                const double pre = path.states_pre[i + 1];
                jump_part += drift.b2_antiderivative(pre + path.jumps[jn].increment) -
                             drift.b2_antiderivative(pre);
                ++jn;
            }
            cum_jump_[i + 1] = cum_jump_[i] + jump_part;
            btilde_[i + 1] = drift.b2_antiderivative(path.states[i + 1]);
        }
    }
}

double FirstVariationEvaluator::log_phi(std::size_t i, std::size_t j) const {
    double e = (cum_db1_[j] - cum_db1_[i]) + (cum_db3_[j] - cum_db3_[i]);
    if (has_b2_) {
        e += two_over_sig2_ *
             ((btilde_[j] - btilde_[i]) - (cum_cross_[j] - cum_cross_[i]) -
              sigma_ * (cum_stoch_[j] - cum_stoch_[i]) - (cum_jump_[j] - cum_jump_[i]));
    }
    return e;
}

double FirstVariationEvaluator::phi(std::size_t i, std::size_t j) const {
    const double p = std::exp(log_phi(i, j));
    if (!std::isfinite(p)) throw NonFiniteState("flow derivative overflowed");
    return p;
}

FirstVariationSample FirstVariationEvaluator::at(std::size_t i, std::size_t j) const {
    FirstVariationSample s;
    s.t = path_->times[i];
    s.s = path_->times[j];
    s.components.db1 = cum_db1_[j] - cum_db1_[i];
    s.components.db3 = cum_db3_[j] - cum_db3_[i];
    if (has_b2_) {
        s.components.btilde_diff = two_over_sig2_ * (btilde_[j] - btilde_[i]);
        s.components.drift_cross = -two_over_sig2_ * (cum_cross_[j] - cum_cross_[i]);
        s.components.stochastic = -two_over_sig2_ * sigma_ * (cum_stoch_[j] - cum_stoch_[i]);
        s.components.jump_sum = -two_over_sig2_ * (cum_jump_[j] - cum_jump_[i]);
    }
    s.phi = phi(i, j);
    return s;
}

std::size_t FirstVariationEvaluator::node_at_or_after(double t) const {
    const auto it = std::lower_bound(path_->times.begin(), path_->times.end(), t - 1e-12);
    return static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - path_->times.begin(),
                                 static_cast<std::ptrdiff_t>(path_->times.size()) - 1));
}

FirstVariationSample FirstVariationEvaluator::at_times(double t, double s) const {
    return at(node_at_or_after(t), node_at_or_after(s));
}

double first_variation_fd(const DriftDecomposition& drift, const ControlPolicy& policy,
                          const JumpModel& jumps, const SimConfig& cfg, double x0, double h,
                          std::uint64_t stream_id) {
    if (!(h > 0.0)) throw std::invalid_argument("h > 0");
    RngStream s1(cfg.seed, stream_id);
    RngStream s2(cfg.seed, stream_id);
    const double xa = simulate_path(drift, policy, jumps, cfg, x0, s1).terminal();
    const double xb = simulate_path(drift, policy, jumps, cfg, x0 + h, s2).terminal();
    return (xb - xa) / h;
}

MonteCarloEstimate moment_monitor(std::span<const double> phis, int p) {
    if (p != 1 && p != 2 && p != 4) throw std::invalid_argument("p must be in {1,2,4}");
    if (phis.empty()) throw EmptyBundle("moment_monitor: no samples");
    std::vector<double> powered(phis.size());
    for (std::size_t i = 0; i < phis.size(); ++i) {
        const double a = std::abs(phis[i]);
        powered[i] = p == 1 ? a : (p == 2 ? a * a : a * a * a * a);
    }
    return mc_from_samples(powered);
}

double hamiltonian(const HamiltonianCtx& ctx, double t, double x, double p, double a) {
    const double running = ctx.f ? ctx.f(t, x, a) : 0.0;
    return running + (ctx.drift.total(x, a) + ctx.jump_compensator) * p;
}

double hamiltonian_da(const HamiltonianCtx& ctx, double t, double x, double p, double a) {
    const double running = ctx.f_da ? ctx.f_da(t, x, a) : 0.0;
    return running + ctx.drift.b1.da(x, a) * p;
}

AdjointEstimate adjoint_nested_mc(double t, double x, const ControlPolicy& policy,
                                  const DriftDecomposition& drift, const JumpModel& jumps,
                                  const SimConfig& cfg_inner, const StateCostGrad& f_dx,
                                  const TerminalGrad& g_dx, Exec exec) {
    const double T = cfg_inner.horizon;
    if (t > T + 1e-12) throw std::invalid_argument("probe time beyond the horizon");
    AdjointEstimate est;
    est.t = t;
    est.x = x;
    est.method = AdjointMethod::nested_mc;
    const double remaining = T - t;
    if (remaining <= 1e-12) {
        est.p = g_dx ? g_dx(x) : 0.0;
        return est;
    }
    SimConfig sub = cfg_inner;
    sub.horizon = remaining;
    sub.dt = std::min(cfg_inner.dt, remaining);
    (void)exec;

    const ControlPolicy shifted{policy.kind, policy.lo, policy.hi,
                                [&policy, t](double s, double y) { return policy.raw(t + s, y); },
                                policy.name};

    std::vector<double> samples(sub.n_paths);
    const std::int64_t np = static_cast<std::int64_t>(sub.n_paths);
    std::string first_error;
    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::parallel)
#endif
    for (std::int64_t k = 0; k < np; ++k) {
        if (failed) continue;
        try {
            RngStream stream(sub.seed, static_cast<std::uint64_t>(k));
            const SamplePath path = simulate_path(drift, shifted, jumps, sub, x, stream);
            const FirstVariationEvaluator fv(path, drift);
            const std::size_t last = path.n_nodes() - 1;
            double v = fv.phi(0, last) * (g_dx ? g_dx(path.terminal()) : 0.0);
            if (f_dx) {
                for (std::size_t i = 0; i < last; ++i) {
                    const double step = path.times[i + 1] - path.times[i];
                    v += fv.phi(0, i) *
                         f_dx(t + path.times[i], path.states[i], path.controls[i]) * step;
                }
            }
            samples[static_cast<std::size_t>(k)] = v;
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!failed) {
                    failed = true;
                    first_error = e.what();
                }
            }
        }
    }
    if (failed) throw NonFiniteState("adjoint sub-simulation failed: " + first_error);
    const MonteCarloEstimate mc = mc_from_samples(samples);
    est.p = mc.mean;
    est.std_err = mc.std_err;
    return est;
}

namespace {

void accumulate_slices(const SamplePath& path, const DriftDecomposition& drift,
                       const StateCostGrad& f_dx, const TerminalGrad& g_dx,
                       std::span<const std::size_t> slice_uniform, std::size_t path_idx,
                       AdjointSamples& out) {
    const FirstVariationEvaluator fv(path, drift);
    const std::size_t last = path.n_nodes() - 1;
    const double g_term = g_dx ? g_dx(path.terminal()) : 0.0;
    std::vector<double> suffix;
    if (f_dx) {
        // suffix[i] = sum_{j >= i} exp(log_phi(0,j)) f_dx(t_j) step_j
        suffix.assign(path.n_nodes(), 0.0);
        for (std::size_t i = last; i-- > 0;) {
            const double step = path.times[i + 1] - path.times[i];
            suffix[i] = suffix[i + 1] + std::exp(fv.log_phi(0, i)) *
                                            f_dx(path.times[i], path.states[i],
                                                 path.controls[i]) *
                                            step;
        }
    }
    for (std::size_t s = 0; s < slice_uniform.size(); ++s) {
        const std::size_t node = path.uniform_nodes[slice_uniform[s]];
        double v = fv.phi(node, last) * g_term;
        if (f_dx) v += suffix[node] * std::exp(-fv.log_phi(0, node));
        out.state[s][path_idx] = path.states[node];
        out.integrand[s][path_idx] = v;
    }
}

std::vector<std::size_t> pick_slices(std::size_t n_uniform, std::size_t stride) {
    std::vector<std::size_t> idx;
    if (stride == 0) stride = 1;
    for (std::size_t i = 0; i < n_uniform; i += stride) idx.push_back(i);
    if (idx.empty() || idx.back() != n_uniform - 1) idx.push_back(n_uniform - 1);
    return idx;
}

}  // namespace

AdjointSamples extract_adjoint_samples(const PathBundle& bundle, const DriftDecomposition& drift,
                                       const StateCostGrad& f_dx, const TerminalGrad& g_dx,
                                       std::size_t slice_stride) {
    if (bundle.empty()) throw EmptyBundle("extract_adjoint_samples: empty bundle");
    const SamplePath& first = bundle.paths.front();
    const std::vector<std::size_t> slices = pick_slices(first.uniform_nodes.size(), slice_stride);
    AdjointSamples out;
    out.times.reserve(slices.size());
    for (std::size_t s : slices) out.times.push_back(first.times[first.uniform_nodes[s]]);
    out.state.assign(slices.size(), std::vector<double>(bundle.size(), 0.0));
    out.integrand.assign(slices.size(), std::vector<double>(bundle.size(), 0.0));
    for (std::size_t p = 0; p < bundle.size(); ++p)
        accumulate_slices(bundle.paths[p], drift, f_dx, g_dx, slices, p, out);
    return out;
}

AdjointSamples gather_adjoint_samples(const DriftDecomposition& drift,
                                      const ControlPolicy& policy, const JumpModel& jumps,
                                      const SimConfig& cfg, double x0, const StateCostGrad& f_dx,
                                      const TerminalGrad& g_dx, std::size_t slice_stride,
                                      Exec exec) {
    // Slice layout comes from the uniform grid, identical across paths.
    const std::size_t n_steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt - 1e-12)));
    const std::vector<std::size_t> slices = pick_slices(n_steps + 1, slice_stride);
    AdjointSamples out;
    out.state.assign(slices.size(), std::vector<double>(cfg.n_paths, 0.0));
    out.integrand.assign(slices.size(), std::vector<double>(cfg.n_paths, 0.0));
    out.times.resize(slices.size());
    for (std::size_t s = 0; s < slices.size(); ++s)
        out.times[s] = slices[s] == n_steps ? cfg.horizon
                                            : static_cast<double>(slices[s]) * cfg.dt;
    for_each_path(
        drift, policy, jumps, cfg, x0,
        [&](const SamplePath& path, std::size_t i) {
            accumulate_slices(path, drift, f_dx, g_dx, slices, i, out);
        },
        exec);
    return out;
}

namespace {

// Least squares of y on powers of (x - mean)/scale via normal equations with
// partial pivoting; shrinks the degree until the system is well posed.
AdjointRegression::Slice fit_slice(double time, std::span<const double> xs,
                                   std::span<const double> ys, int degree) {
    AdjointRegression::Slice slice;
    slice.time = time;
    slice.n = xs.size();
    if (xs.empty()) throw RankDeficient("regression slice has no samples");

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    const double scale = std::sqrt(var);
    slice.mean = mean;
    slice.scale = scale > 1e-12 ? scale : 1.0;
    if (scale <= 1e-12) degree = 0;

    for (int d = degree; d >= 0; --d) {
        const int m = d + 1;
        std::vector<double> xtx(static_cast<std::size_t>(m) * m, 0.0);
        std::vector<double> xty(m, 0.0);
        std::vector<double> basis(m);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double xi = (xs[k] - slice.mean) / slice.scale;
            basis[0] = 1.0;
            for (int j = 1; j < m; ++j) basis[j] = basis[j - 1] * xi;
            for (int r = 0; r < m; ++r) {
                xty[r] += basis[r] * ys[k];
                for (int c = 0; c < m; ++c) xtx[r * m + c] += basis[r] * basis[c];
            }
        }
        // Invert xtx by Gauss-Jordan with partial pivoting.
        std::vector<double> inv(static_cast<std::size_t>(m) * m, 0.0);
        for (int r = 0; r < m; ++r) inv[r * m + r] = 1.0;
        std::vector<double> a = xtx;
        bool ok = true;
        for (int col = 0; col < m && ok; ++col) {
            int piv = col;
            for (int r = col + 1; r < m; ++r)
                if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
            const double pval = a[piv * m + col];
            if (std::abs(pval) < 1e-10 * static_cast<double>(xs.size())) {
                ok = false;
                break;
            }
            if (piv != col) {
                for (int c = 0; c < m; ++c) {
                    std::swap(a[piv * m + c], a[col * m + c]);
                    std::swap(inv[piv * m + c], inv[col * m + c]);
                }
            }
            const double s = 1.0 / a[col * m + col];
            for (int c = 0; c < m; ++c) {
                a[col * m + c] *= s;
                inv[col * m + c] *= s;
            }
            for (int r = 0; r < m; ++r) {
                if (r == col) continue;
                const double f = a[r * m + col];
                if (f == 0.0) continue;
                for (int c = 0; c < m; ++c) {
                    a[r * m + c] -= f * a[col * m + c];
                    inv[r * m + c] -= f * inv[col * m + c];
                }
            }
        }
        if (!ok) continue;

        slice.degree = d;
        slice.coeff.assign(m, 0.0);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) slice.coeff[r] += inv[r * m + c] * xty[c];
        slice.xtx_inv = std::move(inv);

        double ssr = 0.0, sst = 0.0, ymean = 0.0;
        for (double y : ys) ymean += y;
        ymean /= static_cast<double>(ys.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double xi = (xs[k] - slice.mean) / slice.scale;
            double fit = 0.0, pw = 1.0;
            for (int j = 0; j < m; ++j) {
                fit += slice.coeff[j] * pw;
                pw *= xi;
            }
            ssr += (ys[k] - fit) * (ys[k] - fit);
            sst += (ys[k] - ymean) * (ys[k] - ymean);
        }
        slice.s2 = xs.size() > static_cast<std::size_t>(m)
                       ? ssr / static_cast<double>(xs.size() - m)
                       : 0.0;
        slice.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
        if (!std::isfinite(slice.s2) || !std::isfinite(slice.coeff[0]))
            throw RankDeficient("regression produced non-finite fit");
        return slice;
    }
    throw RankDeficient("regression design matrix is singular at every degree");
}

}  // namespace

AdjointRegression::AdjointRegression(std::vector<Slice> slices) : slices_(std::move(slices)) {
    times_.reserve(slices_.size());
    for (const Slice& s : slices_) times_.push_back(s.time);
}

const AdjointRegression::Slice& AdjointRegression::nearest(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return slices_.front();
    if (it == times_.end()) return slices_.back();
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    return (t - times_[hi - 1] <= times_[hi] - t) ? slices_[hi - 1] : slices_[hi];
}

double AdjointRegression::eval(double t, double x) const {
    const Slice& s = nearest(t);
    const double xi = (x - s.mean) / s.scale;
    double fit = 0.0, pw = 1.0;
    for (double c : s.coeff) {
        fit += c * pw;
        pw *= xi;
    }
    return fit;
}

double AdjointRegression::std_err(double t, double x) const {
    const Slice& s = nearest(t);
    const double xi = (x - s.mean) / s.scale;
    const int m = s.degree + 1;
    std::vector<double> basis(m);
    basis[0] = 1.0;
    for (int j = 1; j < m; ++j) basis[j] = basis[j - 1] * xi;
    double quad = 0.0;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) quad += basis[r] * s.xtx_inv[r * m + c] * basis[c];
    return std::sqrt(std::max(0.0, s.s2 * quad));
}

double AdjointRegression::r2_at(double t) const { return nearest(t).r2; }

AdjointRegression fit_adjoint_regression(const AdjointSamples& samples, int basis_degree) {
    if (samples.times.empty()) throw RankDeficient("no slices to fit");
    std::vector<AdjointRegression::Slice> slices(samples.times.size());
    const std::int64_t ns = static_cast<std::int64_t>(samples.times.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
#endif
    for (std::int64_t s = 0; s < ns; ++s)
        slices[s] = fit_slice(samples.times[s], samples.state[s], samples.integrand[s],
                              basis_degree);
    return AdjointRegression(std::move(slices));
}

AdjointRegression adjoint_regression(const PathBundle& bundle, const DriftDecomposition& drift,
                                     const StateCostGrad& f_dx, const TerminalGrad& g_dx,
                                     int basis_degree, std::size_t slice_stride) {
    return fit_adjoint_regression(
        extract_adjoint_samples(bundle, drift, f_dx, g_dx, slice_stride), basis_degree);
}

NecessaryConditionReport necessary_condition_scan(std::span<const AdjointProbe> probes,
                                                  const HamiltonianCtx& ctx,
                                                  std::span<const double> grid_a, double band_eps,
                                                  double z_tol) {
    NecessaryConditionReport rep;
    rep.min_product = std::numeric_limits<double>::infinity();
    const double orient = ctx.sense == ProblemSense::minimize ? 1.0 : -1.0;
    for (const AdjointProbe& pr : probes) {
        if (std::abs(pr.x) < band_eps) {
            ++rep.n_probes_skipped;
            continue;
        }
        ++rep.n_probes_used;
        const double dah = hamiltonian_da(ctx, pr.t, pr.x, pr.p, pr.control);
        const double da_b1 = ctx.drift.b1.da(pr.x, pr.control);
        for (double beta : grid_a) {
            const double dir = beta - pr.control;
            const double product = orient * dah * dir;
            rep.min_product = std::min(rep.min_product, product);
            const double tol = z_tol * std::abs(da_b1) * pr.p_std_err * std::abs(dir) + 1e-12;
            if (product < -tol) ++rep.n_violations;
            ++rep.n_products;
        }
    }
    if (rep.n_products > 0)
        rep.violation_fraction =
            static_cast<double>(rep.n_violations) / static_cast<double>(rep.n_products);
    if (rep.n_products == 0) rep.min_product = 0.0;
    return rep;
}

double sign_relation_frequency(std::span<const AdjointProbe> probes, double band_eps,
                               double min_abs_z) {
    std::size_t used = 0, hits = 0;
    for (const AdjointProbe& pr : probes) {
        if (std::abs(pr.x) < band_eps) continue;
        if (std::abs(pr.p) < min_abs_z * pr.p_std_err) continue;
        ++used;
        if (sgn(pr.p) == -sgn(pr.x)) ++hits;
    }
    return used > 0 ? static_cast<double>(hits) / static_cast<double>(used) : 0.0;
}

std::vector<AdjointProbe> gather_adjoint_probes(const DriftDecomposition& drift,
                                                const ControlPolicy& policy,
                                                const JumpModel& jumps, const SimConfig& outer,
                                                double x0, std::size_t n_probes,
                                                const SimConfig& cfg_inner,
                                                const StateCostGrad& f_dx,
                                                const TerminalGrad& g_dx) {
    outer.validate();
    std::vector<AdjointProbe> probes(n_probes);
    for (std::size_t i = 0; i < n_probes; ++i) {
        RngStream stream(outer.seed, i);
        const SamplePath path = simulate_path(drift, policy, jumps, outer, x0, stream);
        // Stratified interior probe time: sweep (0, T) across the probe set.
        const std::size_t nu = path.uniform_nodes.size();
        const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(n_probes);
        std::size_t u = 1 + static_cast<std::size_t>(frac * static_cast<double>(nu - 2));
        u = std::min(u, nu - 2);
        const std::size_t node = path.uniform_nodes[u];
        const double t = path.times[node];
        const double x = path.states[node];
        SimConfig inner = cfg_inner;
        inner.seed = cfg_inner.seed + 0x9e3779b97f4a7c15ULL * (i + 1);
        const AdjointEstimate est =
            adjoint_nested_mc(t, x, policy, drift, jumps, inner, f_dx, g_dx);
        probes[i] = {t, x, policy(t, x), est.p, est.std_err};
    }
    return probes;
}

}  // namespace jumpctl
