#include "jumpctl/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "jumpctl/errors.hpp"

namespace jumpctl {

namespace detail {

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

}  // namespace detail

namespace {

double kernel_raw(double u) {
    if (u * u >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

}  // namespace

double Mollifier::normalization() {
    static const double c = 1.0 / detail::integrate(kernel_raw, -1.0, 1.0, 1e-14);
    return c;
}

Mollifier::Mollifier(int n) : n_(n), h_(1.0 / n) {
    if (n < 1) throw std::invalid_argument("mollifier index must be >= 1");
}

double Mollifier::kernel(double u) const { return normalization() * kernel_raw(u); }

double Mollifier::kernel_d1(double u) const {
    if (u * u >= 1.0) return 0.0;
    const double w = 1.0 / (1.0 - u * u);
    return -2.0 * u * w * w * kernel(u);
}

double Mollifier::kernel_d2(double u) const {
    if (u * u >= 1.0) return 0.0;
    const double w = 1.0 / (1.0 - u * u);
    const double u2 = u * u;
    return (-2.0 * w * w - 8.0 * u2 * w * w * w + 4.0 * u2 * w * w * w * w) * kernel(u);
}

// Cubic Hermite table on a uniform grid.
struct HermiteTable {
    double lo = 0.0, hi = 0.0, dx = 0.0;
    std::vector<double> v;  // values
    std::vector<double> d;  // derivatives

    bool contains(double x) const { return x >= lo && x <= hi; }

    double eval(double x) const {
        const double s = (x - lo) / dx;
        std::size_t i = static_cast<std::size_t>(s);
        if (i + 1 >= v.size()) i = v.size() - 2;
        const double t = s - static_cast<double>(i);
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * v[i] + h10 * dx * d[i] + h01 * v[i + 1] + h11 * dx * d[i + 1];
    }
};

struct MollifiedDrift::Impl {
    PiecewiseLipschitzFn b2;
    Mollifier kernel;
    bool affine_only = true;
    std::vector<HermiteTable> value_zones;  // value + derivative
    std::vector<HermiteTable> deriv_zones;  // derivative + second derivative
    double sup = 0.0;

    explicit Impl(const PiecewiseLipschitzFn& fn, int n) : b2(fn), kernel(n) {}

    // Direct quadrature of the convolution and its kernel-derivative forms.
    double quad_value(double x) const {
        const double h = kernel.width();
        return split_integrate(
            x, [this](double u) { return kernel.kernel(u); },
            [this, x, h](double u) { return b2(x - h * u); }, 1e-11);
    }
    double quad_derivative(double x) const {
        const double h = kernel.width();
        return split_integrate(
                   x, [this](double u) { return kernel.kernel_d1(u); },
                   [this, x, h](double u) { return b2(x - h * u); }, 1e-11) /
               h;
    }
    double quad_second(double x) const {
        const double h = kernel.width();
        return split_integrate(
                   x, [this](double u) { return kernel.kernel_d2(u); },
                   [this, x, h](double u) { return b2(x - h * u); }, 1e-11) /
               (h * h);
    }

    // Integrate w(u) * g(u) over [-1,1], splitting where x - h*u crosses a
    // breakpoint so every subinterval is smooth.
    template <typename W, typename G>
    double split_integrate(double x, W w, G g, double tol) const {
        const double h = kernel.width();
        std::vector<double> cuts{-1.0, 1.0};
        for (double xi : b2.breakpoints()) {
            const double u = (x - xi) / h;
            if (u > -1.0 && u < 1.0) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        auto f = [&w, &g](double u) { return w(u) * g(u); };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            acc += detail::integrate(f, cuts[i], cuts[i + 1], tol);
        return acc;
    }

    double value(double x) const {
        for (const HermiteTable& z : value_zones)
            if (z.contains(x)) return z.eval(x);
        if (affine_only) return b2(x);
        return quad_value(x);
    }

    double derivative(double x) const {
        for (const HermiteTable& z : deriv_zones)
            if (z.contains(x)) return z.eval(x);
        if (affine_only) {
            const auto& aff = b2.pieces()[b2.piece_index(x)].affine;
            return aff ? aff->first : 0.0;
        }
        return quad_derivative(x);
    }

    double antiderivative(double x) const {
        // From Fubini: the antiderivative of the convolution equals the
        // convolution of the antiderivative, anchored at 0.
        const double h = kernel.width();
        auto f = [this, x, h](double u) {
            return kernel.kernel(u) * (b2.antiderivative(x - h * u) - b2.antiderivative(-h * u));
        };
        std::vector<double> cuts{-1.0, 1.0};
        for (double xi : b2.breakpoints()) {
            for (double ref : {x - xi, -xi}) {
                const double u = ref / h;
                if (u > -1.0 && u < 1.0) cuts.push_back(u);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            acc += detail::integrate(f, cuts[i], cuts[i + 1], 1e-11);
        return acc;
    }
};

namespace {

HermiteTable build_table(double lo, double hi, std::size_t n_nodes,
                         const std::function<double(double)>& value,
                         const std::function<double(double)>& deriv) {
    HermiteTable t;
    t.lo = lo;
    t.hi = hi;
    t.dx = (hi - lo) / static_cast<double>(n_nodes - 1);
    t.v.resize(n_nodes);
    t.d.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double x = lo + t.dx * static_cast<double>(i);
        t.v[i] = value(x);
        t.d[i] = deriv(x);
    }
    return t;
}

}  // namespace

MollifiedDrift::MollifiedDrift(const PiecewiseLipschitzFn& b2, int n) {
    auto impl = std::make_shared<Impl>(b2, n);
    for (const Piece& p : b2.pieces())
        if (!p.affine) impl->affine_only = false;

    const double h = impl->kernel.width();
    std::vector<std::pair<double, double>> zones;
    if (impl->affine_only) {
        for (double xi : b2.breakpoints()) zones.emplace_back(xi - h, xi + h);
    } else {
        // No exact shortcut away from breakpoints; table a wide window instead.
        double lo = -8.0, hi = 8.0;
        if (!b2.breakpoints().empty()) {
            lo = std::min(lo, b2.breakpoints().front() - 1.0 - h);
            hi = std::max(hi, b2.breakpoints().back() + 1.0 + h);
        }
        zones.emplace_back(lo, hi);
    }
    // Merge overlaps.
    std::sort(zones.begin(), zones.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& z : zones) {
        if (!merged.empty() && z.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, z.second);
        else
            merged.push_back(z);
    }
    for (const auto& z : merged) {
        const double width = z.second - z.first;
        const std::size_t nodes =
            impl->affine_only
                ? 2049
                : std::max<std::size_t>(2049, static_cast<std::size_t>(width / (0.25 * h)) + 2);
        impl->value_zones.push_back(build_table(
            z.first, z.second, nodes, [&impl](double x) { return impl->quad_value(x); },
            [&impl](double x) { return impl->quad_derivative(x); }));
        impl->deriv_zones.push_back(build_table(
            z.first, z.second, nodes, [&impl](double x) { return impl->quad_derivative(x); },
            [&impl](double x) { return impl->quad_second(x); }));
    }
    impl->sup = b2.global_bound();
    impl_ = std::move(impl);
}

double MollifiedDrift::value(double x) const { return impl_->value(x); }
double MollifiedDrift::derivative(double x) const { return impl_->derivative(x); }
double MollifiedDrift::antiderivative(double x) const { return impl_->antiderivative(x); }
double MollifiedDrift::sup_bound() const { return impl_->sup; }
int MollifiedDrift::index() const { return impl_->kernel.index(); }
double MollifiedDrift::width() const { return impl_->kernel.width(); }

DriftDecomposition::B2Override MollifiedDrift::as_override() const {
    DriftDecomposition::B2Override o;
    auto impl = impl_;
    o.value = [impl](double x) { return impl->value(x); };
    o.derivative = [impl](double x) { return impl->derivative(x); };
    o.antiderivative = [impl](double x) { return impl->antiderivative(x); };
    o.sup_bound = impl->sup;
    return o;
}

MollifiedDrift mollify(const PiecewiseLipschitzFn& b2, int n) { return MollifiedDrift(b2, n); }

MonteCarloEstimate coupling_error(const DriftDecomposition& drift, int n,
                                  const ControlPolicy& policy, const JumpModel& jumps,
                                  const SimConfig& cfg, double x0, Exec exec) {
    cfg.validate();
    (void)exec;
    const DriftDecomposition smooth = drift.with_b2_override(mollify(drift.b2, n).as_override());
    std::vector<double> samples(cfg.n_paths);
    const std::int64_t np = static_cast<std::int64_t>(cfg.n_paths);
    std::string first_error;
    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::parallel)
#endif
    for (std::int64_t i = 0; i < np; ++i) {
        if (failed) continue;
        try {
            RngStream s1(cfg.seed, static_cast<std::uint64_t>(i));
            RngStream s2(cfg.seed, static_cast<std::uint64_t>(i));
            const SamplePath exact = simulate_path(drift, policy, jumps, cfg, x0, s1);
            const SamplePath approx = simulate_path(smooth, policy, jumps, cfg, x0, s2);
            double sup = 0.0;
            for (std::size_t k = 0; k < exact.states.size(); ++k)
                sup = std::max(sup, std::abs(exact.states[k] - approx.states[k]));
            samples[static_cast<std::size_t>(i)] = sup * sup;
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!failed) {
                    failed = true;
                    first_error = "path " + std::to_string(i) + ": " + e.what();
                }
            }
        }
    }
    if (failed) throw NonFiniteState(first_error);
    return mc_from_samples(samples);
}

namespace {

double path_drift_error_p4(const SamplePath& path, const PiecewiseLipschitzFn& b2,
                           const MollifiedDrift& smooth) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
        const double step = path.times[i + 1] - path.times[i];
        const double d = smooth.value(path.states[i]) - b2(path.states[i]);
        acc += d * d * d * d * step;
    }
    return acc;
}

}  // namespace

MonteCarloEstimate drift_error_integral(const PiecewiseLipschitzFn& b2, int n,
                                        const PathBundle& bundle) {
    if (bundle.empty()) throw EmptyBundle("drift_error_integral: empty bundle");
    const MollifiedDrift smooth(b2, n);
    std::vector<double> samples(bundle.size());
    for (std::size_t i = 0; i < bundle.size(); ++i)
        samples[i] = path_drift_error_p4(bundle.paths[i], b2, smooth);
    return mc_from_samples(samples);
}

MonteCarloEstimate drift_error_integral_streaming(const DriftDecomposition& drift, int n,
                                                  const ControlPolicy& policy,
                                                  const JumpModel& jumps, const SimConfig& cfg,
                                                  double x0, Exec exec) {
    const MollifiedDrift smooth(drift.b2, n);
    std::vector<double> samples(cfg.n_paths);
    for_each_path(
        drift, policy, jumps, cfg, x0,
        [&samples, &drift, &smooth](const SamplePath& p, std::size_t i) {
            samples[i] = path_drift_error_p4(p, drift.b2, smooth);
        },
        exec);
    return mc_from_samples(samples);
}

}  // namespace jumpctl
