#include "jumpctl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "jumpctl/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace jumpctl {

void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

namespace detail {

void check_finite(double x, double t) {
    if (!std::isfinite(x) || std::abs(x) > 1e12) {
        std::ostringstream os;
        os << "state left representable range at t=" << t << " (x=" << x << ")";
        throw NonFiniteState(os.str());
    }
}

AdaptedGrid build_grid(double horizon, double dt, const JumpRecord& rec) {
    AdaptedGrid g;
    const std::size_t n_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12)));
    std::vector<double> uniform(n_steps + 1);
    for (std::size_t i = 0; i < n_steps; ++i) uniform[i] = static_cast<double>(i) * dt;
    uniform[n_steps] = horizon;

    g.times.reserve(n_steps + 1 + rec.count());
    g.uniform_nodes.reserve(n_steps + 1);
    std::size_t iu = 0, ij = 0;
    while (iu < uniform.size() || ij < rec.count()) {
        if (ij >= rec.count() || (iu < uniform.size() && uniform[iu] <= rec.epochs[ij])) {
            if (iu < uniform.size() && ij < rec.count() && uniform[iu] == rec.epochs[ij]) {
                g.jump_nodes.emplace_back(g.times.size(), ij);
                ++ij;
            }
            g.uniform_nodes.push_back(static_cast<std::uint32_t>(g.times.size()));
            g.times.push_back(uniform[iu]);
            ++iu;
        } else {
            g.jump_nodes.emplace_back(g.times.size(), ij);
            g.times.push_back(rec.epochs[ij]);
            ++ij;
        }
    }
    return g;
}

}  // namespace detail

SamplePath simulate_path(const DriftDecomposition& drift, const ControlPolicy& policy,
                         const JumpModel& jumps, const SimConfig& cfg, double x0,
                         RngStream& stream) {
    cfg.validate();
    const JumpRecord rec = sample_jumps(jumps, cfg.horizon, stream);
    detail::AdaptedGrid grid = detail::build_grid(cfg.horizon, cfg.dt, rec);

    SamplePath path;
    path.times = std::move(grid.times);
    path.uniform_nodes = std::move(grid.uniform_nodes);
    path.sigma = cfg.sigma;
    path.scheme = Scheme::direct_euler;
    const std::size_t n = path.times.size();
    path.states_pre.resize(n);
    path.states.resize(n);
    path.brownian.resize(n - 1);
    path.controls.resize(n - 1);

    std::size_t next_jump = 0;
    double x = x0;
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
        x = x + drift.total(x, a) * step + cfg.sigma * dB;
        path.states_pre[i + 1] = x;
        while (next_jump < grid.jump_nodes.size() && grid.jump_nodes[next_jump].first == i + 1) {
            const std::size_t jidx = grid.jump_nodes[next_jump].second;
            const double z = rec.sizes[jidx];
            const double pre = x;
            x += jumps.gamma(z);
            // Store the realized state increment so jump bookkeeping is exact.
            path.jumps.push_back({path.times[i + 1], z, x - pre, i + 1});
            ++next_jump;
        }
        detail::check_finite(x, path.times[i + 1]);
        path.states[i + 1] = x;
    }
    return path;
}

void for_each_path(const DriftDecomposition& drift, const ControlPolicy& policy,
                   const JumpModel& jumps, const SimConfig& cfg, double x0,
                   const std::function<void(const SamplePath&, std::size_t)>& consume,
                   Exec exec) {
    cfg.validate();
    const std::int64_t n = static_cast<std::int64_t>(cfg.n_paths);
    std::string first_error;
    bool failed = false;

    if (exec == Exec::serial) {
        for (std::int64_t i = 0; i < n; ++i) {
            try {
                RngStream stream(cfg.seed, static_cast<std::uint64_t>(i));
                const SamplePath p = simulate_path(drift, policy, jumps, cfg, x0, stream);
                consume(p, static_cast<std::size_t>(i));
            } catch (const std::exception& e) {
                throw NonFiniteState("path " + std::to_string(i) + ": " + e.what());
            }
        }
        return;
    }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        if (failed) continue;
        try {
            RngStream stream(cfg.seed, static_cast<std::uint64_t>(i));
            const SamplePath p = simulate_path(drift, policy, jumps, cfg, x0, stream);
            consume(p, static_cast<std::size_t>(i));
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
}

PathBundle simulate_bundle(const DriftDecomposition& drift, const ControlPolicy& policy,
                           const JumpModel& jumps, const SimConfig& cfg, double x0, Exec exec) {
    PathBundle bundle;
    bundle.seed = cfg.seed;
    bundle.config = cfg;
    bundle.paths.resize(cfg.n_paths);
    for_each_path(
        drift, policy, jumps, cfg, x0,
        [&bundle](const SamplePath& p, std::size_t i) { bundle.paths[i] = p; }, exec);
    return bundle;
}

double path_cost(const SamplePath& path, const RunningCost& f, const TerminalCost& g) {
    double acc = 0.0;
    if (f) {
        for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
            const double step = path.times[i + 1] - path.times[i];
            acc += f(path.times[i], path.states[i], path.controls[i]) * step;
        }
    }
    if (g) acc += g(path.terminal());
    return acc;
}

MonteCarloEstimate evaluate_cost(const PathBundle& bundle, const RunningCost& f,
                                 const TerminalCost& g) {
    if (bundle.empty()) throw EmptyBundle("evaluate_cost: empty bundle");
    std::vector<double> costs(bundle.size());
    for (std::size_t i = 0; i < bundle.size(); ++i) costs[i] = path_cost(bundle.paths[i], f, g);
    return mc_from_samples(costs);
}

MonteCarloEstimate evaluate_cost_streaming(const DriftDecomposition& drift,
                                           const ControlPolicy& policy, const JumpModel& jumps,
                                           const SimConfig& cfg, double x0, const RunningCost& f,
                                           const TerminalCost& g, Exec exec) {
    std::vector<double> costs(cfg.n_paths);
    for_each_path(
        drift, policy, jumps, cfg, x0,
        [&costs, &f, &g](const SamplePath& p, std::size_t i) { costs[i] = path_cost(p, f, g); },
        exec);
    return mc_from_samples(costs);
}

void export_csv(const PathBundle& bundle, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open " + file);
    out << "path_id,t,x,a,dB,jump_z\n";
    char line[192];
    for (std::size_t p = 0; p < bundle.size(); ++p) {
        const SamplePath& path = bundle.paths[p];
        std::size_t jn = 0;
        for (std::size_t i = 0; i < path.n_nodes(); ++i) {
            const bool has_step = i + 1 < path.n_nodes();
            double jump_z = 0.0;
            while (jn < path.jumps.size() && path.jumps[jn].node < i) ++jn;
            if (jn < path.jumps.size() && path.jumps[jn].node == i) jump_z = path.jumps[jn].size;
            std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", p,
                          path.times[i], path.states[i], has_step ? path.controls[i] : 0.0,
                          has_step ? path.brownian[i] : 0.0, jump_z);
            out << line;
        }
    }
}

namespace {

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ofstream& out, double x) {
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    put_u64(out, v);
}

double get_f64(std::ifstream& in) {
    const std::uint64_t v = get_u64(in);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

void put_vec(std::ofstream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double x : v) put_f64(out, x);
}

std::vector<double> get_vec(std::ifstream& in) {
    std::vector<double> v(get_u64(in));
    for (double& x : v) x = get_f64(in);
    return v;
}

constexpr std::uint64_t kBundleMagic = 0x4a43544c42554e31ULL;  // "JCTLBUN1"

}  // namespace

void export_binary(const PathBundle& bundle, const std::string& file,
                   std::uint64_t config_hash) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file);
    put_u64(out, kBundleMagic);
    put_u64(out, config_hash);
    put_u64(out, bundle.seed);
    put_u64(out, bundle.size());
    for (const SamplePath& p : bundle.paths) {
        put_vec(out, p.times);
        put_vec(out, p.states_pre);
        put_vec(out, p.states);
        put_vec(out, p.brownian);
        put_vec(out, p.controls);
        put_u64(out, p.uniform_nodes.size());
        for (std::uint32_t u : p.uniform_nodes) put_u64(out, u);
        put_u64(out, p.jumps.size());
        for (const JumpEvent& j : p.jumps) {
            put_f64(out, j.time);
            put_f64(out, j.size);
            put_f64(out, j.increment);
            put_u64(out, j.node);
        }
        put_f64(out, p.sigma);
        put_u64(out, p.scheme == Scheme::transformed ? 1 : 0);
    }
}

PathBundle import_binary(const std::string& file, std::uint64_t* config_hash) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file);
    if (get_u64(in) != kBundleMagic) throw IoError("bad bundle header in " + file);
    const std::uint64_t hash = get_u64(in);
    if (config_hash) *config_hash = hash;
    PathBundle bundle;
    bundle.seed = get_u64(in);
    bundle.paths.resize(get_u64(in));
    for (SamplePath& p : bundle.paths) {
        p.times = get_vec(in);
        p.states_pre = get_vec(in);
        p.states = get_vec(in);
        p.brownian = get_vec(in);
        p.controls = get_vec(in);
        p.uniform_nodes.resize(get_u64(in));
        for (std::uint32_t& u : p.uniform_nodes) u = static_cast<std::uint32_t>(get_u64(in));
        p.jumps.resize(get_u64(in));
        for (JumpEvent& j : p.jumps) {
            j.time = get_f64(in);
            j.size = get_f64(in);
            j.increment = get_f64(in);
            j.node = get_u64(in);
        }
        p.sigma = get_f64(in);
        p.scheme = get_u64(in) == 1 ? Scheme::transformed : Scheme::direct_euler;
    }
    if (!in) throw IoError("truncated bundle in " + file);
    return bundle;
}

}  // namespace jumpctl
