#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jumpctl/config.hpp"
#include "jumpctl/diagnostics.hpp"
#include "jumpctl/errors.hpp"
#include "jumpctl/insurance.hpp"
#include "jumpctl/manifest.hpp"
#include "jumpctl/mollify.hpp"
#include "jumpctl/smp.hpp"
#include "jumpctl/svg.hpp"
#include "jumpctl/transform.hpp"
#include "jumpctl/version.hpp"

namespace fs = std::filesystem;
using namespace jumpctl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitThreshold = 2;

struct Cli {
    RunConfig cfg;
    std::string out_dir;
    std::uint64_t config_hash = 0;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    std::ofstream open(const std::string& name) const {
        std::ofstream f(fs::path(out_dir) / name);
        if (!f) throw IoError("cannot open output file " + name);
        return f;
    }

    std::string path_of(const std::string& name) const {
        return (fs::path(out_dir) / name).string();
    }

    void finish(const std::string& subcommand, std::vector<std::uint64_t> seeds) const {
        RunManifest m;
        m.config_hash = config_hash;
        m.version = kVersion;
        m.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        m.job_seeds = std::move(seeds);
        write_manifest(m, path_of("manifest_" + subcommand + ".json"));
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

int run_simulate(const Cli& cli) {
    const RunConfig& c = cli.cfg;
    SimConfig sim = c.sim;
    sim.sigma = c.model.sigma_total();
    const DriftDecomposition drift = build_surplus_drift(c.model);
    const JumpModel jumps = surplus_jumps(c.model);
    const ControlPolicy policy = policy_by_name(c.experiment.policy, c.model.a_max);
    PathBundle bundle;
    if (sim.scheme == Scheme::transformed) {
        bundle.seed = sim.seed;
        bundle.config = sim;
        bundle.paths.resize(sim.n_paths);
        for (std::size_t i = 0; i < sim.n_paths; ++i) {
            RngStream s(sim.seed, i);
            bundle.paths[i] = simulate_transformed(drift, policy, jumps, sim, c.model.x0, s);
        }
    } else {
        bundle = simulate_bundle(drift, policy, jumps, sim, c.model.x0);
    }
    for (const std::string& f : c.output.formats) {
        if (f == "csv") export_csv(bundle, cli.path_of("bundle.csv"));
        if (f == "bin") export_binary(bundle, cli.path_of("bundle.bin"), cli.config_hash);
    }
    std::cout << "simulate: " << bundle.size() << " paths, scheme "
              << (sim.scheme == Scheme::transformed ? "transformed" : "direct_euler") << "\n";
    cli.finish("simulate", {sim.seed});
    return kExitOk;
}

int run_sweep(const Cli& cli) {
    const RunConfig& c = cli.cfg;
    SimConfig sim = c.sim;
    SweepResult result;
    if (c.experiment.axis == "T") {
        std::vector<ControlPolicy> policies;
        for (const std::string& name : c.experiment.policies)
            policies.push_back(policy_by_name(name, c.model.a_max));
        result = sweep_T(c.model, policies, c.experiment.T_list, sim);
    } else {
        const ControlPolicy policy = policy_by_name(c.experiment.policy, c.model.a_max);
        result = c.experiment.axis == "lambda"
                     ? sweep_lambda(c.model, policy, c.experiment.lambda_list, sim)
                     : sweep_tau(c.model, policy, c.experiment.tau_list, sim);
    }

    const std::string csv_name = "sweep_" + result.axis + ".csv";
    {
        auto out = cli.open(csv_name);
        out << "axis_value,policy,mean,ci95,n\n";
        for (const SweepPoint& p : result.points)
            out << fmt(p.axis_value) << "," << p.policy << "," << fmt(p.estimate.mean) << ","
                << fmt(p.estimate.ci95) << "," << p.estimate.n << "\n";
    }

    bool want_svg = false;
    for (const std::string& f : c.output.formats) want_svg |= f == "svg";
    if (want_svg) {
        std::vector<PlotSeries> series;
        for (const SweepPoint& p : result.points) {
            PlotSeries* s = nullptr;
            for (PlotSeries& cand : series)
                if (cand.label == p.policy) s = &cand;
            if (!s) {
                series.push_back({p.policy, {}, {}, {}});
                s = &series.back();
            }
            s->x.push_back(p.axis_value);
            s->y.push_back(p.estimate.mean);
            s->yerr.push_back(p.estimate.ci95);
        }
        emit_svg(series, result.axis, "terminal second moment",
                 "sweep over " + result.axis, cli.path_of("sweep_" + result.axis + ".svg"));
    }
    std::cout << "sweep: axis " << result.axis << ", " << result.points.size() << " points -> "
              << csv_name << "\n";
    cli.finish("sweep", {sim.seed});
    return kExitOk;
}

int run_transform_check(const Cli& cli) {
    const RunConfig& c = cli.cfg;
    const DriftDecomposition drift = build_surplus_drift(c.model);
    const std::vector<BreakCoefficient> coeffs = active_discontinuities(drift);
    auto out = cli.open("transform_check.csv");
    out << "model,k,xi,alpha,c,min_gprime,roundtrip_err\n";
    if (coeffs.empty()) {
        std::cout << "transform-check: no active breakpoints (identity map)\n";
        cli.finish("transform-check", {});
        return kExitOk;
    }
    const double cbump = select_c(coeffs);
    const TransformG g(coeffs, cbump);
    double min_gp = 1e300, rt = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = -10.0 + 20.0 * i / 20000.0;
        min_gp = std::min(min_gp, g.prime(x));
        rt = std::max(rt, std::abs(g.inverse(g(x)) - x));
    }
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        out << "surplus," << k << "," << fmt(coeffs[k].xi) << "," << fmt(coeffs[k].alpha) << ","
            << fmt(cbump) << "," << fmt(min_gp) << "," << fmt(rt) << "\n";
    std::cout << "transform-check: c=" << fmt(cbump) << " min G'=" << fmt(min_gp)
              << " roundtrip=" << fmt(rt) << "\n";
    cli.finish("transform-check", {});
    bool ok = min_gp > 0.0 && rt < 1e-10;
    for (const BreakCoefficient& bc : coeffs) ok = ok && g(bc.xi) == bc.xi;
    return ok ? kExitOk : kExitThreshold;
}

int run_mollify_check(const Cli& cli) {
    const RunConfig& c = cli.cfg;
    SimConfig sim = c.sim;
    sim.sigma = c.model.sigma_total();
    const DriftDecomposition drift = build_surplus_drift(c.model);
    const ControlPolicy policy = policy_by_name(c.experiment.policy, c.model.a_max);
    const JumpModel jumps = surplus_jumps(c.model);
    auto out = cli.open("mollify_check.csv");
    out << "n,coupling_error,coupling_ci95,drift_error_integral,drift_ci95\n";
    double prev_mean = 0.0, prev_ci = 0.0;
    bool first = true, monotone = true;
    for (std::int64_t n : c.experiment.n_levels) {
        const MonteCarloEstimate cerr =
            coupling_error(drift, static_cast<int>(n), policy, jumps, sim, c.model.x0);
        const MonteCarloEstimate derr = drift_error_integral_streaming(
            drift, static_cast<int>(n), policy, jumps, sim, c.model.x0);
        out << n << "," << fmt(cerr.mean) << "," << fmt(cerr.ci95) << "," << fmt(derr.mean) << ","
            << fmt(derr.ci95) << "\n";
        if (!first && cerr.mean > prev_mean + prev_ci + cerr.ci95) monotone = false;
        prev_mean = cerr.mean;
        prev_ci = cerr.ci95;
        first = false;
    }
    std::cout << "mollify-check: " << c.experiment.n_levels.size() << " levels, "
              << (monotone ? "non-increasing within CI" : "NOT monotone") << "\n";
    cli.finish("mollify-check", {sim.seed});
    return monotone ? kExitOk : kExitThreshold;
}

int run_smp_check(const Cli& cli) {
    const RunConfig& c = cli.cfg;
    SimConfig outer = c.sim;
    outer.sigma = c.model.sigma_total();
    const DriftDecomposition drift = build_surplus_drift(c.model);
    const JumpModel jumps = surplus_jumps(c.model);
    const ControlPolicy policy = policy_by_name(c.experiment.policy, c.model.a_max);

    SimConfig inner = outer;
    inner.n_paths = static_cast<std::size_t>(c.experiment.inner_paths);
    inner.seed = outer.seed + 1;

    // Terminal objective encoded for the canonical maximization problem.
    const TerminalGrad g_dx = [](double x) { return -2.0 * x; };
    const std::vector<AdjointProbe> probes = gather_adjoint_probes(
        drift, policy, jumps, outer, c.model.x0,
        static_cast<std::size_t>(c.experiment.probes), inner, nullptr, g_dx);

    HamiltonianCtx ctx;
    ctx.drift = drift;
    ctx.jump_compensator = jumps.gamma_mean_rate;
    ctx.sense = ProblemSense::maximize;
    std::vector<double> grid_a;
    for (std::int64_t i = 0; i < c.experiment.grid_a_points; ++i)
        grid_a.push_back(-c.model.a_max + 2.0 * c.model.a_max * static_cast<double>(i) /
                                              static_cast<double>(c.experiment.grid_a_points - 1));
    const NecessaryConditionReport rep =
        necessary_condition_scan(probes, ctx, grid_a, c.experiment.band_eps);
    const double sign_freq = sign_relation_frequency(probes, c.experiment.band_eps, 2.0);

    nlohmann::json j;
    j["min_product"] = rep.min_product;
    j["violation_fraction"] = rep.violation_fraction;
    j["sign_relation_frequency"] = sign_freq;
    j["n_probes_used"] = rep.n_probes_used;
    j["n_probes_skipped"] = rep.n_probes_skipped;
    nlohmann::json table = nlohmann::json::array();
    for (const AdjointProbe& p : probes)
        table.push_back({{"t", p.t},
                         {"x", p.x},
                         {"control", p.control},
                         {"p", p.p},
                         {"p_std_err", p.p_std_err}});
    j["adjoint_probe_table"] = table;
    {
        auto jf = cli.open("smp_check.json");
        jf << j.dump(2) << "\n";
    }
    {
        auto out = cli.open("smp_check.csv");
        out << "t,x,control,p,p_std_err,da_hamiltonian\n";
        for (const AdjointProbe& p : probes)
            out << fmt(p.t) << "," << fmt(p.x) << "," << fmt(p.control) << "," << fmt(p.p) << ","
                << fmt(p.p_std_err) << "," << fmt(hamiltonian_da(ctx, p.t, p.x, p.p, p.control))
                << "\n";
    }
    std::cout << "smp-check: violation_fraction=" << fmt(rep.violation_fraction)
              << " sign_relation_frequency=" << fmt(sign_freq)
              << " min_product=" << fmt(rep.min_product) << "\n";
    cli.finish("smp-check", {outer.seed, inner.seed});
    const bool ok = rep.violation_fraction <= c.experiment.violation_max &&
                    sign_freq >= c.experiment.sign_min;
    return ok ? kExitOk : kExitThreshold;
}

int run_diagnostics(const Cli& cli, const std::vector<std::string>& beta_checks) {
    const RunConfig& c = cli.cfg;
    SimConfig sim = c.sim;
    sim.sigma = c.model.sigma_total();
    const DriftDecomposition drift = build_surplus_drift(c.model);
    const JumpModel jumps = surplus_jumps(c.model);

    // Density scan of the uncontrolled state equation.
    const std::vector<double>& t_list = c.experiment.t_list;
    std::vector<std::vector<double>> slices(t_list.size(),
                                            std::vector<double>(sim.n_paths, 0.0));
    std::vector<std::size_t> slice_nodes(t_list.size());
    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(sim.horizon / sim.dt - 1e-12));
    for (std::size_t s = 0; s < t_list.size(); ++s) {
        const double idx = t_list[s] / sim.dt;
        slice_nodes[s] = std::min(n_steps, static_cast<std::size_t>(std::llround(idx)));
    }
    for_each_path(drift, zero_policy(), jumps, sim, c.model.x0,
                  [&](const SamplePath& p, std::size_t i) {
                      for (std::size_t s = 0; s < slice_nodes.size(); ++s)
                          slices[s][i] = p.states[p.uniform_nodes[slice_nodes[s]]];
                  });
    const DensityScan scan = density_sup_scan(slices, t_list);
    {
        auto out = cli.open("density_scan.csv");
        out << "t,sup_density,scaled,bandwidth\n";
        for (std::size_t s = 0; s < scan.times.size(); ++s)
            out << fmt(scan.times[s]) << "," << fmt(scan.sup_density[s]) << ","
                << fmt(scan.scaled[s]) << "," << fmt(scan.bandwidth[s]) << "\n";
    }
    double lo = 1e300, hi = 0.0;
    for (double v : scan.scaled) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double band_ratio = lo > 0.0 ? hi / lo : 1e300;

    // Conditional last-gap moments against the closed form.
    std::vector<std::pair<int, double>> pairs;
    for (std::size_t i = 0; i < c.experiment.beta_n.size() && i < c.experiment.beta_t.size(); ++i)
        pairs.emplace_back(static_cast<int>(c.experiment.beta_n[i]), c.experiment.beta_t[i]);
    for (const std::string& spec : beta_checks) {
        int n = 1;
        double t = 1.0;
        if (std::sscanf(spec.c_str(), "n=%d,t=%lf", &n, &t) != 2)
            throw ParseError(0, "--beta-check expects n=<int>,t=<float>");
        pairs.emplace_back(n, t);
    }
    bool beta_ok = true;
    {
        auto out = cli.open("beta_check.csv");
        out << "n,t,mc,analytic,se\n";
        RngStream stream(sim.seed, 0xbe7a);
        for (const auto& [n, t] : pairs) {
            const GapMomentCheck chk =
                last_jump_gap_moment(c.model.lambda, t, n, 200000, stream);
            out << chk.n << "," << fmt(chk.t) << "," << fmt(chk.mc.mean) << ","
                << fmt(chk.analytic) << "," << fmt(chk.mc.std_err) << "\n";
            if (std::abs(chk.mc.mean - chk.analytic) > 3.0 * chk.mc.std_err + 1e-12)
                beta_ok = false;
        }
    }
    std::cout << "diagnostics: scaled-sup band ratio=" << fmt(band_ratio)
              << " beta_identities=" << (beta_ok ? "ok" : "FAIL") << "\n";
    cli.finish("diagnostics", {sim.seed});
    return (band_ratio <= c.experiment.band_ratio_max && beta_ok) ? kExitOk : kExitThreshold;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for threshold-controlled jump diffusions"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    std::string out_dir;
    int threads = 0;
    app.add_option("-c,--config", config_file, "TOML configuration file");
    app.add_option("-o,--out", out_dir, "output directory (overrides config)");
    app.add_option("--threads", threads, "worker threads (0 = runtime default)");

    double opt_T = -1.0, opt_dt = -1.0;
    std::int64_t opt_paths = -1, opt_seed = -1;
    std::string opt_axis, opt_policy, opt_policies;
    app.add_option("--T", opt_T, "horizon override");
    app.add_option("--dt", opt_dt, "step override");
    app.add_option("--n-paths", opt_paths, "path count override");
    app.add_option("--seed", opt_seed, "seed override");

    CLI::App* sim = app.add_subcommand("simulate", "simulate a bundle and export it");
    CLI::App* sweep = app.add_subcommand("sweep", "terminal-moment sweeps over T, lambda or tau");
    sweep->add_option("--axis", opt_axis, "sweep axis: T | lambda | tau");
    sweep->add_option("--policies", opt_policies, "comma-separated policy names");
    CLI::App* smp = app.add_subcommand("smp-check", "optimality-condition verification report");
    CLI::App* mol = app.add_subcommand("mollify-check", "drift-smoothing convergence report");
    CLI::App* trf = app.add_subcommand("transform-check", "change-of-variable validity report");
    CLI::App* diag = app.add_subcommand("diagnostics", "density bounds and gap-moment identities");
    std::vector<std::string> beta_checks;
    diag->add_option("--beta-check", beta_checks, "extra identity checks, e.g. n=1,t=4");
    for (CLI::App* s : {sim, sweep, smp, mol, trf, diag})
        s->add_option("--policy", opt_policy, "policy name (sign | linear | threshold | zero)");

    CLI11_PARSE(app, argc, argv);

    try {
        Cli cli;
        if (!config_file.empty()) cli.cfg = load_config(config_file);
        if (opt_T > 0.0) cli.cfg.sim.horizon = opt_T;
        if (opt_dt > 0.0) cli.cfg.sim.dt = opt_dt;
        if (opt_paths > 0) cli.cfg.sim.n_paths = static_cast<std::size_t>(opt_paths);
        if (opt_seed >= 0) cli.cfg.sim.seed = static_cast<std::uint64_t>(opt_seed);
        if (!opt_axis.empty()) cli.cfg.experiment.axis = opt_axis;
        if (!opt_policy.empty()) cli.cfg.experiment.policy = opt_policy;
        if (!opt_policies.empty()) {
            cli.cfg.experiment.policies.clear();
            std::string cur;
            for (char ch : opt_policies + ",") {
                if (ch == ',') {
                    if (!cur.empty()) cli.cfg.experiment.policies.push_back(cur);
                    cur.clear();
                } else {
                    cur += ch;
                }
            }
        }
        cli.cfg.sim.validate();
        cli.cfg.model.validate();

        const char* env_threads = std::getenv("JUMPCTL_THREADS");
        if (env_threads) threads = std::atoi(env_threads);
        set_worker_count(threads);

        cli.out_dir = out_dir.empty() ? cli.cfg.output.directory : out_dir;
        fs::create_directories(cli.out_dir);
        cli.config_hash = fnv1a64(emit_config(cli.cfg));

        if (*sim) return run_simulate(cli);
        if (*sweep) return run_sweep(cli);
        if (*smp) return run_smp_check(cli);
        if (*mol) return run_mollify_check(cli);
        if (*trf) return run_transform_check(cli);
        if (*diag) return run_diagnostics(cli, beta_checks);
        return kExitError;
    } catch (const ParseError& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitError;
    } catch (const ValidationError& e) {
        std::cerr << "config validation error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
