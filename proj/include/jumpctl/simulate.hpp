#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "jumpctl/drift.hpp"
#include "jumpctl/estimate.hpp"
#include "jumpctl/jumps.hpp"
#include "jumpctl/path.hpp"
#include "jumpctl/policy.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

using RunningCost = std::function<double(double, double, double)>;  // (t, x, a)
using TerminalCost = std::function<double(double)>;

enum class Exec { serial, parallel };

// 0 restores the runtime default.
void set_worker_count(int n);

// Explicit Euler on the jump-adapted grid: drift and control use the left
// (post-jump) state, the state jumps by gamma(z) at each epoch. Draw order is
// jumps first, then one normal per step, so coupled runs that share a stream
// share their noise.
SamplePath simulate_path(const DriftDecomposition& drift, const ControlPolicy& policy,
                         const JumpModel& jumps, const SimConfig& cfg, double x0,
                         RngStream& stream);

// Path i uses the substream (cfg.seed, i); results are identical for any
// worker count.
PathBundle simulate_bundle(const DriftDecomposition& drift, const ControlPolicy& policy,
                           const JumpModel& jumps, const SimConfig& cfg, double x0,
                           Exec exec = Exec::parallel);

// Streaming variant: consume(path, i) is called once per path, concurrently
// for distinct i under parallel execution.
void for_each_path(const DriftDecomposition& drift, const ControlPolicy& policy,
                   const JumpModel& jumps, const SimConfig& cfg, double x0,
                   const std::function<void(const SamplePath&, std::size_t)>& consume,
                   Exec exec = Exec::parallel);

// Left-Riemann sum of f over the grid plus g at the terminal state.
double path_cost(const SamplePath& path, const RunningCost& f, const TerminalCost& g);

MonteCarloEstimate evaluate_cost(const PathBundle& bundle, const RunningCost& f,
                                 const TerminalCost& g);

MonteCarloEstimate evaluate_cost_streaming(const DriftDecomposition& drift,
                                           const ControlPolicy& policy, const JumpModel& jumps,
                                           const SimConfig& cfg, double x0, const RunningCost& f,
                                           const TerminalCost& g, Exec exec = Exec::parallel);

// One row per grid node: path_id, t, x, a, dB, jump_z (step quantities are
// attributed to the step starting at the node).
void export_csv(const PathBundle& bundle, const std::string& file);

// Little-endian 64-bit floats with a small header carrying the config hash.
void export_binary(const PathBundle& bundle, const std::string& file, std::uint64_t config_hash);
PathBundle import_binary(const std::string& file, std::uint64_t* config_hash = nullptr);

namespace detail {

struct AdaptedGrid {
    std::vector<double> times;
    std::vector<std::uint32_t> uniform_nodes;
    // (node index, jump record index), sorted by node
    std::vector<std::pair<std::size_t, std::size_t>> jump_nodes;
};

AdaptedGrid build_grid(double horizon, double dt, const JumpRecord& rec);

void check_finite(double x, double t);

}  // namespace detail

}  // namespace jumpctl
