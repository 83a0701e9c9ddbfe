#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace jumpctl {

enum class Scheme { direct_euler, transformed };

struct SimConfig {
    double horizon = 1.0;  // T
    double dt = 1e-3;
    Scheme scheme = Scheme::direct_euler;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    double sigma = 0.0;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("dt > 0");
        if (!(dt <= horizon)) throw std::invalid_argument("dt <= T");
        if (n_paths < 1) throw std::invalid_argument("n_paths >= 1");
        if (sigma < 0.0) throw std::invalid_argument("sigma >= 0");
    }
};

struct JumpEvent {
    double time = 0.0;
    double size = 0.0;       // raw z
    double increment = 0.0;  // gamma(z)
    std::size_t node = 0;    // index into the grid
};

// One realized trajectory on the jump-adapted grid: the uniform dt-grid
// refined by every jump epoch. At a jump node, states_pre holds the left
// limit and states the post-jump value; elsewhere the two agree.
struct SamplePath {
    std::vector<double> times;
    std::vector<double> states_pre;
    std::vector<double> states;
    std::vector<double> brownian;               // per step, N(0, step)
    std::vector<double> controls;               // per step, evaluated at the left node
    std::vector<std::uint32_t> uniform_nodes;   // grid indices of the uniform dt-nodes
    std::vector<JumpEvent> jumps;
    double sigma = 0.0;
    Scheme scheme = Scheme::direct_euler;

    std::size_t n_nodes() const { return times.size(); }
    double terminal() const { return states.back(); }
};

struct PathBundle {
    std::vector<SamplePath> paths;
    std::uint64_t seed = 0;
    SimConfig config;

    std::size_t size() const { return paths.size(); }
    bool empty() const { return paths.empty(); }
};

}  // namespace jumpctl
