#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jumpctl/insurance.hpp"
#include "jumpctl/path.hpp"

namespace jumpctl {

struct ExperimentConfig {
    std::string axis = "T";  // sweep axis: T | lambda | tau
    std::vector<std::string> policies{"sign", "linear", "threshold"};
    std::string policy = "sign";
    std::vector<double> T_list{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> lambda_list{0.5, 1.0, 2.0, 4.0};
    std::vector<double> tau_list{0.25, 0.5, 1.0};
    std::vector<std::int64_t> n_levels{4, 16, 64, 256};
    std::vector<double> t_list{0.1, 0.5, 1.0, 2.0};
    std::vector<std::int64_t> beta_n{1, 2, 3};
    std::vector<double> beta_t{4.0, 1.0, 1.0};
    double band_eps = 0.05;
    std::int64_t probes = 200;
    std::int64_t inner_paths = 500;
    std::int64_t grid_a_points = 9;
    double violation_max = 0.05;
    double sign_min = 0.9;
    double band_ratio_max = 5.0;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "bin", "json", "svg"};
};

struct RunConfig {
    SurplusModel model;
    SimConfig sim;
    ExperimentConfig experiment;
    OutputConfig output;
};

// Strict TOML-subset parser: [section] headers, scalar and homogeneous-array
// values, '#' comments. Unknown keys raise ParseError naming the key; values
// violating a module invariant raise ValidationError naming it.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& file);

// Canonical emission; parse(emit(c)) reproduces c exactly.
std::string emit_config(const RunConfig& config);

}  // namespace jumpctl
