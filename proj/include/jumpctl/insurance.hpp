#pragma once

#include <span>
#include <string>
#include <vector>

#include "jumpctl/drift.hpp"
#include "jumpctl/estimate.hpp"
#include "jumpctl/jumps.hpp"
#include "jumpctl/path.hpp"
#include "jumpctl/policy.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

// Diffusion volatility that matches the second moment of a compound Poisson
// term with intensity lambda and sizes of mean mu, sd tau.
double sigma_bar(double lambda, double mu, double tau);

// Controlled surplus: state drifts at -delta*x - a, drained or injected at
// rate beta outside the corridor [-H, H], with diffusive and jump risk.
struct SurplusModel {
    double delta = 0.05;
    double beta = 1.0;
    double threshold = 1.0;  // H
    double sigma = 0.2;
    double lambda = 2.0;
    double mu = 0.0;
    double tau = 0.5;
    double a_max = 2.0;
    double x0 = 0.0;
    // When set, jumps are folded into the diffusion via sigma_bar; otherwise
    // the compound Poisson term is simulated explicitly.
    bool diffusion_approx = true;

    void validate() const;
    double sigma_total() const;
};

DriftDecomposition build_surplus_drift(const SurplusModel& model);
JumpModel surplus_jumps(const SurplusModel& model);

// The three feedback rules compared in the experiments. Values are in the
// control variable, which enters the drift negated: "sign" steers the drift
// by -a_max*sgn(x), "linear" by -x (clipped), "threshold" is the literal
// -1{x > H_thr} rule.
std::vector<ControlPolicy> policy_library(double a_max, double H_thr = 2.0);
ControlPolicy policy_by_name(const std::string& name, double a_max, double H_thr = 2.0);

struct SweepPoint {
    double axis_value = 0.0;
    std::string policy;
    MonteCarloEstimate estimate;
};

struct SweepResult {
    std::string axis;
    std::vector<SweepPoint> points;
};

// Terminal second moment per (T, policy) under common random numbers.
SweepResult sweep_T(const SurplusModel& model, const std::vector<ControlPolicy>& policies,
                    std::span<const double> T_list, const SimConfig& cfg,
                    Exec exec = Exec::parallel);

// Terminal second moment at fixed horizon under one policy, refreshing the
// jump-matched volatility per axis value.
SweepResult sweep_lambda(const SurplusModel& model, const ControlPolicy& policy,
                         std::span<const double> lambda_list, const SimConfig& cfg,
                         Exec exec = Exec::parallel);
SweepResult sweep_tau(const SurplusModel& model, const ControlPolicy& policy,
                      std::span<const double> tau_list, const SimConfig& cfg,
                      Exec exec = Exec::parallel);

}  // namespace jumpctl
