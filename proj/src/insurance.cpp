#include "jumpctl/insurance.hpp"

#include <cmath>
#include <stdexcept>

namespace jumpctl {

double sigma_bar(double lambda, double mu, double tau) {
    if (lambda < 0.0) throw std::invalid_argument("lambda >= 0");
    if (tau < 0.0) throw std::invalid_argument("tau >= 0");
    return std::sqrt(lambda * (tau * tau + mu * mu));
}

void SurplusModel::validate() const {
    // beta = 0 degenerates to a continuous drift and is allowed.
    if (beta < 0.0) throw std::invalid_argument("beta >= 0");
    if (!(threshold > 0.0)) throw std::invalid_argument("H > 0");
    if (!(a_max > 0.0)) throw std::invalid_argument("a_max > 0");
    if (lambda < 0.0) throw std::invalid_argument("lambda >= 0");
    if (tau < 0.0) throw std::invalid_argument("tau >= 0");
    if (sigma < 0.0) throw std::invalid_argument("sigma >= 0");
}

double SurplusModel::sigma_total() const {
    if (!diffusion_approx) return sigma;
    const double sb = sigma_bar(lambda, mu, tau);
    return std::sqrt(sigma * sigma + sb * sb);
}

DriftDecomposition build_surplus_drift(const SurplusModel& model) {
    model.validate();
    DriftDecomposition d;
    d.b1.value = [](double, double a) { return -a; };
    d.b1.dx = [](double, double) { return 0.0; };
    d.b1.da = [](double, double) { return -1.0; };
    d.b1.bound = model.a_max;

    const double beta = model.beta;
    const double H = model.threshold;
    if (beta > 0.0)
        d.b2 = PiecewiseLipschitzFn({-H, H},
                                    {constant_piece(-beta), constant_piece(0.0),
                                     constant_piece(beta)},
                                    beta);

    const double delta = model.delta;
    d.b3.value = [delta](double x) { return -delta * x; };
    d.b3.dx = [delta](double) { return -delta; };
    d.b3.growth = std::abs(delta);
    return d;
}

JumpModel surplus_jumps(const SurplusModel& model) {
    if (model.diffusion_approx || model.lambda == 0.0) return no_jumps();
    // The compound Poisson term enters the state with a minus sign.
    return gaussian_jumps(model.lambda, model.mu, model.tau, -1.0);
}

std::vector<ControlPolicy> policy_library(double a_max, double H_thr) {
    if (!(a_max > 0.0)) throw std::invalid_argument("a_max > 0");
    std::vector<ControlPolicy> lib;
    lib.push_back({PolicyKind::linear_feedback, -a_max, a_max,
                   [](double, double x) { return x; }, "linear"});
    lib.push_back({PolicyKind::threshold, -a_max, a_max,
                   [H_thr](double, double x) { return x > H_thr ? -1.0 : 0.0; }, "threshold"});
    lib.push_back({PolicyKind::sign, -a_max, a_max,
                   [a_max](double, double x) { return a_max * sgn(x); }, "sign"});
    return lib;
}

ControlPolicy policy_by_name(const std::string& name, double a_max, double H_thr) {
    for (ControlPolicy& p : policy_library(a_max, H_thr))
        if (p.name == name) return p;
    if (name == "zero") return constant_policy(0.0, -a_max, a_max, "zero");
    throw std::invalid_argument("unknown policy: " + name);
}

namespace {

MonteCarloEstimate second_moment_at(const SurplusModel& model, const ControlPolicy& policy,
                                    double horizon, const SimConfig& base, Exec exec) {
    SimConfig cfg = base;
    cfg.horizon = horizon;
    cfg.dt = std::min(base.dt, horizon);
    cfg.sigma = model.sigma_total();
    const DriftDecomposition drift = build_surplus_drift(model);
    const JumpModel jumps = surplus_jumps(model);
    return evaluate_cost_streaming(drift, policy, jumps, cfg, model.x0, nullptr,
                                   [](double x) { return x * x; }, exec);
}

}  // namespace

SweepResult sweep_T(const SurplusModel& model, const std::vector<ControlPolicy>& policies,
                    std::span<const double> T_list, const SimConfig& cfg, Exec exec) {
    if (T_list.empty()) throw std::invalid_argument("T_list must be non-empty");
    SweepResult result;
    result.axis = "T";
    for (double T : T_list)
        for (const ControlPolicy& policy : policies)
            result.points.push_back({T, policy.name, second_moment_at(model, policy, T, cfg, exec)});
    return result;
}

SweepResult sweep_lambda(const SurplusModel& model, const ControlPolicy& policy,
                         std::span<const double> lambda_list, const SimConfig& cfg, Exec exec) {
    if (lambda_list.empty()) throw std::invalid_argument("lambda_list must be non-empty");
    SweepResult result;
    result.axis = "lambda";
    for (double lam : lambda_list) {
        SurplusModel m = model;
        m.lambda = lam;
        result.points.push_back(
            {lam, policy.name, second_moment_at(m, policy, cfg.horizon, cfg, exec)});
    }
    return result;
}

SweepResult sweep_tau(const SurplusModel& model, const ControlPolicy& policy,
                      std::span<const double> tau_list, const SimConfig& cfg, Exec exec) {
    if (tau_list.empty()) throw std::invalid_argument("tau_list must be non-empty");
    SweepResult result;
    result.axis = "tau";
    for (double tau : tau_list) {
        SurplusModel m = model;
        m.tau = tau;
        result.points.push_back(
            {tau, policy.name, second_moment_at(m, policy, cfg.horizon, cfg, exec)});
    }
    return result;
}

}  // namespace jumpctl
