#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jumpctl/drift.hpp"
#include "jumpctl/estimate.hpp"
#include "jumpctl/jumps.hpp"
#include "jumpctl/path.hpp"
#include "jumpctl/policy.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

// Integral of the discontinuous drift part from 0 to x (only differences of
// this map ever enter the flow-derivative exponent, so the base point is
// immaterial).
double antiderivative_b2(const PiecewiseLipschitzFn& b2, double x);

struct FirstVariationComponents {
    double db1 = 0.0;         // integral of d_x b1
    double db3 = 0.0;         // integral of d_x b3
    double btilde_diff = 0.0; // antiderivative difference term
    double drift_cross = 0.0; // -integral of b2 * b
    double stochastic = 0.0;  // -stochastic integral of b2
    double jump_sum = 0.0;    // -sum of antiderivative jumps
};

struct FirstVariationSample {
    double t = 0.0, s = 0.0;
    double phi = 1.0;
    FirstVariationComponents components;
};

// Pathwise derivative of the state flow in its initial condition, evaluated
// between any two grid nodes of a stored path. The exponent is assembled from
// cumulative sums, so the cocycle identity holds up to rounding. The
// discontinuous drift part enters through its antiderivative; the bracket is
// scaled by 2/sigma^2 and the stochastic integral carries the sigma factor, so
// the identity behind the representation holds for any diffusion coefficient.
class FirstVariationEvaluator {
   public:
    FirstVariationEvaluator(const SamplePath& path, const DriftDecomposition& drift);

    double phi(std::size_t i, std::size_t j) const;
    double log_phi(std::size_t i, std::size_t j) const;
    FirstVariationSample at(std::size_t i, std::size_t j) const;
    FirstVariationSample at_times(double t, double s) const;
    std::size_t node_at_or_after(double t) const;
    std::size_t n_nodes() const { return path_->n_nodes(); }

   private:
    const SamplePath* path_;
    bool has_b2_ = false;
    double two_over_sig2_ = 0.0;
    double sigma_ = 0.0;
    std::vector<double> cum_db1_, cum_db3_, cum_cross_, cum_stoch_, cum_jump_, btilde_;
};

// Common-noise finite difference of the terminal state in the initial
// condition; the independent cross-check of the explicit representation.
double first_variation_fd(const DriftDecomposition& drift, const ControlPolicy& policy,
                          const JumpModel& jumps, const SimConfig& cfg, double x0, double h,
                          std::uint64_t stream_id = 0);

// Empirical E|phi|^p with confidence interval, p in {1,2,4}.
MonteCarloEstimate moment_monitor(std::span<const double> phis, int p);

enum class ProblemSense { maximize, minimize };

struct HamiltonianCtx {
    RunningCost f;                                    // may be null
    std::function<double(double, double, double)> f_da;  // may be null
    DriftDecomposition drift;
    double jump_compensator = 0.0;  // integral of gamma against the Levy measure
    ProblemSense sense = ProblemSense::maximize;
};

double hamiltonian(const HamiltonianCtx& ctx, double t, double x, double p, double a);
double hamiltonian_da(const HamiltonianCtx& ctx, double t, double x, double p, double a);

enum class AdjointMethod { nested_mc, regression };

struct AdjointEstimate {
    double t = 0.0;
    double x = 0.0;
    double p = 0.0;
    double std_err = 0.0;
    AdjointMethod method = AdjointMethod::nested_mc;
};

using StateCostGrad = std::function<double(double, double, double)>;  // d_x f(t,x,a)
using TerminalGrad = std::function<double(double)>;                   // d_x g(x)

// Conditional-expectation adjoint at (t, x) by sub-simulation: averages
// phi_{t,T} g'(X_T) plus the running-gradient integral over cfg_inner.n_paths
// fresh paths started at (t, x). cfg_inner.horizon is the problem horizon T.
AdjointEstimate adjoint_nested_mc(double t, double x, const ControlPolicy& policy,
                                  const DriftDecomposition& drift, const JumpModel& jumps,
                                  const SimConfig& cfg_inner, const StateCostGrad& f_dx,
                                  const TerminalGrad& g_dx, Exec exec = Exec::parallel);

// Per-slice regression samples: state and pathwise adjoint integrand.
struct AdjointSamples {
    std::vector<double> times;
    std::vector<std::vector<double>> state;      // [slice][path]
    std::vector<std::vector<double>> integrand;  // [slice][path]
};

AdjointSamples extract_adjoint_samples(const PathBundle& bundle, const DriftDecomposition& drift,
                                       const StateCostGrad& f_dx, const TerminalGrad& g_dx,
                                       std::size_t slice_stride = 1);

AdjointSamples gather_adjoint_samples(const DriftDecomposition& drift,
                                      const ControlPolicy& policy, const JumpModel& jumps,
                                      const SimConfig& cfg, double x0, const StateCostGrad& f_dx,
                                      const TerminalGrad& g_dx, std::size_t slice_stride = 1,
                                      Exec exec = Exec::parallel);

// Least-squares projection of the adjoint integrand onto polynomials of the
// state, fitted per time slice. Degenerate slices fall back to lower degree;
// RankDeficient is raised only when no finite fit exists.
class AdjointRegression {
   public:
    double eval(double t, double x) const;
    double std_err(double t, double x) const;
    double r2_at(double t) const;
    const std::vector<double>& slice_times() const { return times_; }

    struct Slice {
        double time = 0.0;
        int degree = 0;
        double mean = 0.0, scale = 1.0;
        std::vector<double> coeff;
        std::vector<double> xtx_inv;  // (degree+1)^2, row major
        double s2 = 0.0;
        double r2 = 1.0;
        std::size_t n = 0;
    };

    explicit AdjointRegression(std::vector<Slice> slices);

   private:
    const Slice& nearest(double t) const;
    std::vector<double> times_;
    std::vector<Slice> slices_;
};

AdjointRegression fit_adjoint_regression(const AdjointSamples& samples, int basis_degree);

AdjointRegression adjoint_regression(const PathBundle& bundle, const DriftDecomposition& drift,
                                     const StateCostGrad& f_dx, const TerminalGrad& g_dx,
                                     int basis_degree, std::size_t slice_stride = 1);

struct AdjointProbe {
    double t = 0.0;
    double x = 0.0;
    double control = 0.0;
    double p = 0.0;
    double p_std_err = 0.0;
};

struct NecessaryConditionReport {
    double min_product = 0.0;
    double violation_fraction = 0.0;
    std::size_t n_products = 0;
    std::size_t n_violations = 0;
    std::size_t n_probes_used = 0;
    std::size_t n_probes_skipped = 0;
};

// Directional-derivative products of the Hamiltonian at the evaluated control,
// oriented so that nonnegative values are consistent with optimality. Probes
// with |x| < band_eps are skipped; a product counts as a violation when it
// falls below -z_tol standard errors of its own Monte Carlo noise.
NecessaryConditionReport necessary_condition_scan(std::span<const AdjointProbe> probes,
                                                  const HamiltonianCtx& ctx,
                                                  std::span<const double> grid_a,
                                                  double band_eps = 0.0, double z_tol = 3.0);

// Frequency of sgn(p) == -sgn(x) among probes with |x| >= band_eps whose
// adjoint estimate resolves its sign (|p| >= min_abs_z standard errors).
double sign_relation_frequency(std::span<const AdjointProbe> probes, double band_eps,
                               double min_abs_z = 0.0);

// One probe per outer path at a stratified interior grid time, each with a
// nested adjoint estimate from cfg_inner.n_paths sub-simulations.
std::vector<AdjointProbe> gather_adjoint_probes(const DriftDecomposition& drift,
                                                const ControlPolicy& policy,
                                                const JumpModel& jumps, const SimConfig& outer,
                                                double x0, std::size_t n_probes,
                                                const SimConfig& cfg_inner,
                                                const StateCostGrad& f_dx,
                                                const TerminalGrad& g_dx);

}  // namespace jumpctl
