#pragma once

#include <memory>

#include "jumpctl/drift.hpp"
#include "jumpctl/estimate.hpp"
#include "jumpctl/jumps.hpp"
#include "jumpctl/path.hpp"
#include "jumpctl/piecewise.hpp"
#include "jumpctl/policy.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

// Normalized C-infinity bump exp(-1/(1-u^2)) on (-1,1), width 1/n.
class Mollifier {
   public:
    explicit Mollifier(int n);

    int index() const { return n_; }
    double width() const { return h_; }
    double kernel(double u) const;
    double kernel_d1(double u) const;
    double kernel_d2(double u) const;

    static double normalization();

   private:
    int n_;
    double h_;
};

// Convolution of a piecewise-Lipschitz map with the bump kernel. Values and
// derivatives come from precomputed Hermite tables inside the kernel-width
// neighbourhoods of the breakpoints; outside them affine pieces evaluate
// exactly (symmetric kernel, zero first moment).
class MollifiedDrift {
   public:
    MollifiedDrift(const PiecewiseLipschitzFn& b2, int n);

    double value(double x) const;
    double derivative(double x) const;
    double antiderivative(double x) const;  // integral from 0 to x
    double sup_bound() const;
    int index() const;
    double width() const;

    DriftDecomposition::B2Override as_override() const;

   private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

MollifiedDrift mollify(const PiecewiseLipschitzFn& b2, int n);

// L2 distance between the exact-drift state and the smoothed-drift state under
// identical Brownian and jump draws: estimates the expected sup-square gap.
MonteCarloEstimate coupling_error(const DriftDecomposition& drift, int n,
                                  const ControlPolicy& policy, const JumpModel& jumps,
                                  const SimConfig& cfg, double x0, Exec exec = Exec::parallel);

// Pathwise time average of |b2_n - b2|^4 along a bundle simulated under the
// exact drift.
MonteCarloEstimate drift_error_integral(const PiecewiseLipschitzFn& b2, int n,
                                        const PathBundle& bundle);

MonteCarloEstimate drift_error_integral_streaming(const DriftDecomposition& drift, int n,
                                                  const ControlPolicy& policy,
                                                  const JumpModel& jumps, const SimConfig& cfg,
                                                  double x0, Exec exec = Exec::parallel);

namespace detail {
// Adaptive Simpson quadrature, absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double tol);
}  // namespace detail

}  // namespace jumpctl
