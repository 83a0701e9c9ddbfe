#pragma once

#include <functional>
#include <vector>

#include "jumpctl/drift.hpp"
#include "jumpctl/jumps.hpp"
#include "jumpctl/path.hpp"
#include "jumpctl/policy.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

// C2 bump (1+u)^3 (1-u)^3 on [-1,1], zero outside.
double phi_bump(double u);

struct BreakCoefficient {
    double xi = 0.0;
    double alpha = 0.0;  // half the drift jump, (b(xi-) - b(xi+)) / 2
};

// Coefficients at every listed breakpoint of the drift's discontinuous part;
// throws ZeroJump if any breakpoint is removable (one-sided limits agree).
std::vector<BreakCoefficient> discontinuity_coefficients(const DriftDecomposition& drift);

// Same, but removable breakpoints are dropped quietly.
std::vector<BreakCoefficient> active_discontinuities(const DriftDecomposition& drift);

// Bump radius: 0.9 of the admissible bound, halved until the derivative of the
// change of variable is verified positive on a fine grid. Throws NoValidC
// after 20 halvings.
double select_c(const std::vector<BreakCoefficient>& coeffs);

// Monotone C1 change of variable with one localized quadratic bump per drift
// breakpoint; the transformed drift becomes globally Lipschitz.
class TransformG {
   public:
    TransformG() = default;  // identity
    TransformG(std::vector<BreakCoefficient> coeffs, double c);

    static TransformG identity() { return TransformG(); }
    static TransformG build(const DriftDecomposition& drift);
    // The change of variable whose Ito correction (sigma^2/2) G'' cancels the
    // drift jumps exactly: bump coefficients are scaled by 1/sigma^2. With
    // sigma = 0 (or 1) this is the plain build.
    static TransformG build_for_noise(const DriftDecomposition& drift, double sigma);

    double operator()(double x) const;
    double prime(double x) const;
    // One-sided value at the breakpoints and bump boundaries.
    double second(double x) const;
    double inverse(double y) const;
    double inverse(double y, double hint) const;

    bool is_identity() const { return coeffs_.empty(); }
    double bump_radius() const { return c_; }
    double g_lower() const { return g_lower_; }
    double g_upper() const { return g_upper_; }
    const std::vector<BreakCoefficient>& coefficients() const { return coeffs_; }

   private:
    std::vector<BreakCoefficient> coeffs_;
    double c_ = 0.0;
    double g_lower_ = 1.0;
    double g_upper_ = 1.0;
    double inverse_halfwidth_ = 1.0;
};

struct TransformedCoefficients {
    std::function<double(double, double)> drift;      // (y, a)
    std::function<double(double)> drift_state_only;   // (y) with a = 0
    std::function<double(double)> diffusion;          // (y)
    std::function<double(double, double)> jump;       // (y, z)
};

TransformedCoefficients transformed_coefficients(const TransformG& g,
                                                 const DriftDecomposition& drift, double sigma,
                                                 const JumpModel& jumps);

// Simulates the transformed state with Lipschitz coefficients, then maps back;
// stream draw order matches the direct scheme so coupled runs share noise.
SamplePath simulate_transformed(const DriftDecomposition& drift, const ControlPolicy& policy,
                                const JumpModel& jumps, const SimConfig& cfg, double x0,
                                RngStream& stream);

}  // namespace jumpctl
