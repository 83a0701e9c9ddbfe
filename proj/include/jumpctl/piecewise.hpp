#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace jumpctl {

// One branch of a piecewise map. `antiderivative` must satisfy F' = value on
// the branch's interval; the pair (slope, intercept) is set when the branch is
// affine, which unlocks exact shortcuts elsewhere.
struct Piece {
    std::function<double(double)> value;
    std::function<double(double)> antiderivative;
    double lipschitz = 0.0;
    std::optional<std::pair<double, double>> affine;  // slope, intercept
};

Piece constant_piece(double v);
Piece affine_piece(double slope, double intercept);
Piece custom_piece(std::function<double(double)> value,
                   std::function<double(double)> antiderivative, double lipschitz);

// Bounded map with finitely many jump discontinuities, Lipschitz on each
// interval between consecutive breakpoints. Evaluation at a breakpoint uses
// the right limit.
class PiecewiseLipschitzFn {
   public:
    PiecewiseLipschitzFn();  // identically zero, no breakpoints
    PiecewiseLipschitzFn(std::vector<double> breakpoints, std::vector<Piece> pieces,
                         double global_bound);

    double operator()(double x) const;
    // Exact integral from 0 to x, accumulated piece by piece.
    double antiderivative(double x) const;

    double left_limit(std::size_t k) const;
    double right_limit(std::size_t k) const;

    const std::vector<double>& breakpoints() const { return xi_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    double global_bound() const { return bound_; }
    bool is_zero() const;

    std::size_t piece_index(double x) const;

   private:
    std::vector<double> xi_;
    std::vector<Piece> pieces_;
    double bound_ = 0.0;
};

}  // namespace jumpctl
