#include "jumpctl/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jumpctl {

Piece constant_piece(double v) {
    Piece p;
    p.value = [v](double) { return v; };
    p.antiderivative = [v](double x) { return v * x; };
    p.lipschitz = 0.0;
    p.affine = {0.0, v};
    return p;
}

Piece affine_piece(double slope, double intercept) {
    Piece p;
    p.value = [slope, intercept](double x) { return slope * x + intercept; };
    p.antiderivative = [slope, intercept](double x) {
        return 0.5 * slope * x * x + intercept * x;
    };
    p.lipschitz = std::abs(slope);
    p.affine = {slope, intercept};
    return p;
}

Piece custom_piece(std::function<double(double)> value,
                   std::function<double(double)> antiderivative, double lipschitz) {
    Piece p;
    p.value = std::move(value);
    p.antiderivative = std::move(antiderivative);
    p.lipschitz = lipschitz;
    return p;
}

PiecewiseLipschitzFn::PiecewiseLipschitzFn() : pieces_{constant_piece(0.0)} {}

PiecewiseLipschitzFn::PiecewiseLipschitzFn(std::vector<double> breakpoints,
                                           std::vector<Piece> pieces, double global_bound)
    : xi_(std::move(breakpoints)), pieces_(std::move(pieces)), bound_(global_bound) {
    if (pieces_.size() != xi_.size() + 1)
        throw std::invalid_argument("need one more piece than breakpoints");
    for (std::size_t k = 1; k < xi_.size(); ++k)
        if (!(xi_[k - 1] < xi_[k]))
            throw std::invalid_argument("breakpoints must be strictly increasing");
    for (const Piece& p : pieces_)
        if (!p.value || !p.antiderivative)
            throw std::invalid_argument("piece missing value or antiderivative");
}

std::size_t PiecewiseLipschitzFn::piece_index(double x) const {
    // Number of breakpoints <= x; at a breakpoint this selects the right piece.
    return static_cast<std::size_t>(std::upper_bound(xi_.begin(), xi_.end(), x) - xi_.begin());
}

double PiecewiseLipschitzFn::operator()(double x) const {
    return pieces_[piece_index(x)].value(x);
}

double PiecewiseLipschitzFn::antiderivative(double x) const {
    const std::size_t j0 = piece_index(0.0);
    const std::size_t jx = piece_index(x);
    if (j0 == jx) return pieces_[j0].antiderivative(x) - pieces_[j0].antiderivative(0.0);
    double acc = 0.0;
    if (x > 0.0) {
        acc += pieces_[j0].antiderivative(xi_[j0]) - pieces_[j0].antiderivative(0.0);
        for (std::size_t j = j0 + 1; j < jx; ++j)
            acc += pieces_[j].antiderivative(xi_[j]) - pieces_[j].antiderivative(xi_[j - 1]);
        acc += pieces_[jx].antiderivative(x) - pieces_[jx].antiderivative(xi_[jx - 1]);
    } else {
        acc += pieces_[j0].antiderivative(xi_[j0 - 1]) - pieces_[j0].antiderivative(0.0);
        for (std::size_t j = j0 - 1; j > jx; --j)
            acc += pieces_[j].antiderivative(xi_[j - 1]) - pieces_[j].antiderivative(xi_[j]);
        acc += pieces_[jx].antiderivative(x) - pieces_[jx].antiderivative(xi_[jx]);
    }
    return acc;
}

double PiecewiseLipschitzFn::left_limit(std::size_t k) const { return pieces_[k].value(xi_[k]); }

double PiecewiseLipschitzFn::right_limit(std::size_t k) const {
    return pieces_[k + 1].value(xi_[k]);
}

bool PiecewiseLipschitzFn::is_zero() const {
    if (!xi_.empty()) return false;
    const auto& a = pieces_[0].affine;
    return a && a->first == 0.0 && a->second == 0.0;
}

}  // namespace jumpctl
