#include "jumpctl/jumps.hpp"

#include <cmath>
#include <stdexcept>

namespace jumpctl {

JumpModel no_jumps() {
    JumpModel j;
    j.intensity = 0.0;
    j.sample_size = [](RngStream&) { return 0.0; };
    j.gamma = [](double) { return 0.0; };
    return j;
}

JumpModel gaussian_jumps(double lambda, double mu, double tau, double gamma_sign) {
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw std::invalid_argument("jump intensity must be finite and nonnegative");
    if (tau < 0.0) throw std::invalid_argument("jump size sd must be nonnegative");
    JumpModel j;
    j.intensity = lambda;
    j.size_mean = mu;
    j.size_sd = tau;
    j.sample_size = [mu, tau](RngStream& s) { return mu + tau * s.next_normal(); };
    j.gamma = [gamma_sign](double z) { return gamma_sign * z; };
    j.gamma_mean_rate = lambda * gamma_sign * mu;
    // E|Z| for Z ~ N(mu, tau^2) (folded normal mean).
    double abs_mean;
    if (tau == 0.0) {
        abs_mean = std::abs(mu);
    } else {
        const double r = mu / tau;
        abs_mean = tau * std::sqrt(2.0 / 3.14159265358979323846) * std::exp(-0.5 * r * r) +
                   mu * std::erf(r / std::sqrt(2.0));
    }
    j.gamma_abs_moment1 = lambda * abs_mean;
    j.gamma_moment2 = lambda * (tau * tau + mu * mu);
    return j;
}

JumpModel deterministic_jumps(double lambda, double size) {
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw std::invalid_argument("jump intensity must be finite and nonnegative");
    JumpModel j;
    j.intensity = lambda;
    j.size_mean = size;
    j.size_sd = 0.0;
    j.sample_size = [size](RngStream&) { return size; };
    j.gamma = [](double z) { return z; };
    j.gamma_mean_rate = lambda * size;
    j.gamma_abs_moment1 = lambda * std::abs(size);
    j.gamma_moment2 = lambda * size * size;
    return j;
}

JumpRecord sample_jumps(const JumpModel& jumps, double horizon, RngStream& stream) {
    JumpRecord rec;
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (jumps.intensity <= 0.0) return rec;
    double t = stream.next_exponential(jumps.intensity);
    while (t < horizon) {
        rec.epochs.push_back(t);
        rec.sizes.push_back(jumps.sample_size(stream));
        t += stream.next_exponential(jumps.intensity);
    }
    return rec;
}

}  // namespace jumpctl
