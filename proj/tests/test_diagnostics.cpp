#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "jumpctl/diagnostics.hpp"
#include "jumpctl/errors.hpp"
#include "jumpctl/simulate.hpp"
#include "test_util.hpp"

using namespace jumpctl;

TEST_CASE("beta function at one half") {
    CHECK(beta_half(1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(beta_half(2) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(beta_half(3) == doctest::Approx(16.0 / 15.0).epsilon(1e-15));
    CHECK_THROWS_AS(beta_half(0), std::invalid_argument);
}

TEST_CASE("beta recurrence against direct quadrature") {
    // B(n, 1/2) = int_0^1 (1-u)^{-1/2} u^{n-1} du = 2 int_0^1 (1-v^2)^{n-1} dv.
    for (int n = 1; n <= 10; ++n) {
        const double quad = testutil::simpson(
            [n](double v) { return 2.0 * std::pow(1.0 - v * v, n - 1); }, 0.0, 1.0, 8192);
        CHECK(std::abs(beta_half(n) - quad) < 1e-8);
    }
}

TEST_CASE("conditional gap moments match the closed form") {
    RngStream s(1, 0);
    const GapMomentCheck c1 = last_jump_gap_moment(1.0, 4.0, 1, 200000, s);
    CHECK(c1.analytic == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(c1.mc.mean - c1.analytic) < 3.0 * c1.mc.std_err);

    const GapMomentCheck c2 = last_jump_gap_moment(1.0, 1.0, 2, 200000, s);
    CHECK(c2.analytic == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(c2.mc.mean - c2.analytic) < 3.0 * c2.mc.std_err);

    const GapMomentCheck none = last_jump_gap_moment(0.0, 4.0, 3, 100, s);
    CHECK(none.n == 0);
    CHECK(none.analytic == doctest::Approx(0.5));
    CHECK(none.mc.mean == none.analytic);
}

TEST_CASE("kde recovers the normal density peak") {
    RngStream s(7, 0);
    std::vector<double> samples(100000);
    for (double& v : samples) v = s.next_normal();
    std::sort(samples.begin(), samples.end());
    const double h = silverman_bandwidth(samples);
    CHECK(h > 0.0);
    const double sup = kde_sup(samples, h, -6.0, 6.0, 2048);
    const double exact = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
    CHECK(std::abs(sup - exact) / exact < 0.1);
}

TEST_CASE("scaled density scan of pure noise is flat") {
    DriftDecomposition d;
    d.b1 = zero_control_term();
    d.b3 = zero_state_term();
    SimConfig cfg;
    cfg.horizon = 2.0;
    cfg.dt = 0.05;
    cfg.sigma = 0.2;
    cfg.n_paths = 20000;
    cfg.seed = 13;
    const std::vector<double> t_list{0.5, 2.0};
    std::vector<std::vector<double>> slices(t_list.size(),
                                            std::vector<double>(cfg.n_paths, 0.0));
    for_each_path(d, zero_policy(), no_jumps(), cfg, 0.0,
                  [&](const SamplePath& p, std::size_t i) {
                      for (std::size_t s = 0; s < t_list.size(); ++s) {
                          const std::size_t u = static_cast<std::size_t>(
                              std::llround(t_list[s] / cfg.dt));
                          slices[s][i] = p.states[p.uniform_nodes[u]];
                      }
                  });
    const DensityScan scan = density_sup_scan(slices, t_list);
    const double expect = 1.0 / (cfg.sigma * std::sqrt(2.0 * 3.14159265358979323846));
    for (std::size_t s = 0; s < t_list.size(); ++s) {
        CHECK(std::abs(scan.scaled[s] - expect) / expect < 0.1);
        CHECK(scan.bandwidth[s] > 0.0);
        CHECK(scan.sup_density[s] ==
              doctest::Approx(scan.scaled[s] / std::sqrt(scan.times[s])));
    }
    // Determinism: the same input scans to the same numbers.
    const DensityScan again = density_sup_scan(slices, t_list);
    for (std::size_t s = 0; s < t_list.size(); ++s) {
        CHECK(again.sup_density[s] == scan.sup_density[s]);
        CHECK(again.bandwidth[s] == scan.bandwidth[s]);
    }
}

TEST_CASE("kde error shrinks with more samples") {
    const double t = 0.5, sigma = 1.0;
    const double exact = 1.0 / (sigma * std::sqrt(2.0 * 3.14159265358979323846 * t));
    auto sup_err = [&](std::size_t n, std::uint64_t seed) {
        RngStream s(seed, 0);
        std::vector<double> samples(n);
        for (double& v : samples) v = sigma * std::sqrt(t) * s.next_normal();
        std::sort(samples.begin(), samples.end());
        const double h = silverman_bandwidth(samples);
        return std::abs(kde_sup(samples, h, -5.0, 5.0, 2048) - exact);
    };
    CHECK(sup_err(1000000, 3) < sup_err(100000, 3));
}

TEST_CASE("bundle overload slices the nearest uniform nodes") {
    DriftDecomposition d;
    d.b1 = zero_control_term();
    d.b3 = zero_state_term();
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.dt = 0.1;
    cfg.sigma = 1.0;
    cfg.n_paths = 5000;
    cfg.seed = 10;
    const PathBundle bundle = simulate_bundle(d, zero_policy(), no_jumps(), cfg, 0.0);
    const std::vector<double> t_list{0.5, 1.0};
    const DensityScan scan = density_sup_scan(bundle, t_list);
    CHECK(scan.times.size() == 2);
    CHECK(scan.sup_density[0] > scan.sup_density[1]);  // spreading mass
    PathBundle empty;
    CHECK_THROWS_AS(density_sup_scan(empty, t_list), EmptyBundle);
}
