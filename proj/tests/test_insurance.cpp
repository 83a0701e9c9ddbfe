#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "jumpctl/insurance.hpp"
#include "test_util.hpp"

using namespace jumpctl;

namespace {

SurplusModel reference_model() {
    SurplusModel m;
    m.delta = 0.05;
    m.beta = 1.0;
    m.threshold = 1.0;
    m.sigma = 0.2;
    m.lambda = 2.0;
    m.mu = 0.0;
    m.tau = 0.5;
    m.a_max = 2.0;
    m.x0 = 0.0;
    return m;
}

}  // namespace

TEST_CASE("jump-matched volatility") {
    CHECK(sigma_bar(0.0, 0.0, 0.7) == 0.0);
    CHECK(sigma_bar(3.0, 0.0, 0.0) == 0.0);
    CHECK(sigma_bar(4.0, 0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(sigma_bar(-1.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("total variance splits additively") {
    const SurplusModel m = reference_model();
    const double st = m.sigma_total();
    const double sb = sigma_bar(m.lambda, m.mu, m.tau);
    CHECK(st * st == doctest::Approx(m.sigma * m.sigma + sb * sb).epsilon(1e-14));
}

TEST_CASE("surplus drift decomposition at the reference parameters") {
    const SurplusModel m = reference_model();
    const DriftDecomposition d = build_surplus_drift(m);
    REQUIRE(d.b2.breakpoints().size() == 2);
    CHECK(d.b2.breakpoints()[0] == -1.0);
    CHECK(d.b2.breakpoints()[1] == 1.0);
    CHECK(d.b2.left_limit(0) == -1.0);
    CHECK(d.b2.right_limit(0) == 0.0);
    CHECK(d.b2.left_limit(1) == 0.0);
    CHECK(d.b2.right_limit(1) == 1.0);
    // Inside the corridor only the control and the interest term act.
    CHECK(d.total(0.5, 0.7) == doctest::Approx(-0.05 * 0.5 - 0.7));
    // Outside, the drain term enters with the sign of the state.
    CHECK(d.total(1.5, 0.0) == doctest::Approx(-0.05 * 1.5 + 1.0));
    CHECK(d.total(-1.5, 0.0) == doctest::Approx(0.05 * 1.5 - 1.0));
}

TEST_CASE("zero drain magnitude removes the discontinuity") {
    SurplusModel m = reference_model();
    m.beta = 0.0;
    const DriftDecomposition d = build_surplus_drift(m);
    CHECK(d.b2.breakpoints().empty());
    CHECK(d.b2.is_zero());
}

TEST_CASE("explicit jump variant") {
    SurplusModel m = reference_model();
    m.diffusion_approx = false;
    const JumpModel jumps = surplus_jumps(m);
    CHECK(jumps.intensity == 2.0);
    CHECK(jumps.gamma(0.3) == -0.3);
    CHECK(jumps.gamma_moment2 == doctest::Approx(2.0 * 0.25));
    CHECK(m.sigma_total() == m.sigma);
    // The approximated variant folds the jumps into the volatility instead.
    SurplusModel approx = reference_model();
    CHECK(surplus_jumps(approx).intensity == 0.0);
}

TEST_CASE("policy library values") {
    const std::vector<ControlPolicy> lib = policy_library(2.0);
    REQUIRE(lib.size() == 3);
    const ControlPolicy sign_rule = policy_by_name("sign", 2.0);
    CHECK(sign_rule(0.0, 0.3) == 2.0);
    CHECK(sign_rule(0.0, 0.0) == 0.0);
    CHECK(sign_rule(0.0, -0.2) == -2.0);
    const ControlPolicy linear = policy_by_name("linear", 2.0);
    CHECK(linear(0.0, 0.5) == 0.5);
    CHECK(linear(0.0, 5.0) == 2.0);  // clipped
    CHECK(linear(0.0, -5.0) == -2.0);
    const ControlPolicy threshold = policy_by_name("threshold", 2.0);
    CHECK(threshold(0.0, 2.5) == -1.0);
    CHECK(threshold(0.0, 1.5) == 0.0);
    CHECK(threshold(0.0, -3.0) == 0.0);
    CHECK_THROWS_AS(policy_by_name("bogus", 2.0), std::invalid_argument);
}

TEST_CASE("sign policy keeps the terminal law symmetric") {
    const SurplusModel m = reference_model();
    SimConfig cfg;
    cfg.horizon = 2.0;
    cfg.dt = 0.01;
    cfg.sigma = m.sigma_total();
    cfg.n_paths = 20000;
    cfg.seed = 12;
    std::vector<double> terminals(cfg.n_paths);
    for_each_path(build_surplus_drift(m), policy_by_name("sign", m.a_max), no_jumps(), cfg, 0.0,
                  [&terminals](const SamplePath& p, std::size_t i) {
                      terminals[i] = p.terminal();
                  });
    const double mean = testutil::mean_of(terminals);
    const double se = testutil::sd_of(terminals) / std::sqrt(static_cast<double>(cfg.n_paths));
    CHECK(std::abs(mean) < 3.0 * se);
    const double skew = testutil::skewness_of(terminals);
    CHECK(std::abs(skew) < 3.0 * std::sqrt(6.0 / static_cast<double>(cfg.n_paths)));
}

TEST_CASE("horizon sweep") {
    const SurplusModel m = reference_model();
    SimConfig cfg;
    cfg.dt = 5e-3;
    cfg.n_paths = 20000;
    cfg.seed = 2024;

    SUBCASE("short horizons leave no room to diffuse") {
        const std::vector<double> T_list{0.05};
        const SweepResult r = sweep_T(m, policy_library(m.a_max), T_list, cfg);
        REQUIRE(r.points.size() == 3);
        for (const SweepPoint& p : r.points) CHECK(p.estimate.mean < 0.05);
    }

    SUBCASE("reference ordering at T = 2") {
        const std::vector<double> T_list{2.0};
        const SweepResult r = sweep_T(m, policy_library(m.a_max), T_list, cfg);
        REQUIRE(r.points.size() == 3);
        double j_sign = 0.0, j_linear = 0.0, j_threshold = 0.0;
        double c_sign = 0.0, c_linear = 0.0, c_threshold = 0.0;
        for (const SweepPoint& p : r.points) {
            if (p.policy == "sign") j_sign = p.estimate.mean, c_sign = p.estimate.ci95;
            if (p.policy == "linear") j_linear = p.estimate.mean, c_linear = p.estimate.ci95;
            if (p.policy == "threshold")
                j_threshold = p.estimate.mean, c_threshold = p.estimate.ci95;
        }
        CHECK(j_sign + c_sign < j_linear - c_linear);
        CHECK(j_linear + c_linear < j_threshold - c_threshold);
    }

    SUBCASE("dispersion grows with the horizon under one policy") {
        const std::vector<double> T_list{0.5, 2.0};
        const SweepResult r =
            sweep_T(m, {policy_by_name("sign", m.a_max)}, T_list, cfg);
        REQUIRE(r.points.size() == 2);
        CHECK(r.points[0].estimate.mean <=
              r.points[1].estimate.mean + r.points[0].estimate.ci95 + r.points[1].estimate.ci95);
    }
}

TEST_CASE("intensity and size sweeps grow the second moment") {
    SurplusModel m = reference_model();
    SimConfig cfg;
    cfg.horizon = 2.0;
    cfg.dt = 5e-3;
    cfg.n_paths = 20000;
    cfg.seed = 3030;
    const ControlPolicy sign_rule = policy_by_name("sign", m.a_max);

    SUBCASE("zero intensity is the diffusion-only baseline") {
        const std::vector<double> lams{0.0};
        const SweepResult r = sweep_lambda(m, sign_rule, lams, cfg);
        SurplusModel base = m;
        base.lambda = 0.0;
        CHECK(base.sigma_total() == m.sigma);
        CHECK(r.points[0].estimate.mean > 0.0);
    }

    SUBCASE("intensity sweep is monotone within confidence bands") {
        const std::vector<double> lams{0.5, 1.0, 2.0, 4.0};
        const SweepResult r = sweep_lambda(m, sign_rule, lams, cfg);
        for (std::size_t i = 1; i < r.points.size(); ++i)
            CHECK(r.points[i].estimate.mean + r.points[i].estimate.ci95 +
                      r.points[i - 1].estimate.ci95 >
                  r.points[i - 1].estimate.mean);
    }

    SUBCASE("size-dispersion sweep is monotone within confidence bands") {
        const std::vector<double> taus{0.25, 0.5, 1.0};
        const SweepResult r = sweep_tau(m, sign_rule, taus, cfg);
        for (std::size_t i = 1; i < r.points.size(); ++i)
            CHECK(r.points[i].estimate.mean + r.points[i].estimate.ci95 +
                      r.points[i - 1].estimate.ci95 >
                  r.points[i - 1].estimate.mean);
    }

    SUBCASE("empty axis lists are rejected") {
        CHECK_THROWS_AS(sweep_lambda(m, sign_rule, std::vector<double>{}, cfg),
                        std::invalid_argument);
    }
}
