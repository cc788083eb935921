#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "srr/bounds.hpp"

#include "test_util.hpp"

using namespace srr;

TEST_CASE("closed-form constants at R_eff = 1") {
    // Norms 0.9 and probe radius 1 make R_eff exactly 1.
    ProblemInstance inst = testutil::desk_instance(1);
    const TheoreticalBounds tb = compute_bounds(inst, 1.0, 1.0);

    CHECK(tb.r_eff == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tb.h_bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tb.beta_bound == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(tb.u_bound ==
          doctest::Approx(std::sqrt(8.0) * std::exp(1.0)).epsilon(1e-12));
    CHECK(tb.f_bound == 1.0);
    CHECK(tb.c_bound == 2.0);
    CHECK(tb.b_norm_bound == 16.0);
    CHECK(tb.b_psd_bound == 20.0);
    CHECK(tb.pd_l == 1.0);
    CHECK_FALSE(tb.saturated);

    // m=8, n=24, d=6: m^1.5 sqrt(nd) e^5 = 8^1.5 * 12 * e^5.
    const double m_expect = std::pow(8.0, 1.5) * 12.0 * std::exp(5.0);
    CHECK(tb.lipschitz_m == doctest::Approx(m_expect).epsilon(1e-12));
    CHECK(tb.lipschitz_m == doctest::Approx(40298.0).epsilon(1e-4));
    const double flip_expect = 2.0 * std::pow(8.0, 1.5) * 12.0 * std::exp(4.0);
    CHECK(tb.f_lip == doctest::Approx(flip_expect).epsilon(1e-12));

    // w = 1 on a fresh instance: n_const = (16 + 1) / 1 = 17.
    CHECK(tb.w_sq_max == 1.0);
    CHECK(tb.n_const == doctest::Approx(17.0).epsilon(1e-12));

    // After choosing weights with w^2 = 21 the constant becomes 37.
    ProblemInstance synthetic = inst;
    synthetic.w = Vec::Constant(inst.m, std::sqrt(21.0));
    const TheoreticalBounds tb2 = compute_bounds(synthetic, 1.0, 1.0);
    CHECK(tb2.n_const == doctest::Approx(37.0).epsilon(1e-12));
}

TEST_CASE("constants scale with the probe radius through R_eff") {
    const ProblemInstance inst = testutil::desk_instance(2);
    const TheoreticalBounds tb = compute_bounds(inst, 1.0, 2.0);
    CHECK(tb.r_eff == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tb.h_bound == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(tb.beta_bound == doctest::Approx(std::exp(-8.0)).epsilon(1e-12));
    CHECK(tb.n_const == doctest::Approx(16.0 * 17.0).epsilon(1e-12));
}

TEST_CASE("overflowing exponentials saturate and set the flag") {
    const ProblemInstance inst = testutil::desk_instance(3);
    const TheoreticalBounds tb = compute_bounds(inst, 1.0, 10.0);
    // exp(5 * 1000) is far beyond f64: flagged, capped, finite.
    CHECK(tb.saturated);
    CHECK(tb.lipschitz_m == std::numeric_limits<double>::max());
    CHECK(std::isfinite(tb.lipschitz_m));
    CHECK(tb.beta_bound >= 0.0);
}

TEST_CASE("ball samples are inside and fill the radius") {
    std::mt19937_64 rng(4);
    double max_norm = 0.0;
    for (int i = 0; i < 500; ++i) {
        const Vec x = sample_ball(6, 0.8, rng);
        REQUIRE(x.size() == 6);
        REQUIRE(x.norm() <= 0.8 * (1.0 + 1e-12));
        max_norm = std::max(max_norm, x.norm());
    }
    CHECK(max_norm > 0.7); // d=6 pushes mass toward the boundary
    CHECK_THROWS_AS(sample_ball(0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_ball(3, 0.0, rng), std::invalid_argument);
}

TEST_CASE("verification passes on a conforming instance with chosen weights") {
    ProblemInstance inst = testutil::desk_instance(9);
    inst = choose_weights(inst, 1.0, 0.0);
    const BoundsReport report = verify_bounds(inst, 60, 17, 1.0);

    CHECK(report.all_passed);
    CHECK(report.samples == 60);
    CHECK(report.seed == 17);
    REQUIRE(report.checks.size() == 11);

    // Canonical ordering: sorted by name.
    for (size_t i = 1; i < report.checks.size(); ++i)
        CHECK(report.checks[i - 1].name < report.checks[i].name);

    bool saw_curvature = false;
    for (const BoundCheck& c : report.checks) {
        CHECK(c.passes == c.samples);
        CHECK(c.samples + c.premise_failures >= 0);
        if (c.name == "regularized_curvature_floor") {
            saw_curvature = true;
            // The weights certify the floor wherever the premise held.
            CHECK(c.samples + c.premise_failures == 60);
            if (c.samples > 0) CHECK(c.worst_margin > -1e-8);
        }
        if (c.name == "softmax_norm") {
            CHECK(c.theoretical_constant == 1.0);
            CHECK(c.samples == 60);
            CHECK(c.worst_ratio <= 1.0 + 1e-12);
        }
        if (c.name == "hessian_lipschitz" || c.name == "softmax_lipschitz") {
            // The proven constants are astronomically loose in practice.
            if (c.samples > 0) CHECK(c.worst_ratio < 0.01);
        }
    }
    CHECK(saw_curvature);
}

TEST_CASE("an out-of-hypothesis target vector is reported, not hidden") {
    ProblemInstance inst = testutil::desk_instance(10);
    inst = choose_weights(inst, 1.0, 0.0);
    inst.b *= 3.0 / inst.b.norm(); // ||b|| = 3 breaks the residual premise
    const BoundsReport report = verify_bounds(inst, 40, 3, 1.0);
    CHECK_FALSE(report.all_passed);
    bool residual_failed = false;
    for (const BoundCheck& c : report.checks)
        if (c.name == "residual_norm" && c.passes < c.samples)
            residual_failed = true;
    CHECK(residual_failed);
}

TEST_CASE("report json carries the header, checks, and verdict") {
    ProblemInstance inst = testutil::desk_instance(11);
    inst = choose_weights(inst, 1.0, 0.0);
    const BoundsReport report = verify_bounds(inst, 5, 0, 1.0);
    const std::string json = bounds_report_to_json(report);
    CHECK(json.find("\"header\"") != std::string::npos);
    CHECK(json.find("\"r_eff\"") != std::string::npos);
    CHECK(json.find("\"checks\"") != std::string::npos);
    CHECK(json.find("\"all_passed\"") != std::string::npos);
    CHECK(json.find("\"worst_margin\"") != std::string::npos);
    // Bit-exact reserialization.
    CHECK(bounds_report_to_json(report) == json);
}

TEST_CASE("verify_bounds validates the sample count") {
    const ProblemInstance inst = testutil::tiny_instance();
    CHECK_THROWS_AS(verify_bounds(inst, 0, 0, 1.0), std::invalid_argument);
}
