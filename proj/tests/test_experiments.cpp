#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "cubiclab/experiments.hpp"

using namespace cubiclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("power-law fit recovers exact exponents", "[fit]") {
    const std::vector<double> x{0.2, 0.3, 0.45, 0.65, 0.8};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 4.0));
    const ScalingFit f = fit_power_law(x, y);
    CHECK_THAT(f.slope, WithinAbs(4.0, 1e-12));
    CHECK_THAT(f.intercept, WithinAbs(std::log(3.0), 1e-12));
    CHECK(f.half_width < 1e-10);

    // relabeling x -> 2x changes only the intercept
    std::vector<double> x2;
    for (double v : x) x2.push_back(2.0 * v);
    CHECK_THAT(fit_power_law(x2, y).slope, WithinAbs(f.slope, 1e-12));
}

TEST_CASE("power-law fit confidence and input checks", "[fit]") {
    const std::vector<double> x{1, 2, 4, 8, 16, 32};
    const std::vector<double> y{1.0, 2.2, 3.9, 8.5, 15.0, 33.0};
    const ScalingFit f = fit_power_law(x, y);
    CHECK(f.half_width > 0.0);
    CHECK(std::abs(f.slope - 1.0) < f.half_width + 0.05);
    CHECK(fit_power_law(x, y, 0.99).half_width > f.half_width);
    CHECK_THROWS_AS(fit_power_law({1, 2, 3}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1, 2, 3, 4}, {1, -2, 3, 4}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({2, 2, 2, 2}, {1, 2, 3, 4}), std::invalid_argument);
}

TEST_CASE("data families", "[experiments]") {
    const Grid g(256, 40.0);
    for (DataFamily f : {DataFamily::random_bands, DataFamily::gaussian, DataFamily::plane_wave}) {
        DataSpec d;
        d.family = f;
        d.window = 4.0;
        CHECK_THAT(l2_norm(make_shape(g, d)), WithinRel(1.0, 1e-12));
        CHECK(parse_data_family(to_string(f)) == f);
    }
    DataSpec s;
    s.family = DataFamily::soliton;
    s.lambda = 0.5;
    CHECK_THAT(l2_norm_squared(make_shape(g, s)), WithinRel(1.0, 1e-8));
    CHECK_THROWS_AS(parse_data_family("noise"), std::invalid_argument);

    // mode-keyed draws: the coarse field is the trigonometric restriction of the fine one
    const Field coarse = random_band_field(Grid(64, 10.0), 6, 4);
    const Field fine = random_band_field(Grid(128, 10.0), 6, 4);
    for (int i = 0; i < 64; ++i) REQUIRE_THAT(std::abs(coarse[i] - fine[2 * i]), WithinAbs(0.0, 1e-12));
    CHECK_THROWS_AS(random_band_field(Grid(16, 10.0), 8, 1), std::invalid_argument);
}

TEST_CASE("drift scaling refuses conserved and non-conservative symbols", "[experiments]") {
    DriftConfig c;
    c.symbol = "nls-focusing";
    CHECK(drift_scaling(c).refusal == "mass exactly conserved");
    c.symbol = "sech-diff";
    c.n_points = 16;
    CHECK(drift_scaling(c).refusal == "mass exactly conserved");
    c.symbol = "gain";
    CHECK_THROWS_AS(drift_scaling(c), std::invalid_argument);
}

TEST_CASE("drift scaling of a separable symbol", "[experiments]") {
    DriftConfig c;
    c.eps = {0.2, 0.3, 0.45, 0.65};
    const DriftResult r = drift_scaling(c);
    REQUIRE(r.raw_fit);
    REQUIRE(r.corrected_fit);
    CHECK(std::abs(r.raw_fit->slope - 4.0) <= 0.7);
    CHECK(r.corrected_fit->slope >= r.raw_fit->slope + 1.5);
    for (const auto& row : r.rows) {
        CHECK(row.status == "ok");
        CHECK(row.corrected < row.raw);
    }
}

TEST_CASE("mass source identity converges under step refinement", "[experiments]") {
    SourceCheckConfig c;
    c.seeds = {5};
    c.h = {2e-3, 1e-3, 5e-4};
    const auto rows = mass_source_check(c);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].rel_error < rows[0].rel_error / 3.0);
    CHECK(rows[2].rel_error < rows[1].rel_error / 3.0);
    CHECK(rows[2].rel_error < 1e-3);
}

TEST_CASE("lifespan sweep", "[experiments]") {
    LifespanConfig c;
    c.cap = 0.0;
    CHECK(lifespan_sweep(c).empty());

    c.cap = 60.0;
    c.eps = {0.8, 0.6, 0.45};
    const auto gain = lifespan_sweep(c);
    REQUIRE(gain.size() == 3);
    for (std::size_t i = 1; i < gain.size(); ++i) CHECK(gain[i].exit_time >= gain[i - 1].exit_time);
    CHECK(gain.front().status == "mass growth");
    CHECK_THAT(gain[2].reference_8, WithinRel(std::pow(0.45, -8.0), 1e-14));

    c.symbol = "nls-defocusing";
    c.eps = {0.5};
    c.cap = 50.0;
    const auto control = lifespan_sweep(c);
    CHECK(control.front().status == "censored");
    CHECK_THAT(control.front().exit_time, WithinRel(50.0, 1e-12));

    // localized data reaching the edge invalidates the run
    LifespanConfig w;
    w.symbol = "nls-defocusing";
    w.length = 20.0;
    w.n_points = 128;
    w.data = DataSpec{DataFamily::gaussian, 1, 0, 0.0, 0.0, 1.0, 4.0, 1.0};
    w.eps = {0.3};
    w.cap = 5.0;
    w.edge_width = 2.0;
    CHECK(lifespan_sweep(w).front().status == "invalid: wrap-around");
}

TEST_CASE("soliton suite quantities", "[experiments]") {
    boost::math::quadrature::tanh_sinh<double> q;
    // (d/dx sech^2)^2 = 4 sech^4 tanh^2
    const double grad = q.integrate([](double x) {
        const double s = 1.0 / std::cosh(x);
        return 4.0 * std::pow(s, 4) * std::tanh(x) * std::tanh(x);
    }, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    CHECK_THAT(grad, WithinRel(16.0 / 15.0, 1e-10));

    SolitonConfig c;
    c.lambda = {1.0};
    c.t_end = 1.0;
    c.n_points = 1024;
    c.dt = 2e-3;
    c.sample_every = 0.1;
    const auto rows = soliton_suite(c);
    REQUIRE(rows.size() == 1);
    const SolitonRow& r = rows.front();
    CHECK_THAT(r.mass, WithinRel(2.0, 1e-8));
    CHECK_THAT(r.l6_6, WithinRel(16.0 / 15.0, 1e-2));
    CHECK_THAT(r.gradient_sq, WithinRel(grad, 1e-2));
    CHECK(r.shape_error < 1e-6);
    CHECK(r.phase_error < 1e-5);
    CHECK_THAT(r.window, WithinRel(1.0, 1e-14));
    CHECK_THAT(r.ratio_strichartz, WithinRel(std::pow(16.0 / 15.0, 1.0 / 6.0), 1e-3));

    c.n_points = 64;
    CHECK_THROWS_AS(soliton_suite(c), std::invalid_argument);
}

TEST_CASE("theorem audit: linear flow keeps the L2 ratio at one", "[experiments]") {
    const Grid g(256, 60.0);
    DataSpec d;
    d.window = 3.0;
    d.kmax = 20;
    const Field u0 = cd(0.4) * make_shape(g, d);
    FieldSeries s;
    for (int i = 0; i <= 20; ++i) s.push(0.1 * i, free_evolution(u0, 0.1 * i));
    const auto rows = theorem_audit(s, windows_from(0.0, {1.0, 2.0}), AuditNormalization::size, 0.4);
    for (const auto& r : rows) {
        CHECK_THAT(r.l2, WithinRel(1.0, 1e-12));
        CHECK(std::isfinite(r.strichartz));
        CHECK(r.bilinear > 0.0);
    }
}

TEST_CASE("window study is invariant under the scaling of the data", "[experiments]") {
    WindowStudyConfig c;
    c.n_points = 256;
    c.multipliers = {1.0, 2.0};
    c.dt = 4e-3;
    c.sample_every = 0.04;
    c.norm = 1.0;
    const WindowStudy a = window_study(c);
    c.norm = 0.5;
    const WindowStudy b = window_study(c);
    REQUIRE(a.rows.size() == 2);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK_THAT(b.rows[i].strichartz, WithinRel(a.rows[i].strichartz, 1e-8));
        CHECK_THAT(b.rows[i].bilinear, WithinRel(a.rows[i].bilinear, 1e-8));
        CHECK_THAT(b.rows[i].window.length(), WithinRel(16.0 * a.rows[i].window.length(), 1e-12));
    }
    CHECK(a.mass_drift < 1e-10);
}

TEST_CASE("bilinear distance sweep follows the square root", "[experiments]") {
    DistanceConfig c;
    c.n_points = 1024;
    c.samples = 101;
    const DistanceSweep r = bilinear_distance_sweep(c);
    REQUIRE(r.fit);
    CHECK_THAT(r.fit->slope, WithinAbs(0.5, 0.05));
    c.distances = {3};
    CHECK_THROWS_AS(bilinear_distance_sweep(c), std::invalid_argument);
}

TEST_CASE("interaction balance: free flow order and nonlinear sweep", "[experiments]") {
    MorawetzConfig c;
    c.n_points = 256;
    const MorawetzSweep free = morawetz_free_order(c, 0.5, {0.08, 0.04, 0.02, 0.01});
    REQUIRE(free.fit);
    CHECK_THAT(free.fit->slope, WithinAbs(2.0, 0.2));

    c.eps = {0.3, 0.45, 0.65, 0.8};
    c.t_end = 0.5;
    const MorawetzSweep nl = morawetz_sweep(c);
    REQUIRE(nl.fit);
    CHECK(nl.fit->slope >= 5.3);
    for (const auto& r : nl.rows) CHECK_FALSE(r.report.cadence_too_coarse);
}

TEST_CASE("interpolation study on a soliton", "[experiments]") {
    InterpolationStudyConfig c;
    c.data.family = DataFamily::soliton;
    c.t_end = 0.5;
    c.bands = {Band::whole(), Band::single(0)};
    const auto r = interpolation_study(c);
    CHECK(r.skipped == 0);
    CHECK(r.sup > 0.0);
    CHECK(std::isfinite(r.sup));
}
