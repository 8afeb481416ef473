#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cubiclab/expression.hpp"
#include "cubiclab/symbols.hpp"

using namespace cubiclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("expression arithmetic", "[expression]") {
    auto eval = [](const std::string& s) { return Expression::parse(s, {})(std::vector<cd>{}); };
    CHECK(eval("1+2*3") == cd(7.0, 0.0));
    CHECK(eval("2^3") == cd(8.0, 0.0));
    CHECK(eval("(-2)^2") == cd(4.0, 0.0));
    CHECK(eval("-2^2") == cd(-4.0, 0.0));
    CHECK(eval("i*i") == cd(-1.0, 0.0));
    CHECK(eval("-1+0.3*i") == cd(-1.0, 0.3));
    CHECK_THAT(eval("sech(0)").real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(eval("cos(pi)").real(), WithinAbs(-1.0, 1e-15));
    CHECK(eval("abs(3-4*i)") == cd(5.0, 0.0));
    CHECK(eval("conj(1+i)") == cd(1.0, -1.0));
    CHECK(eval("1e-3*1000") == cd(1.0, 0.0));

    const Expression e = Expression::parse("x1 - 2*x2 + x3^2", {"x1", "x2", "x3"});
    CHECK(e(1.0, 2.0, 3.0) == cd(6.0, 0.0));
}

TEST_CASE("expression errors", "[expression]") {
    CHECK_THROWS_AS(Expression::parse("1+", {}), ExpressionError);
    CHECK_THROWS_AS(Expression::parse("foo(1)", {}), ExpressionError);
    CHECK_THROWS_AS(Expression::parse("(1", {}), ExpressionError);
    CHECK_THROWS_AS(Expression::parse("1 2", {}), ExpressionError);
    CHECK_THROWS_AS(Expression::parse("y", {"x"}), ExpressionError);
    const Expression e = Expression::parse("x", {"x"});
    CHECK_THROWS_AS(e(std::vector<cd>{}), ExpressionError);
}

TEST_CASE("resonance data examples", "[symbols]") {
    const ResonanceData z = resonance_data({0, 0, 0, 0});
    CHECK(z.d4 == 0.0);
    CHECK(z.d4sq == 0.0);
    CHECK(z.hi == 0.0);
    CHECK(z.med == 0.0);

    const ResonanceData r = resonance_data({1, 2, 3, 4});
    CHECK(r.d4 == -2.0);
    CHECK(r.d4sq == -10.0);
    CHECK_THAT(r.d4sq_tilde, WithinAbs(0.0, 1e-15));
    CHECK(r.hi == 4.0);
    CHECK(r.med == 2.0);

    const FreqQuadruple q{3, 0, 0, 3};
    const ResonanceData s = resonance_data(q);
    CHECK(s.d4 == 0.0);
    CHECK(s.d4sq == 0.0);
    CHECK(s.hi == 6.0);
    CHECK(s.med == 0.0);
    CHECK(is_resonant(q));
    CHECK_FALSE(is_resonant({1, 2, 3, 4}));
}

TEST_CASE("resonance data symmetries", "[symbols]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int n = 0; n < 500; ++n) {
        const FreqQuadruple q{u(rng), u(rng), u(rng), u(rng)};
        const ResonanceData r = resonance_data(q);
        CHECK(r.hi >= r.med);
        CHECK(r.med >= 0.0);

        const ResonanceData s13 = resonance_data({q.xi3, q.xi2, q.xi1, q.xi4});
        const ResonanceData s24 = resonance_data({q.xi1, q.xi4, q.xi3, q.xi2});
        for (const auto& s : {s13, s24}) {
            CHECK_THAT(s.d4, WithinAbs(r.d4, 1e-12));
            CHECK_THAT(s.d4sq, WithinAbs(r.d4sq, 1e-11));
            CHECK_THAT(s.hi, WithinAbs(r.hi, 1e-12));
            CHECK_THAT(s.med, WithinAbs(r.med, 1e-12));
        }

        const double h = u(rng);
        const ResonanceData g = resonance_data({q.xi1 + h, q.xi2 + h, q.xi3 + h, q.xi4 + h});
        CHECK_THAT(g.hi, WithinAbs(r.hi, 1e-11));
        CHECK_THAT(g.med, WithinAbs(r.med, 1e-11));
        CHECK_THAT(g.d4sq_tilde, WithinAbs(r.d4sq_tilde, 1e-9));

        // on the slice d4 = 0 the tilde quantity coincides with d4sq
        const double x4 = q.xi1 - q.xi2 + q.xi3;
        const ResonanceData sl = resonance_data({q.xi1, q.xi2, q.xi3, x4});
        CHECK_THAT(sl.d4sq_tilde, WithinAbs(sl.d4sq, 1e-10));
        CHECK_THAT(sl.d4sq, WithinAbs(2.0 * (q.xi1 - q.xi2) * (q.xi2 - q.xi3), 1e-9));
    }
}

TEST_CASE("region weights", "[symbols]") {
    const RegionWeights z = region_weights({0, 0, 0, 0});
    CHECK(z.chi1 == 1.0);
    CHECK(z.chi2 == 0.0);
    CHECK(z.chi3 == 0.0);

    // d4 = -40, med = 40: too far from the slice for the elliptic region
    const RegionWeights a = region_weights({0, 20, 40, 60});
    CHECK(a.chi2 == 0.0);
    CHECK_THAT(a.chi1 + a.chi3, WithinAbs(1.0, 1e-15));
    CHECK(a.chi3 == 1.0);

    const RegionWeights b = region_weights({0, 20, 40, 20});
    CHECK(b.chi2 == 1.0);
    CHECK(b.chi1 == 0.0);
    CHECK(b.chi3 == 0.0);
}

TEST_CASE("region weights partition and Lipschitz bound", "[symbols]") {
    const RegionThresholds t;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    std::uniform_real_distribution<double> du(-1e-3, 1e-3);
    double lip = 0.0;
    for (int n = 0; n < 20000; ++n) {
        const FreqQuadruple q{u(rng), u(rng), u(rng), u(rng)};
        const RegionWeights w = region_weights(q, t);
        REQUIRE_THAT(w.chi1 + w.chi2 + w.chi3, WithinAbs(1.0, 1e-15));
        REQUIRE(w.chi1 >= 0.0);
        REQUIRE(w.chi2 >= 0.0);
        REQUIRE(w.chi3 >= 0.0);
        const ResonanceData r = resonance_data(q);
        if (w.chi2 > 0.0) REQUIRE(r.med > t.ratio * (1.0 + std::abs(r.d4)));
        if (w.chi3 > 0.0) REQUIRE(r.med > t.inner);

        const FreqQuadruple p{q.xi1 + du(rng), q.xi2 + du(rng), q.xi3 + du(rng), q.xi4 + du(rng)};
        const double dist = std::abs(p.xi1 - q.xi1) + std::abs(p.xi2 - q.xi2) +
                            std::abs(p.xi3 - q.xi3) + std::abs(p.xi4 - q.xi4);
        const RegionWeights v = region_weights(p, t);
        lip = std::max({lip, std::abs(v.chi1 - w.chi1) / dist, std::abs(v.chi2 - w.chi2) / dist,
                        std::abs(v.chi3 - w.chi3) / dist});
    }
    // sin^2 ramps have slope pi/2 per ramp width; the elliptic argument moves at
    // rate 1 + ratio in the l1 metric, so chi2 = far * elliptic is 2 pi / ramp Lipschitz.
    CHECK(lip <= 2.0 * kPi / t.ramp);
    CHECK(lip > 0.0);
}

TEST_CASE("symbol library", "[symbols]") {
    const TrilinearSymbol f = parse_symbol("nls-focusing");
    CHECK(f.is_constant());
    CHECK(f(1, 2, 3) == cd(-2.0, 0.0));

    const TrilinearSymbol g = parse_symbol("const:-1+0.3*i");
    CHECK(g.constant_part() == cd(-1.0, 0.3));

    const TrilinearSymbol s = parse_symbol("sep-sech");
    CHECK(s.structure() == SymbolStructure::separable);
    CHECK(s.terms().size() == 1);
    const double x1 = 1.3, x2 = -0.4, x3 = 2.2;
    const double expected = -1.0 - 0.5 / std::cosh(x1 / 4) / std::cosh(x3 / 4);
    CHECK_THAT(s(x1, x2, x3).real(), WithinRel(expected, 1e-14));

    const TrilinearSymbol b = parse_symbol("sech-diff");
    CHECK(b.structure() == SymbolStructure::black_box);
    CHECK_THAT(b(x1, x2, x3).real(),
               WithinRel(-1.0 - 0.5 / std::cosh(x1 - x2) / std::cosh(x3 - x2), 1e-14));

    CHECK_THROWS_AS(parse_symbol("bogus"), ExpressionError);
    CHECK_THROWS_AS(parse_symbol("separable:1;2|x"), ExpressionError);
}

TEST_CASE("hypothesis checks", "[symbols]") {
    const HypothesisRecord f = check_hypotheses(TrilinearSymbol::constant(-2.0));
    CHECK(f.h2_violation == 0.0);
    CHECK(f.sign == SignClass::focusing);
    CHECK(f.sup_abs == 2.0);
    CHECK(f.sup_first_diff == 0.0);

    CHECK(check_hypotheses(TrilinearSymbol::constant(1.0)).sign == SignClass::defocusing);

    const HypothesisRecord s = check_hypotheses(parse_symbol("sech-diff"));
    CHECK(s.h2_violation == 0.0);
    CHECK(s.sign == SignClass::focusing);
    CHECK(s.symmetry_defect < 1e-15);
    CHECK(s.sup_abs <= 1.5 + 1e-12);

    const HypothesisRecord g = check_hypotheses(parse_symbol("gain"));
    CHECK_THAT(g.h2_violation, WithinAbs(0.3, 1e-15));

    const HypothesisRecord ind = check_hypotheses(parse_symbol("expr:x1"));
    CHECK(ind.sign == SignClass::indefinite);
}

TEST_CASE("mass source symbol vanishes for real constants", "[symbols]") {
    const Lattice lat = Lattice::unit_bands(-6, 6);
    const QuarticSymbol c4 = mass_source_symbol(TrilinearSymbol::constant(-2.0), Band::whole(), lat);
    CHECK(c4.sup_abs() == 0.0);
    const QuarticCorrection corr = build_correction(c4, Band::whole());
    CHECK(corr.b4.sup_abs() == 0.0);
    CHECK(corr.size_constant == 0.0);
}

TEST_CASE("mass source symbol on the resonant set", "[symbols]") {
    const Lattice lat = Lattice::unit_bands(-5, 5);
    for (const Band& band : {Band::whole(), Band::interval(0, 2)}) {
        const QuarticSymbol c4 = mass_source_symbol(parse_symbol("sech-diff"), band, lat);
        double on_r = 0.0;
        double off_r = 0.0;
        c4.for_each_slice_point([&](int a, int b, int c, int d) {
            const double v = std::abs(c4.at(a, b, c));
            if (is_resonant(c4.quadruple(a, b, c, d))) on_r = std::max(on_r, v);
            else off_r = std::max(off_r, v);
        });
        CHECK(on_r < 1e-15);
        // difference-type symbols conserve the global mass exactly
        if (band.global) CHECK(off_r < 1e-15);
        else CHECK(off_r > 1e-3);
        CHECK(c4.hermitian_defect() < 1e-14);
    }
    CHECK_THROWS_AS(mass_source_symbol(parse_symbol("sep-sech"), Band::interval(0, 9), lat),
                    std::out_of_range);
}

TEST_CASE("mass source symbol vanishes linearly near resonance", "[symbols]") {
    const Lattice lat{-20, 20, 0.05};
    const QuarticSymbol c4 = mass_source_symbol(parse_symbol("sech-diff"), Band::interval(0, 0), lat);
    double ratio = 0.0;
    int near = 0;
    c4.for_each_slice_point([&](int a, int b, int c, int d) {
        const ResonanceData r = resonance_data(c4.quadruple(a, b, c, d));
        if (r.med > 0.1 + 1e-12) return;
        const double v = std::abs(c4.at(a, b, c));
        if (r.med < 1e-12) {
            CHECK(v < 1e-15);
            return;
        }
        ++near;
        ratio = std::max(ratio, v / r.med);
    });
    CHECK(near > 100);
    CHECK(std::isfinite(ratio));
    CHECK(ratio < 10.0);
}

TEST_CASE("build correction", "[symbols]") {
    const Lattice lat = Lattice::unit_bands(-2, 2);
    QuarticSymbol c4(lat);
    // (1, 0, -1, 0): d4sq = 2 (1 - 0)(0 + 1) = 2
    c4.at(1, 0, -1) = cd(1.0, 0.0);
    const QuarticCorrection corr = build_correction(c4, Band::whole());
    const cd b = corr.b4.at(1, 0, -1);
    CHECK_THAT(b.real(), WithinAbs(0.0, 1e-15));
    CHECK_THAT(b.imag(), WithinAbs(-0.5, 1e-15));
    double others = 0.0;
    corr.b4.for_each_slice_point([&](int a, int bb, int c, int) {
        if (!(a == 1 && bb == 0 && c == -1)) others = std::max(others, std::abs(corr.b4.at(a, bb, c)));
    });
    CHECK(others == 0.0);
    // <hi> <med> at (1,0,-1,0): hi = 2, med = 2
    CHECK_THAT(corr.size_constant, WithinRel(0.5 * 5.0, 1e-14));

    const QuarticCorrection zero = build_correction(QuarticSymbol(lat), Band::whole());
    CHECK(zero.b4.sup_abs() == 0.0);
}

TEST_CASE("build correction cancels the quartic phase", "[symbols]") {
    // d/dt of b4 u1 conj(u2) u3 conj(u4) under the linear flow is -i d4sq b4 (...),
    // which must cancel the source c4.
    const Lattice lat = Lattice::unit_bands(-4, 4);
    const QuarticSymbol c4 = mass_source_symbol(parse_symbol("sep-sech"), Band::interval(1, 2), lat);
    const QuarticCorrection corr = build_correction(c4, Band::interval(1, 2));
    double defect = 0.0;
    c4.for_each_slice_point([&](int a, int b, int c, int d) {
        const ResonanceData r = resonance_data(c4.quadruple(a, b, c, d));
        defect = std::max(defect, std::abs(c4.at(a, b, c) - cd(0.0, 1.0) * r.d4sq * corr.b4.at(a, b, c)));
    });
    CHECK(defect < 1e-14);
    CHECK(corr.size_constant > 0.0);
    CHECK(std::isfinite(corr.size_constant));
    CHECK(corr.b4.hermitian_defect() < 1e-14);
}

TEST_CASE("build correction rejects non-conservative symbols", "[symbols]") {
    const Lattice lat = Lattice::unit_bands(-3, 3);
    const QuarticSymbol c4 = mass_source_symbol(parse_symbol("gain"), Band::whole(), lat);
    CHECK_THROWS_AS(build_correction(c4, Band::whole()), ConservationViolation);
}
