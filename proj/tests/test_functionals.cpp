#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cubiclab/functionals.hpp"
#include "cubiclab/nonlinear.hpp"

using namespace cubiclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Field smooth_random(const Grid& g, int kmax, double norm, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Spectrum s(g);
    for (int j = 0; j < g.size(); ++j)
        if (std::abs(g.mode(j)) <= kmax) s[j] = cd(n(rng), n(rng));
    Field u = inverse_transform(s);
    return cd(norm / l2_norm(u)) * u;
}

// Localized random packet: Gaussian envelope times a random band-limited field.
Field packet(const Grid& g, double center, double width, unsigned seed) {
    const Field r = smooth_random(g, g.size() / 8, 1.0, seed);
    Field u(g);
    for (int i = 0; i < g.size(); ++i) {
        const double y = (g.x(i) - center) / width;
        u[i] = r[i] * std::exp(-y * y);
    }
    return u;
}

// B(x_n) = sum_{j,l} s(xi_j, xi_l) u^_j conj(u^_l) e^{i (xi_j - xi_l)(x_n - x_min)} (sqrt(2 pi)/L)^2
template <class S>
RVec bilinear_oracle(const Field& u, S&& s) {
    const Grid& g = u.grid;
    const Spectrum sp = transform(u);
    const int n = g.size();
    const double c = kTwoPi / (g.length() * g.length());
    RVec out(n);
    for (int i = 0; i < n; ++i) {
        cd acc{0.0, 0.0};
        const double y = g.x(i) - g.x_min();
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                acc += s(g.frequency(j), g.frequency(l)) * sp[j] * std::conj(sp[l]) *
                       std::exp(cd(0.0, (g.frequency(j) - g.frequency(l)) * y));
        out[i] = (c * acc).real();
        REQUIRE(std::abs((c * acc).imag()) < 1e-10);
    }
    return out;
}

// Cumulative integral from the left edge through exact integrals of the
// cardinal trigonometric basis (Nyquist term as a cosine).
RVec dirichlet_prefix(const Grid& g, const RVec& f) {
    const int n = g.size();
    RVec out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double a = g.x(i) - g.x(j);
            const double b = g.x_min() - g.x(j);
            double w = g.x(i) - g.x_min();
            for (int k = 1; k < n / 2; ++k) {
                const double kap = k * g.dxi();
                w += 2.0 * (std::sin(kap * a) - std::sin(kap * b)) / kap;
            }
            const double kn = (n / 2) * g.dxi();
            w += (std::sin(kn * a) - std::sin(kn * b)) / kn;
            acc += w / n * f[j];
        }
        out[i] = acc;
    }
    return out;
}

QuarticSymbol random_quartic(const Lattice& lat, unsigned seed, bool hermitian) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    QuarticSymbol s(lat);
    s.fill([&](int, int, int, int) { return cd(n(rng), n(rng)); });
    if (hermitian) {
        QuarticSymbol h(lat);
        h.fill([&](int a, int b, int c, int d) { return 0.5 * (s.at(a, b, c) + std::conj(s.at(b, a, d))); });
        return h;
    }
    return s;
}

}  // namespace

TEST_CASE("densities of a plane wave", "[functionals]") {
    const Grid g(32, kTwoPi);
    const cd amp(0.6, -0.2);
    const double k = 3.0;
    const Field u = Field::sample(g, [&](double x) { return amp * std::exp(cd(0.0, k * x)); });
    const DensityProfiles d = densities(u, Band::whole(), 0.0);
    const double a2 = std::norm(amp);
    for (int i = 0; i < g.size(); ++i) {
        CHECK_THAT(d.mass[i], WithinAbs(a2, 1e-13));
        CHECK_THAT(d.momentum[i], WithinAbs(2.0 * k * a2, 1e-12));
        CHECK_THAT(d.energy[i], WithinAbs(4.0 * k * k * a2, 1e-11));
    }
    // Galilean shift: (xi + eta - 2 xi0) weights
    const DensityProfiles s = densities(u, Band::whole(), 1.0);
    CHECK_THAT(s.momentum[5], WithinAbs(2.0 * (k - 1.0) * a2, 1e-12));
    CHECK_THAT(s.energy[5], WithinAbs(4.0 * (k - 1.0) * (k - 1.0) * a2, 1e-11));
}

TEST_CASE("real fields carry no momentum", "[functionals]") {
    const Grid g(64, 20.0);
    const Field u = Field::sample(g, [](double x) { return std::exp(-x * x) * (1.0 + 0.3 * std::sin(x)); });
    const RVec p = density(u, {DensityTag::momentum, Band::whole(), 0.0});
    for (double v : p) CHECK(std::abs(v) < 1e-12);
    const RVec m = density(u, {DensityTag::mass, Band::whole(), 0.0});
    CHECK_THAT(integrate(g, m), WithinRel(l2_norm_squared(u), 1e-12));
}

TEST_CASE("densities match the dense bilinear oracle", "[functionals]") {
    const Grid g(32, 4.0 * kPi);
    const Field u = smooth_random(g, 15, 1.0, 3);  // no Nyquist content
    for (const Band& band : {Band::whole(), Band::interval(-1, 2)}) {
        for (double xi0 : {0.0, 1.7}) {
            auto a = [&](double xi, double eta) { return band(xi) * band(eta); };
            const RVec m = bilinear_oracle(u, [&](double xi, double eta) { return a(xi, eta); });
            const RVec p = bilinear_oracle(u, [&](double xi, double eta) { return (xi + eta - 2 * xi0) * a(xi, eta); });
            const RVec e = bilinear_oracle(u, [&](double xi, double eta) {
                return (xi + eta - 2 * xi0) * (xi + eta - 2 * xi0) * a(xi, eta);
            });
            const DensityProfiles d = densities(u, band, xi0);
            for (int i = 0; i < g.size(); ++i) {
                CHECK_THAT(d.mass[i], WithinAbs(m[i], 1e-12));
                CHECK_THAT(d.momentum[i], WithinAbs(p[i], 1e-11));
                CHECK_THAT(d.energy[i], WithinAbs(e[i], 1e-10));
            }
        }
    }
}

TEST_CASE("quartic functional identities", "[functionals]") {
    const Grid g(64, kTwoPi);
    const Lattice lat = Lattice::modes(g);
    const Field u = smooth_random(g, 32, 1.3, 9);

    CHECK(quartic_functional(u, QuarticSymbol(lat)).value == 0.0);

    QuarticSymbol one(lat);
    one.fill([](int, int, int, int) { return cd(1.0, 0.0); });
    const QuarticValue q = quartic_functional(u, one);
    // quadrature of |u|^4 on the 4x trigonometric interpolant is exact
    const Field fine = resample(u, 4 * g.size());
    double quad = 0.0;
    for (const auto& v : fine.values) quad += std::norm(v) * std::norm(v);
    quad *= fine.grid.dx();
    CHECK_THAT(q.value, WithinRel(quad, 1e-10));
    CHECK(std::abs(q.imag) < 1e-10 * quad);
    CHECK(q.hermitian);

    CHECK_THROWS_AS(quartic_functional(u, QuarticSymbol(Lattice{-3, 3, 0.5})), std::invalid_argument);
    const Grid h(64, 4.0 * kPi);
    CHECK_THROWS_AS(quartic_functional(Field(h), one), std::invalid_argument);
}

TEST_CASE("quartic functional vs brute-force oracle", "[functionals]") {
    const Grid g(64, 3.0);
    const Lattice lat = Lattice::modes(g);
    const Field u = smooth_random(g, 32, 1.0, 12);
    const Spectrum sp = transform(u);
    for (bool herm : {true, false}) {
        const QuarticSymbol s = random_quartic(lat, 77, herm);
        // all 4-tuples with an explicit constraint test
        cd acc{0.0, 0.0};
        for (int k1 = lat.k_min; k1 <= lat.k_max; ++k1)
            for (int k2 = lat.k_min; k2 <= lat.k_max; ++k2)
                for (int k3 = lat.k_min; k3 <= lat.k_max; ++k3)
                    for (int k4 = lat.k_min; k4 <= lat.k_max; ++k4) {
                        if (k1 - k2 + k3 - k4 != 0) continue;
                        acc += s.at(k1, k2, k3) * sp[g.slot(k1)] * std::conj(sp[g.slot(k2)]) * sp[g.slot(k3)] *
                               std::conj(sp[g.slot(k4)]);
                    }
        acc *= std::pow(g.dxi(), 3) / kTwoPi;
        const QuarticValue q = quartic_functional(u, s);
        CHECK_THAT(q.value, WithinAbs(acc.real(), 1e-10 * std::abs(acc)));
        CHECK_THAT(q.imag, WithinAbs(acc.imag(), 1e-10 * std::abs(acc)));
        CHECK(q.hermitian == herm);
        if (herm) CHECK(std::abs(q.imag) < 1e-10 * std::abs(q.value));
    }
}

TEST_CASE("modified mass", "[functionals]") {
    const Grid g(64, kTwoPi);
    const Lattice lat = Lattice::modes(g, 12.0);
    const Band band = Band::interval(1, 3);

    const QuarticCorrection none = build_correction(
        mass_source_symbol(TrilinearSymbol::constant(-2.0), Band::whole(), lat), Band::whole());
    const Field u = smooth_random(g, 8, 0.7, 4);
    const ModifiedMass a = modified_mass(u, none);
    CHECK(a.mass_sharp == a.mass);
    CHECK(a.gap == 0.0);

    const ModifiedMass z = modified_mass(Field(g), none);
    CHECK(z.mass == 0.0);
    CHECK(z.mass_sharp == 0.0);
    CHECK(z.gap == 0.0);

    const QuarticCorrection corr = build_correction(mass_source_symbol(parse_symbol("sep-sech"), band, lat), band);
    std::vector<double> ratios;
    for (double eps : {0.25, 0.5, 1.0}) {
        const ModifiedMass m = modified_mass(cd(eps) * u, corr);
        ratios.push_back(m.gap / std::pow(eps, 4));
        CHECK(m.gap <= 10.0 * corr.size_constant * std::pow(l2_norm(cd(eps) * u), 4));
    }
    CHECK(ratios[0] > 0.0);
    CHECK_THAT(ratios[1], WithinRel(ratios[0], 0.05));
    CHECK_THAT(ratios[2], WithinRel(ratios[0], 0.05));
}

TEST_CASE("prefix integral vs cardinal-basis oracle", "[functionals]") {
    const Grid g(128, 40.0);
    const Field u = packet(g, 0.0, 3.0, 2);
    const RVec m = density(u, {DensityTag::mass, Band::whole(), 0.0});
    const RVec fast = prefix_integral(g, m);
    const RVec slow = dirichlet_prefix(g, m);
    double scale = 0.0;
    for (double v : slow) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < g.size(); ++i) CHECK_THAT(fast[i], WithinAbs(slow[i], 1e-12 * scale));
    // total equals the full integral
    CHECK_THAT(fast.back() + g.dx() * m.back(), WithinRel(integrate(g, m), 1e-10));
}

TEST_CASE("interaction functional", "[functionals]") {
    const Grid g(256, 60.0);
    const Field u = packet(g, 4.0, 3.0, 5);
    const Field v = packet(g, -5.0, 2.5, 6);
    InteractionOptions o;
    o.band_a = Band::interval(-2, 3);
    o.band_b = Band::interval(-1, 1);
    o.xi0 = 0.4;

    SECTION("trivial cases") {
        const Field ru = Field::sample(g, [](double x) { return std::exp(-x * x / 9.0); });
        const Field rv = Field::sample(g, [](double x) { return std::exp(-(x - 2) * (x - 2) / 4.0); });
        InteractionOptions r;
        CHECK(std::abs(interaction_functional(ru, rv, r)) < 1e-12);
        CHECK(interaction_functional(u, Field(g), o) == 0.0);
    }

    SECTION("double-sum oracle") {
        o.oversample = 1;
        const DensityProfiles du = densities(u, o.band_a, o.xi0);
        const DensityProfiles dv = densities(v, o.band_b, o.xi0);
        const RVec gm = dirichlet_prefix(g, dv.mass);
        const RVec gp = dirichlet_prefix(g, dv.momentum);
        double oracle = 0.0;
        for (int i = 0; i < g.size(); ++i) oracle += du.momentum[i] * gm[i] - du.mass[i] * gp[i];
        oracle *= g.dx();
        const double fast = interaction_functional(u, v, o);
        CHECK_THAT(fast, WithinRel(oracle, 1e-8));
        o.oversample = 2;
        CHECK_THAT(interaction_functional(u, v, o), WithinRel(oracle, 1e-6));
    }

    SECTION("swap and reflection") {
        // global bands: the bump filter's algebraic tails would reach the edges
        o.band_a = o.band_b = Band::whole();
        InteractionOptions s = o;
        std::swap(s.band_a, s.band_b);
        const double iab = interaction_functional(u, v, o);
        const double iba = interaction_functional(v, u, s);
        // I_AB(u, v) - I_BA(v, u) integrates over all pairs
        const Grid fine(2 * g.size(), g.length());
        const DensityProfiles du = densities(resample(u, fine.size()), o.band_a, o.xi0);
        const DensityProfiles dv = densities(resample(v, fine.size()), o.band_b, o.xi0);
        const double totals = integrate(fine, du.momentum) * integrate(fine, dv.mass) -
                              integrate(fine, du.mass) * integrate(fine, dv.momentum);
        CHECK_THAT(iab - iba, WithinAbs(totals, 1e-10 * (std::abs(iab) + std::abs(totals))));

        // swapping composed with x -> -x leaves the functional unchanged
        auto reflect = [&](const Field& f) {
            Field r(g);
            for (int i = 0; i < g.size(); ++i) r[i] = f[(g.size() - i) % g.size()];
            return r;
        };
        InteractionOptions m;
        m.xi0 = -o.xi0;
        CHECK_THAT(interaction_functional(reflect(v), reflect(u), m), WithinRel(iab, 1e-10));
    }

    SECTION("shift overload") {
        CHECK(interaction_functional(u, 1.5, o) == interaction_functional(u, translate(u, 1.5), o));
    }
}

TEST_CASE("j4 identities", "[functionals]") {
    const Grid g(256, 60.0);
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> lo(-4, 2);
    for (int trial = 0; trial < 5; ++trial) {
        const Field u = packet(g, -3.0, 3.0, 100 + trial);
        const Field v = packet(g, 2.0, 2.0, 200 + trial);
        InteractionOptions o;
        const int a = lo(rng), b = lo(rng);
        o.band_a = Band::interval(a, a + 2);
        o.band_b = Band::interval(b, b + 1);
        const double base = j4(u, v, o);
        o.xi0 = 7.3;
        const double shifted = j4(u, v, o);
        CHECK_THAT(shifted, WithinAbs(base, 1e-10 * std::max(1.0, std::abs(base))));
    }

    const Field u = packet(g, 0.0, 3.0, 1);
    InteractionOptions o;
    o.band_a = o.band_b = Band::interval(-1, 2);
    const double val = j4(u, u, o);
    const double expected = 4.0 * mass_gradient_norm_squared(u, o.band_a);
    CHECK_THAT(val, WithinRel(expected, 1e-8));
    CHECK(val > 0.0);

    CHECK(j4(u, Field(g), o) == 0.0);
}

TEST_CASE("morawetz balance bookkeeping", "[functionals]") {
    const double h = 0.01;
    std::vector<double> i, j;
    for (int n = 0; n < 101; ++n) {
        i.push_back(std::sin(n * h));
        j.push_back(std::cos(n * h));
    }
    const MorawetzReport r = morawetz_balance(i, j, 0.0, h);
    CHECK(r.remainder.size() == i.size() - 2);
    CHECK(r.time.front() == h);
    // centered difference error of sin is -h^2/6 cos
    CHECK(r.remainder_sup <= h * h / 6.0 * 1.001);
    CHECK(r.remainder_sup >= h * h / 6.0 * 0.5);
    CHECK(r.remainder_l1 > 0.0);
    CHECK_FALSE(r.cadence_too_coarse);

    std::vector<double> ci, cj;
    for (int n = 0; n < 11; ++n) {
        ci.push_back(std::sin(n * 1.0));
        cj.push_back(std::cos(n * 1.0));
    }
    CHECK(morawetz_balance(ci, cj, 0.0, 1.0).cadence_too_coarse);
    CHECK_THROWS(morawetz_balance({1.0, 2.0}, {1.0, 2.0}, 0.0, 1.0));
    CHECK_THROWS(morawetz_balance({1.0, 2.0, 3.0}, {1.0, 2.0}, 0.0, 1.0));
}
