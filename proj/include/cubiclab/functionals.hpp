#pragma once

// Quadratic densities, quartic functionals on the mode lattice, the modified
// mass, the interaction functional and its quartic term, and the measured
// interaction balance.
//
// Densities of the band-filtered field f = a0(D) u, with Galilean shift xi0:
//   M = |f|^2                         symbol a0(xi) a0(eta)
//   P = 2 Im(conj f f_x) - 2 xi0 M    symbol (xi + eta - 2 xi0) a0 a0
//   E = 2|f_x|^2 - 2 Re(conj f f_xx) - 4 xi0 P0 + 4 xi0^2 M
//                                     symbol (xi + eta - 2 xi0)^2 a0 a0
// For the linear flow, d/dt M = -d/dx P and d/dt P = -d/dx E (unshifted).

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubiclab/spectral.hpp"
#include "cubiclab/symbols.hpp"

namespace cubiclab {

enum class DensityTag { mass, momentum, energy };

struct DensityKind {
    DensityTag tag = DensityTag::mass;
    Band band = Band::whole();
    double xi0 = 0.0;
};

// Trigonometric interpolant of u on `m` points of the same torus.
inline Field resample(const Field& u, int m) {
    if (m == u.grid.size()) return u;
    if (m < u.grid.size()) throw std::invalid_argument("resample: cannot reduce the point count");
    const Grid fine(m, u.grid.length(), u.grid.x_min());
    return Field(fine, detail::to_padded_physical(transform(u), m));
}

struct DensityProfiles {
    RVec mass, momentum, energy;
};

// All three densities of one field; cheaper than three density() calls.
inline DensityProfiles densities(const Field& u, const Band& band, double xi0) {
    const Field f = band_filter(u, band);
    const Field fx = derivative(f);
    const Field fxx = derivative(fx);
    const std::size_t n = f.size();
    DensityProfiles d{RVec(n), RVec(n), RVec(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::norm(f[i]);
        const double p = 2.0 * (std::conj(f[i]) * fx[i]).imag();
        const double e = 2.0 * std::norm(fx[i]) - 2.0 * (std::conj(f[i]) * fxx[i]).real();
        d.mass[i] = m;
        d.momentum[i] = p - 2.0 * xi0 * m;
        d.energy[i] = e - 4.0 * xi0 * p + 4.0 * xi0 * xi0 * m;
    }
    return d;
}

inline RVec density(const Field& u, const DensityKind& kind) {
    DensityProfiles d = densities(u, kind.band, kind.xi0);
    switch (kind.tag) {
        case DensityTag::mass: return std::move(d.mass);
        case DensityTag::momentum: return std::move(d.momentum);
        default: return std::move(d.energy);
    }
}

inline double band_mass(const Field& u, const Band& band) { return l2_norm_squared(band_filter(u, band)); }

// ---------------------------------------------------------------------------
// Quartic functionals
//   B4(S)(u) = nu4 * sum_{k1 - k2 + k3 - k4 = 0} S(k) u^(k1) conj u^(k2) u^(k3) conj u^(k4),
// nu4 = dxi^3 / (2 pi), over the stored lattice, which must be the grid-mode
// lattice (spacing dxi). Modes outside the lattice carry S = 0.

struct QuarticValue {
    double value = 0.0;      // real part (Hermitian part of S)
    double imag = 0.0;       // imaginary part, zero for Hermitian S
    bool hermitian = true;   // S(k) = conj S(k2, k1, k4, k3) to 1e-12 relative
};

inline void require_mode_lattice(const Lattice& lat, const Grid& g) {
    if (std::abs(lat.spacing - g.dxi()) > 1e-12 * g.dxi())
        throw std::invalid_argument("quartic functional: lattice spacing " + std::to_string(lat.spacing) +
                                    " differs from the grid frequency step " + std::to_string(g.dxi()));
}

inline QuarticValue quartic_functional(const Field& u, const QuarticSymbol& s) {
    const Lattice& lat = s.lattice();
    const Grid& g = u.grid;
    require_mode_lattice(lat, g);
    const Spectrum sp = transform(u);
    const int half = g.size() / 2;
    auto coeff = [&](int k) { return (k >= -half && k < half) ? sp[g.slot(k)] : cd{0.0, 0.0}; };

    cd acc{0.0, 0.0};
    s.for_each_slice_point([&](int k1, int k2, int k3, int k4) {
        const cd v = s.at(k1, k2, k3);
        if (v != cd{0.0, 0.0}) acc += v * coeff(k1) * std::conj(coeff(k2)) * coeff(k3) * std::conj(coeff(k4));
    });
    const double nu4 = g.dxi() * g.dxi() * g.dxi() / kTwoPi;
    acc *= nu4;
    QuarticValue out;
    out.value = acc.real();
    out.imag = acc.imag();
    out.hermitian = s.hermitian_defect() <= 1e-12 * std::max(1.0, s.sup_abs());
    return out;
}

struct ModifiedMass {
    double mass = 0.0;        // M_a = ||a0(D) u||^2
    double mass_sharp = 0.0;  // M_a + B4(b4)
    double gap = 0.0;
};

inline ModifiedMass modified_mass(const Field& u, const QuarticCorrection& corr) {
    ModifiedMass m;
    m.mass = band_mass(u, corr.band);
    m.mass_sharp = m.mass + quartic_functional(u, corr.b4).value;
    m.gap = std::abs(m.mass_sharp - m.mass);
    return m;
}

// ---------------------------------------------------------------------------
// Interaction functional
//   I_AB = iint_{x > y} P_A(u)(x) M_B(v)(y) - M_A(u)(x) P_B(v)(y) dx dy,
// oriented so that d/dt I_AB = J4_AB + (higher order) for the linear flow.
// The inner integral is the cumulative integral from the left grid edge:
//   G(x) = int_{x_min}^{x} F = Phi(x) - Phi(x_min) + mean(F) (x - x_min),
// with Phi the spectral antiderivative of F - mean(F). It equals the line
// integral for data localized away from the edge.

inline RVec prefix_integral(const Grid& g, const RVec& f) {
    const int n = g.size();
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= n;
    Field centered(g);
    for (int i = 0; i < n; ++i) centered[i] = f[i] - mean;
    Spectrum s = transform(centered);
    for (int j = 0; j < n; ++j) {
        const int k = g.mode(j);
        // the Nyquist cosine integrates to a sine vanishing on the grid
        s[j] = (k == 0 || k == -n / 2) ? cd{0.0, 0.0} : s[j] / cd(0.0, g.frequency(j));
    }
    const Field phi = inverse_transform(s);
    RVec out(n);
    for (int i = 0; i < n; ++i) out[i] = phi[i].real() - phi[0].real() + mean * (g.x(i) - g.x_min());
    return out;
}

struct InteractionOptions {
    Band band_a = Band::whole();
    Band band_b = Band::whole();
    double xi0 = 0.0;
    int oversample = 2;  // quadrature on the trig interpolant at oversample * N points
};

inline double interaction_functional(const Field& u, const Field& v, const InteractionOptions& o) {
    if (!(u.grid == v.grid)) throw std::invalid_argument("interaction_functional: grid mismatch");
    const Field uu = resample(u, o.oversample * u.grid.size());
    const Field vv = resample(v, o.oversample * v.grid.size());
    const DensityProfiles du = densities(uu, o.band_a, o.xi0);
    const DensityProfiles dv = densities(vv, o.band_b, o.xi0);
    const RVec gm = prefix_integral(vv.grid, dv.mass);
    const RVec gp = prefix_integral(vv.grid, dv.momentum);
    double acc = 0.0;
    for (std::size_t i = 0; i < gm.size(); ++i) acc += du.momentum[i] * gm[i] - du.mass[i] * gp[i];
    return acc * uu.grid.dx();
}

// v = u(. + x0)
inline double interaction_functional(const Field& u, double x0, const InteractionOptions& o) {
    return interaction_functional(u, translate(u, x0), o);
}

inline double j4(const Field& u, const Field& v, const InteractionOptions& o) {
    if (!(u.grid == v.grid)) throw std::invalid_argument("j4: grid mismatch");
    const Field uu = resample(u, o.oversample * u.grid.size());
    const Field vv = resample(v, o.oversample * v.grid.size());
    const DensityProfiles a = densities(uu, o.band_a, o.xi0);
    const DensityProfiles b = densities(vv, o.band_b, o.xi0);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.mass.size(); ++i)
        acc += a.mass[i] * b.energy[i] + b.mass[i] * a.energy[i] - 2.0 * a.momentum[i] * b.momentum[i];
    return acc * uu.grid.dx();
}

inline double j4(const Field& u, double x0, const InteractionOptions& o) { return j4(u, translate(u, x0), o); }

// ||d/dx |f|^2||^2 for f = a0(D) u.
inline double mass_gradient_norm_squared(const Field& u, const Band& band, int oversample = 2) {
    const Field f = band_filter(resample(u, oversample * u.grid.size()), band);
    Field m(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) m[i] = std::norm(f[i]);
    return l2_norm_squared(derivative(m));
}

// ---------------------------------------------------------------------------
// Interaction balance.

struct MorawetzReport {
    std::vector<double> time;       // interior sample times
    std::vector<double> interaction;
    std::vector<double> j4;
    std::vector<double> remainder;  // centered dI/dt - J4, length n - 2
    double remainder_sup = 0.0;
    double remainder_l1 = 0.0;      // trapezoid in time
    double derivative_error = 0.0;  // Richardson estimate of the centered-difference error
    bool cadence_too_coarse = false;
    std::string band_a, band_b;
    double xi0 = 0.0;
    double x0 = 0.0;
    bool corrected = false;
};

// I and J4 sampled at uniform spacing h. The cadence is flagged when the
// estimated finite-difference error exceeds `tolerance` times sup |J4|.
inline MorawetzReport morawetz_balance(const std::vector<double>& interaction, const std::vector<double>& j4s,
                                       double t0, double h, double tolerance = 1e-3) {
    const std::size_t n = interaction.size();
    if (j4s.size() != n) throw std::invalid_argument("morawetz_balance: series length mismatch");
    if (n < 3) throw std::invalid_argument("morawetz_balance: need at least 3 samples");
    if (!(h > 0.0)) throw std::invalid_argument("morawetz_balance: spacing must be positive");
    MorawetzReport r;
    r.interaction = interaction;
    r.j4 = j4s;
    double j4_scale = 0.0;
    for (double v : j4s) j4_scale = std::max(j4_scale, std::abs(v));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = (interaction[i + 1] - interaction[i - 1]) / (2.0 * h);
        r.time.push_back(t0 + static_cast<double>(i) * h);
        r.remainder.push_back(d - j4s[i]);
        r.remainder_sup = std::max(r.remainder_sup, std::abs(r.remainder.back()));
        if (i >= 2 && i + 2 < n) {
            const double d2 = (interaction[i + 2] - interaction[i - 2]) / (4.0 * h);
            r.derivative_error = std::max(r.derivative_error, std::abs(d2 - d) / 3.0);
        }
    }
    for (std::size_t i = 0; i + 1 < r.remainder.size(); ++i)
        r.remainder_l1 += 0.5 * h * (std::abs(r.remainder[i]) + std::abs(r.remainder[i + 1]));
    r.cadence_too_coarse = r.derivative_error > tolerance * std::max(j4_scale, 1e-300);
    return r;
}

}  // namespace cubiclab
