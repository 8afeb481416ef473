#pragma once

// Space-time norms over sampled runs, Sobolev and sum-space norms, bilinear
// Strichartz functionals, maximal frequency envelopes and the audit tables.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubiclab/evolve.hpp"
#include "cubiclab/functionals.hpp"
#include "cubiclab/spectral.hpp"

namespace cubiclab {

// Fields sampled at uniform cadence.
struct FieldSeries {
    std::vector<double> time;
    std::vector<Field> fields;

    std::size_t size() const { return time.size(); }
    void push(double t, const Field& u) {
        time.push_back(t);
        fields.push_back(u);
    }
};

// Diagnostic that appends every observed snapshot to `series`.
inline Diagnostic series_recorder(FieldSeries& series) {
    return [&series](const Snapshot& s) { series.push(s.time, s.u); };
}

struct TimeInterval {
    double t0 = 0.0;
    double t1 = 0.0;
    double length() const { return t1 - t0; }
};

namespace detail {

struct TimeSlice {
    std::vector<std::size_t> index;
    std::vector<double> weight;  // trapezoid
};

inline TimeSlice time_slice(const std::vector<double>& time, const TimeInterval& I) {
    if (!(I.t1 > I.t0)) throw std::invalid_argument("time interval must have positive length");
    TimeSlice s;
    const double scale = std::max(1.0, std::abs(I.t1));
    const double tol = 1e-9 * scale;
    for (std::size_t i = 0; i < time.size(); ++i)
        if (time[i] >= I.t0 - tol && time[i] <= I.t1 + tol) s.index.push_back(i);
    if (s.index.size() < 3) throw std::invalid_argument("space-time norm: fewer than 3 samples in the interval");
    const double t_first = time[s.index.front()], t_last = time[s.index.back()];
    const double h = (t_last - t_first) / static_cast<double>(s.index.size() - 1);
    for (std::size_t j = 0; j < s.index.size(); ++j) {
        const double expected = t_first + static_cast<double>(j) * h;
        if (std::abs(time[s.index[j]] - expected) > 1e-6 * h)
            throw std::invalid_argument("space-time norm: samples are not uniformly spaced");
    }
    if (std::abs(t_first - I.t0) > 1e-6 * h + tol || std::abs(t_last - I.t1) > 1e-6 * h + tol)
        throw std::invalid_argument("space-time norm: samples do not cover the interval");
    s.weight.assign(s.index.size(), h);
    s.weight.front() = s.weight.back() = 0.5 * h;
    return s;
}

}  // namespace detail

inline TimeInterval full_interval(const FieldSeries& s) {
    if (s.size() < 3) throw std::invalid_argument("space-time norm: fewer than 3 samples");
    return {s.time.front(), s.time.back()};
}

// ||u||_{L^6_{t,x}(I)}, trapezoid in time.
inline double spacetime_l6(const FieldSeries& s, const TimeInterval& I) {
    const auto slice = detail::time_slice(s.time, I);
    double acc = 0.0;
    for (std::size_t j = 0; j < slice.index.size(); ++j) {
        const double l6 = lp_norm(s.fields[slice.index[j]], 6.0);
        acc += slice.weight[j] * std::pow(l6, 6.0);
    }
    return std::pow(acc, 1.0 / 6.0);
}

// ---------------------------------------------------------------------------
// Sobolev norms. Weights w(xi)^2 multiply |f^(xi)|^2 in Parseval:
//   inhomogeneous  <xi>^{2s}
//   homogeneous    |xi|^{2s}
//   sum            (|xi|^{-2s} + c^2)^{-1}, the Hilbertian sum of H^s-dot and
//                  L^2 with norm ||f|| / c; for s = -1/2 this is 1 / (|xi| + c^2).

enum class SobolevKind { inhomogeneous, homogeneous, sum };

struct SobolevFlavor {
    SobolevKind kind = SobolevKind::inhomogeneous;
    double c = 1.0;               // sum flavor only
    bool drop_zero_mode = false;  // homogeneous flavor with s < 0

    static SobolevFlavor inhomogeneous() { return {}; }
    static SobolevFlavor homogeneous(bool drop_zero = false) { return {SobolevKind::homogeneous, 1.0, drop_zero}; }
    static SobolevFlavor sum(double c) { return {SobolevKind::sum, c, false}; }
};

inline std::string to_string(const SobolevFlavor& f) {
    switch (f.kind) {
        case SobolevKind::inhomogeneous: return "inhomogeneous";
        case SobolevKind::homogeneous: return f.drop_zero_mode ? "homogeneous(zero mode dropped)" : "homogeneous";
        default: return "sum(c=" + std::to_string(f.c) + ")";
    }
}

inline double sobolev_weight_squared(double xi, double s, const SobolevFlavor& f) {
    const double a = std::abs(xi);
    switch (f.kind) {
        case SobolevKind::inhomogeneous: return std::pow(1.0 + xi * xi, s);
        case SobolevKind::homogeneous: return a == 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(a, 2.0 * s);
        default: {
            if (a == 0.0 && s > 0.0) return 0.0;
            const double inv_x = (a == 0.0) ? (s < 0.0 ? 0.0 : 1.0) : std::pow(a, -2.0 * s);
            return 1.0 / (inv_x + f.c * f.c);
        }
    }
}

inline double sobolev_norm(const Spectrum& sp, double s, const SobolevFlavor& f) {
    if (f.kind == SobolevKind::sum && !(f.c > 0.0)) throw std::invalid_argument("sobolev_norm: sum flavor needs c > 0");
    const Grid& g = sp.grid;
    double acc = 0.0;
    for (int j = 0; j < g.size(); ++j) {
        const double w2 = std::norm(sp[j]);
        if (g.mode(j) == 0 && f.kind == SobolevKind::homogeneous && s < 0.0) {
            if (f.drop_zero_mode) continue;
            double total = 0.0;
            for (const auto& c : sp.coeffs) total += std::norm(c);
            if (w2 > 1e-24 * std::max(total, 1e-300))
                throw std::invalid_argument("sobolev_norm: homogeneous norm with s < 0 and a nonzero zero mode");
            continue;
        }
        acc += sobolev_weight_squared(g.frequency(j), s, f) * w2;
    }
    return std::sqrt(acc * g.dxi());
}

inline double sobolev_norm(const Field& u, double s, const SobolevFlavor& f) { return sobolev_norm(transform(u), s, f); }

// ---------------------------------------------------------------------------
// Bilinear Strichartz norm ||d/dx (u_A conj u_B(. + x0))||_{L^2_t X}, X the
// Sobolev space (s, flavor). Products are formed on the doubled grid.

struct BilinearNorm {
    double s = 0.0;
    SobolevFlavor flavor;
};

inline Field bilinear_derivative(const Field& u, const Band& a, const Band& b, double x0) {
    const Field ua = resample(band_filter(u, a), 2 * u.grid.size());
    const Field ub = resample(translate(band_filter(u, b), x0), 2 * u.grid.size());
    Field w(ua.grid);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = ua[i] * std::conj(ub[i]);
    return derivative(w);
}

inline double bilinear_strichartz(const FieldSeries& s, const Band& a, const Band& b, double x0,
                                  const TimeInterval& I, const BilinearNorm& norm = {}) {
    const auto slice = detail::time_slice(s.time, I);
    double acc = 0.0;
    for (std::size_t j = 0; j < slice.index.size(); ++j) {
        const double v = sobolev_norm(bilinear_derivative(s.fields[slice.index[j]], a, b, x0), norm.s, norm.flavor);
        acc += slice.weight[j] * v * v;
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Frequency envelopes on the unit band lattice.
//   c_k = max_j (d_j / eps) (1 + |k - j|)^{-delta}
// Admissibility is sup_k (Mc)_k / c_k with M the centered lattice maximal
// operator, c extended by zero outside the index range.

inline constexpr double kEnvelopeDelta = 0.75;
inline constexpr double kEnvelopeMaxConstant = 3.0;

struct Envelope {
    int k_lo = 0;
    RVec values;
    double delta = kEnvelopeDelta;
    double eps = 1.0;
    double admissibility = 0.0;

    int k_hi() const { return k_lo + static_cast<int>(values.size()) - 1; }
    bool contains(int k) const { return k >= k_lo && k <= k_hi(); }
    double operator[](int k) const { return contains(k) ? values[k - k_lo] : 0.0; }
    double on(const Band& b) const {
        if (b.global) throw std::invalid_argument("Envelope: global band has no envelope value");
        double acc = 0.0;
        for (int k = b.lo; k <= b.hi; ++k) acc += (*this)[k] * (*this)[k];
        return std::sqrt(acc);
    }
    double l2() const {
        double acc = 0.0;
        for (double v : values) acc += v * v;
        return std::sqrt(acc);
    }
};

inline RVec lattice_maximal(const RVec& c) {
    const int n = static_cast<int>(c.size());
    RVec prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + c[i];
    RVec m(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double best = 0.0;
        const int r_max = std::max(i, n - 1 - i);
        for (int r = 0; r <= r_max; ++r) {
            const int lo = std::max(0, i - r), hi = std::min(n - 1, i + r);
            best = std::max(best, (prefix[hi + 1] - prefix[lo]) / (2.0 * r + 1.0));
        }
        m[i] = best;
    }
    return m;
}

inline double admissibility_constant(const RVec& c) {
    const RVec m = lattice_maximal(c);
    double sup = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] > 0.0) sup = std::max(sup, m[i] / c[i]);
        else if (m[i] > 0.0) return std::numeric_limits<double>::infinity();
    }
    return sup;
}

// Band masses d_k (index d_lo + i) spread over [out_lo, out_hi], which must
// contain the data range.
inline Envelope build_envelope(const RVec& d, int d_lo, double eps, double delta, int out_lo, int out_hi,
                               double max_constant = kEnvelopeMaxConstant) {
    if (!(eps > 0.0)) throw std::invalid_argument("build_envelope: eps must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("build_envelope: delta must be positive");
    if (d.empty()) throw std::invalid_argument("build_envelope: no band data");
    const int d_hi = d_lo + static_cast<int>(d.size()) - 1;
    if (out_lo > d_lo || out_hi < d_hi) throw std::invalid_argument("build_envelope: output range must cover the data");
    bool any = false;
    for (double v : d) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("build_envelope: band data must be finite and >= 0");
        any = any || v > 0.0;
    }
    if (!any) throw std::invalid_argument("build_envelope: all band data vanish");

    Envelope e;
    e.k_lo = out_lo;
    e.delta = delta;
    e.eps = eps;
    e.values.assign(out_hi - out_lo + 1, 0.0);
    for (int k = out_lo; k <= out_hi; ++k) {
        double best = 0.0;
        for (int j = d_lo; j <= d_hi; ++j) {
            const double v = d[j - d_lo];
            if (v > 0.0) best = std::max(best, v / eps * std::pow(1.0 + std::abs(k - j), -delta));
        }
        e.values[k - out_lo] = best;
    }
    e.admissibility = admissibility_constant(e.values);
    if (!(e.admissibility <= max_constant))
        throw std::runtime_error("build_envelope: maximal constant " + std::to_string(e.admissibility) + " exceeds " +
                                 std::to_string(max_constant) + "; adjust delta");
    for (int j = d_lo; j <= d_hi; ++j)
        if (d[j - d_lo] > eps * e[j] * (1.0 + 1e-12))
            throw std::runtime_error("build_envelope: envelope fails to dominate band " + std::to_string(j));
    return e;
}

inline Envelope build_envelope(const RVec& d, int d_lo, double eps, double delta = kEnvelopeDelta) {
    return build_envelope(d, d_lo, eps, delta, d_lo, d_lo + static_cast<int>(d.size()) - 1);
}

// ||P_k u|| for every representable band.
inline RVec band_norms(const Field& u, int& k_lo) {
    const BandRange r = representable_bands(u.grid);
    k_lo = r.lo;
    const Spectrum sp = transform(u);
    RVec out;
    for (int k = r.lo; k <= r.hi; ++k) out.push_back(std::sqrt(parseval_norm_squared(band_project(sp, k))));
    return out;
}

// ---------------------------------------------------------------------------
// Bootstrap audit: measured / claimed for each bound, reported, not judged.

struct AuditRow {
    std::string bound;  // uk-ee, uk-se, uk-bi, uab-bi
    int k1 = 0;
    int k2 = 0;
    double measured = 0.0;
    double claimed = 0.0;
    double ratio = 0.0;
};

struct AuditTable {
    std::vector<AuditRow> rows;
    double time_constraint = 0.0;  // T eps^6
    double sup(const std::string& bound) const {
        double s = 0.0;
        for (const auto& r : rows)
            if (r.bound == bound) s = std::max(s, r.ratio);
        return s;
    }
};

struct AuditOptions {
    std::vector<int> bands;                      // k for the single-band bounds; empty = all with c_k > floor
    std::vector<std::pair<int, int>> pairs;      // (k1, k2) for the transversal bound
    double x0 = 0.0;
    double envelope_floor = 1e-8;  // bands with eps c_k below this are skipped
};

inline AuditTable audit_bootstrap(const FieldSeries& s, const Envelope& env, double eps, const AuditOptions& o = {}) {
    const TimeInterval I = full_interval(s);
    const auto slice = detail::time_slice(s.time, I);
    AuditTable t;
    t.time_constraint = I.length() * std::pow(eps, 6);

    std::vector<int> bands = o.bands;
    if (bands.empty())
        for (int k = env.k_lo; k <= env.k_hi(); ++k)
            if (eps * env[k] > o.envelope_floor && representable_bands(s.fields.front().grid).contains(k))
                bands.push_back(k);

    auto push = [&t](std::string bound, int k1, int k2, double measured, double claimed) {
        t.rows.push_back({std::move(bound), k1, k2, measured, claimed, claimed > 0.0 ? measured / claimed : 0.0});
    };
    for (int k : bands) {
        const double ck = eps * env[k];
        if (!(ck > o.envelope_floor)) continue;
        double sup_l2 = 0.0, l6 = 0.0;
        for (std::size_t j = 0; j < slice.index.size(); ++j) {
            const Field uk = band_project(s.fields[slice.index[j]], k);
            sup_l2 = std::max(sup_l2, l2_norm(uk));
            l6 += slice.weight[j] * std::pow(lp_norm(uk, 6.0), 6.0);
        }
        push("uk-ee", k, k, sup_l2, ck);
        push("uk-se", k, k, std::pow(l6, 1.0 / 6.0), std::pow(ck, 2.0 / 3.0));
        const Band b = Band::single(k);
        push("uk-bi", k, k, bilinear_strichartz(s, b, b, 0.0, I), ck * ck);
    }
    for (const auto& [k1, k2] : o.pairs) {
        const double claimed = eps * eps * env[k1] * env[k2] * std::sqrt(japanese(static_cast<double>(k1 - k2)));
        const double measured = bilinear_strichartz(s, Band::single(k1), Band::single(k2), o.x0, I);
        push("uab-bi", k1, k2, measured, claimed);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Interpolation audit for v = |u_k|^2:
//   C_v = ||v||_{L^3_{t,x}} / (T^{1/9} ||v||_{L^inf_t L^1_x}^{5/9} ||v||_{L^2_t H^1-dot_x}^{4/9})

struct InterpolationRow {
    Band band;
    std::optional<double> constant;  // empty when the denominator vanishes
};

struct InterpolationReport {
    std::vector<InterpolationRow> rows;
    double sup = 0.0;
    int skipped = 0;
};

// profiles: v sampled at the series times (uniform cadence), on grid g.
inline std::optional<double> interpolation_constant(const Grid& g, const std::vector<double>& time,
                                                    const std::vector<RVec>& profiles) {
    if (profiles.size() != time.size()) throw std::invalid_argument("interpolation_constant: length mismatch");
    const TimeInterval I{time.front(), time.back()};
    const auto slice = detail::time_slice(time, I);
    double l3 = 0.0, linf_l1 = 0.0, l2_h1 = 0.0;
    for (std::size_t j = 0; j < slice.index.size(); ++j) {
        const RVec& v = profiles[slice.index[j]];
        double cube = 0.0, l1 = 0.0;
        Field f(g);
        for (std::size_t i = 0; i < v.size(); ++i) {
            cube += std::pow(std::abs(v[i]), 3.0);
            l1 += std::abs(v[i]);
            f[i] = v[i];
        }
        l3 += slice.weight[j] * cube * g.dx();
        linf_l1 = std::max(linf_l1, l1 * g.dx());
        l2_h1 += slice.weight[j] * l2_norm_squared(derivative(f));
    }
    const double den = std::pow(I.length(), 1.0 / 9.0) * std::pow(linf_l1, 5.0 / 9.0) * std::pow(std::sqrt(l2_h1), 4.0 / 9.0);
    if (!(den > 0.0) || !std::isfinite(den)) return std::nullopt;
    return std::cbrt(l3) / den;
}

inline InterpolationReport interpolation_audit(const FieldSeries& s, const std::vector<Band>& bands) {
    InterpolationReport r;
    for (const Band& k : bands) {
        std::vector<RVec> profiles;
        Grid fine;
        for (const auto& u : s.fields) {
            const Field uk = resample(band_filter(u, k), 2 * u.grid.size());
            fine = uk.grid;
            RVec v(uk.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::norm(uk[i]);
            profiles.push_back(std::move(v));
        }
        InterpolationRow row{k, interpolation_constant(fine, s.time, profiles)};
        if (row.constant) r.sup = std::max(r.sup, *row.constant);
        else ++r.skipped;
        r.rows.push_back(row);
    }
    return r;
}

}  // namespace cubiclab
