#pragma once

// Periodic grid, complex fields and their spectral representation.
//
// Conventions (fixed, asserted by the Parseval tests):
//   x_n  = x_min + n dx,            n = 0..N-1,  dx = L/N
//   xi_j = 2 pi j / L,              j in [-N/2, N/2)  (stored in FFT order)
//   u^(xi_j) = dx / sqrt(2 pi) * sum_n u(x_n) exp(-i xi_j (x_n - x_min))
// so that  ||u||_{L^2}^2 = sum_j |u^(xi_j)|^2 * (2 pi / L)  and
//   u(x) = sqrt(2 pi) / L * sum_j u^(xi_j) exp(i xi_j (x - x_min)).
// Spectral phases are measured from the left edge of the grid.

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace cubiclab {

using cd = std::complex<double>;
using CVec = std::vector<cd>;
using RVec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Grid {
public:
    Grid() = default;
    Grid(int n_points, double length) : Grid(n_points, length, -0.5 * length) {}
    Grid(int n_points, double length, double x_min)
        : n_(n_points), length_(length), x_min_(x_min) {
        if (n_points <= 0 || n_points % 2 != 0)
            throw std::invalid_argument("Grid: n_points must be a positive even integer, got " +
                                        std::to_string(n_points));
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("Grid: length must be positive and finite");
        if (!std::isfinite(x_min))
            throw std::invalid_argument("Grid: x_min must be finite");
    }

    int size() const { return n_; }
    double length() const { return length_; }
    double x_min() const { return x_min_; }
    double dx() const { return length_ / n_; }
    double dxi() const { return kTwoPi / length_; }
    double x(int n) const { return x_min_ + n * dx(); }

    // Integer mode index of FFT slot j, in [-N/2, N/2).
    int mode(int j) const { return j < n_ / 2 ? j : j - n_; }
    int slot(int mode_index) const { return mode_index >= 0 ? mode_index : mode_index + n_; }
    double frequency(int j) const { return mode(j) * dxi(); }
    double max_frequency() const { return (n_ / 2) * dxi(); }

    RVec frequencies() const {
        RVec xi(n_);
        for (int j = 0; j < n_; ++j) xi[j] = frequency(j);
        return xi;
    }
    RVec points() const {
        RVec xs(n_);
        for (int n = 0; n < n_; ++n) xs[n] = x(n);
        return xs;
    }

    bool operator==(const Grid& o) const {
        return n_ == o.n_ && length_ == o.length_ && x_min_ == o.x_min_;
    }

private:
    int n_ = 2;
    double length_ = kTwoPi;
    double x_min_ = -kPi;
};

// Torus length such that a wave packet of the given support width, with
// frequencies up to xi_max (group velocity 2 xi), cannot wrap before t_end.
inline double no_wrap_length(double xi_max, double t_end, double support_width) {
    return 2.0 * (2.0 * std::abs(xi_max)) * t_end + support_width;
}

struct Field {
    Grid grid;
    CVec values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.size(), cd{0.0, 0.0}) {}
    Field(const Grid& g, CVec v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.size())
            throw std::invalid_argument("Field: sample count does not match grid");
    }

    template <class F>
    static Field sample(const Grid& g, F&& f) {
        Field out(g);
        for (int n = 0; n < g.size(); ++n) out.values[n] = cd(f(g.x(n)));
        return out;
    }

    cd& operator[](std::size_t n) { return values[n]; }
    const cd& operator[](std::size_t n) const { return values[n]; }
    std::size_t size() const { return values.size(); }
};

struct Spectrum {
    Grid grid;
    CVec coeffs;  // FFT order

    Spectrum() = default;
    explicit Spectrum(const Grid& g) : grid(g), coeffs(g.size(), cd{0.0, 0.0}) {}
    Spectrum(const Grid& g, CVec c) : grid(g), coeffs(std::move(c)) {}

    std::size_t size() const { return coeffs.size(); }
    cd& operator[](std::size_t j) { return coeffs[j]; }
    const cd& operator[](std::size_t j) const { return coeffs[j]; }
};

namespace detail {

// FFTW plans cached per (size, direction). Planning is serialized; execution
// through fftw_execute_dft on caller-owned buffers is thread-safe.
class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans plans;
        return plans;
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        CVec in(n), out(n);
        fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                       reinterpret_cast<fftw_complex*>(out.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (p == nullptr) throw std::runtime_error("FFTW planning failed");
        plans_.emplace(key, p);
        return p;
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

// Unnormalized DFT; in and out must be distinct buffers.
inline void dft(const CVec& in, CVec& out, int sign) {
    const int n = static_cast<int>(in.size());
    out.resize(n);
    fftw_plan p = FftPlans::instance().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cd*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

inline void require_finite(std::span<const cd> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
            throw std::domain_error(std::string(what) + ": non-finite sample at index " +
                                    std::to_string(i));
    }
}

}  // namespace detail

inline Spectrum transform(const Field& u) {
    detail::require_finite(u.values, "transform");
    Spectrum s(u.grid);
    detail::dft(u.values, s.coeffs, FFTW_FORWARD);
    const double scale = u.grid.dx() / std::sqrt(kTwoPi);
    for (auto& c : s.coeffs) c *= scale;
    return s;
}

inline Field inverse_transform(const Spectrum& s) {
    detail::require_finite(s.coeffs, "inverse_transform");
    Field u(s.grid);
    detail::dft(s.coeffs, u.values, FFTW_BACKWARD);
    const double scale = std::sqrt(kTwoPi) / s.grid.length();
    for (auto& v : u.values) v *= scale;
    return u;
}

namespace detail {

// Trigonometric interpolant of s on M >= N equispaced points.
inline CVec to_padded_physical(const Spectrum& s, int m) {
    const int n = s.grid.size();
    CVec padded(m, cd{0.0, 0.0});
    for (int j = 0; j < n; ++j) {
        const int k = s.grid.mode(j);
        padded[k >= 0 ? k : k + m] = s[j];
    }
    CVec out;
    dft(padded, out, FFTW_BACKWARD);
    const double scale = std::sqrt(kTwoPi) / s.grid.length();
    for (auto& v : out) v *= scale;
    return out;
}

inline Spectrum from_padded_physical(const CVec& w, const Grid& g) {
    const int m = static_cast<int>(w.size());
    CVec full;
    dft(w, full, FFTW_FORWARD);
    const double scale = (g.length() / m) / std::sqrt(kTwoPi);
    Spectrum s(g);
    for (int j = 0; j < g.size(); ++j) {
        const int k = g.mode(j);
        s[j] = full[k >= 0 ? k : k + m] * scale;
    }
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementary field algebra.

inline Field operator+(Field a, const Field& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}
inline Field operator-(Field a, const Field& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}
inline Field operator*(cd s, Field a) {
    for (auto& v : a.values) v *= s;
    return a;
}
inline Field conj(Field a) {
    for (auto& v : a.values) v = std::conj(v);
    return a;
}

inline double integrate(const Grid& g, std::span<const double> f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.dx();
}

inline double l2_norm_squared(const Field& u) {
    double s = 0.0;
    for (const auto& v : u.values) s += std::norm(v);
    return s * u.grid.dx();
}
inline double l2_norm(const Field& u) { return std::sqrt(l2_norm_squared(u)); }

inline double parseval_norm_squared(const Spectrum& s) {
    double acc = 0.0;
    for (const auto& c : s.coeffs) acc += std::norm(c);
    return acc * s.grid.dxi();
}

inline double lp_norm(const Field& u, double p) {
    double s = 0.0;
    for (const auto& v : u.values) s += std::pow(std::abs(v), p);
    return std::pow(s * u.grid.dx(), 1.0 / p);
}

inline double max_abs(const Field& u) {
    double m = 0.0;
    for (const auto& v : u.values) m = std::max(m, std::abs(v));
    return m;
}

inline double relative_l2_error(const Field& a, const Field& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// ---------------------------------------------------------------------------
// Fourier multipliers.

inline Spectrum apply_multiplier(const Spectrum& s, std::span<const cd> symbol_values) {
    if (symbol_values.size() != s.size())
        throw std::invalid_argument("apply_multiplier: symbol table size mismatch");
    Spectrum out = s;
    for (std::size_t j = 0; j < s.size(); ++j) out[j] *= symbol_values[j];
    return out;
}

// symbol: callable double -> (double or complex), evaluated at every grid frequency.
template <class Symbol>
CVec multiplier_table(const Grid& g, Symbol&& symbol) {
    CVec table(g.size());
    for (int j = 0; j < g.size(); ++j) table[j] = cd(symbol(g.frequency(j)));
    return table;
}

template <class Symbol>
Spectrum apply_multiplier(const Spectrum& s, Symbol&& symbol)
    requires std::invocable<Symbol, double>
{
    Spectrum out = s;
    for (int j = 0; j < s.grid.size(); ++j) out[j] *= cd(symbol(s.grid.frequency(j)));
    return out;
}

template <class Symbol>
Field apply_multiplier(const Field& u, Symbol&& symbol)
    requires std::invocable<Symbol, double>
{
    return inverse_transform(apply_multiplier(transform(u), std::forward<Symbol>(symbol)));
}

inline Field apply_multiplier(const Field& u, std::span<const cd> symbol_values) {
    return inverse_transform(apply_multiplier(transform(u), symbol_values));
}

// i xi, with the Nyquist mode dropped so real fields have real derivatives.
inline Field derivative(const Field& u) {
    const double nyquist = u.grid.frequency(u.grid.size() / 2);
    return apply_multiplier(u, [nyquist](double xi) { return xi == nyquist ? cd{} : cd(0.0, xi); });
}

// u(. + shift), exact for band-limited fields.
inline Field translate(const Field& u, double shift) {
    return apply_multiplier(u, [shift](double xi) { return std::exp(cd(0.0, xi * shift)); });
}

inline Field free_evolution(const Field& u, double t) {
    return apply_multiplier(u, [t](double xi) { return std::exp(cd(0.0, -xi * xi * t)); });
}

// ---------------------------------------------------------------------------
// Unit-scale band projections P_k with the raised-cosine bump.

// phi(s) = cos^2(pi s / 2) on [-1, 1]; sum_k phi(s - k) = 1.
inline double bump(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    const double c = std::cos(0.5 * kPi * s);
    return c * c;
}

// Range of band centers k whose bump touches a grid frequency.
struct BandRange {
    int lo = 0;
    int hi = -1;
    int count() const { return hi - lo + 1; }
    bool contains(int k) const { return k >= lo && k <= hi; }
};

inline BandRange representable_bands(const Grid& g) {
    const double xi_lo = g.frequency(g.size() / 2);  // Nyquist, most negative
    const double xi_hi = (g.size() / 2 - 1) * g.dxi();
    return {static_cast<int>(std::floor(xi_lo)), static_cast<int>(std::ceil(xi_hi))};
}

inline Spectrum band_project(const Spectrum& s, int k) {
    if (!representable_bands(s.grid).contains(k))
        throw std::out_of_range("band_project: band " + std::to_string(k) +
                                " outside the representable range of the grid");
    return apply_multiplier(s, [k](double xi) { return bump(xi - k); });
}

inline Field band_project(const Field& u, int k) {
    return inverse_transform(band_project(transform(u), k));
}

// Frequency-band descriptor: an interval of unit bands [lo, hi] or the whole
// line. Its multiplier a0(xi) = sum_{k=lo}^{hi} phi(xi - k) equals one on
// [lo, hi] and vanishes outside (lo - 1, hi + 1).
struct Band {
    bool global = true;
    int lo = 0;
    int hi = 0;

    static Band whole() { return {}; }
    static Band interval(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("Band: empty interval");
        return {false, lo, hi};
    }
    static Band single(int k) { return interval(k, k); }

    double operator()(double xi) const {
        if (global) return 1.0;
        if (xi <= lo - 1.0 || xi >= hi + 1.0) return 0.0;
        if (xi >= lo && xi <= hi) return 1.0;
        return xi < lo ? bump(xi - lo) : bump(xi - hi);
    }

    std::string describe() const {
        return global ? std::string("global")
                      : "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    }
};

inline void require_band_on_grid(const Band& band, const Grid& g) {
    if (band.global) return;
    const BandRange r = representable_bands(g);
    if (!r.contains(band.lo) || !r.contains(band.hi))
        throw std::out_of_range("band " + band.describe() + " outside the grid's frequency range");
}

inline Field band_filter(const Field& u, const Band& band) {
    if (band.global) return u;
    require_band_on_grid(band, u.grid);
    return apply_multiplier(u, [&band](double xi) { return band(xi); });
}

// Fraction of spectral mass in the top third of the resolved frequencies.
inline double tail_fraction(const Spectrum& s) {
    const int n = s.grid.size();
    double total = 0.0, tail = 0.0;
    for (int j = 0; j < n; ++j) {
        const double w = std::norm(s[j]);
        total += w;
        if (3 * std::abs(s.grid.mode(j)) > n) tail += w;
    }
    return total > 0.0 ? tail / total : 0.0;
}

}  // namespace cubiclab
