#pragma once

// Four-wave resonance geometry, trilinear nonlinearity symbols, the quartic
// mass-source symbol and the quartic mass correction.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubiclab/expression.hpp"
#include "cubiclab/spectral.hpp"

namespace cubiclab {

// ---------------------------------------------------------------------------
// Resonance geometry.

struct FreqQuadruple {
    double xi1 = 0.0, xi2 = 0.0, xi3 = 0.0, xi4 = 0.0;
};

struct ResonanceData {
    double d4 = 0.0;          // xi1 - xi2 + xi3 - xi4
    double d4sq = 0.0;        // xi1^2 - xi2^2 + xi3^2 - xi4^2
    double d4sq_tilde = 0.0;  // d4sq - 2 xi_avg d4, Galilean invariant
    double hi = 0.0;
    double med = 0.0;
};

inline ResonanceData resonance_data(const FreqQuadruple& q) {
    ResonanceData r;
    r.d4 = q.xi1 - q.xi2 + q.xi3 - q.xi4;
    r.d4sq = q.xi1 * q.xi1 - q.xi2 * q.xi2 + q.xi3 * q.xi3 - q.xi4 * q.xi4;
    const double avg = 0.25 * (q.xi1 + q.xi2 + q.xi3 + q.xi4);
    r.d4sq_tilde = r.d4sq - 2.0 * avg * r.d4;
    const double pair_a = std::abs(q.xi1 - q.xi2) + std::abs(q.xi3 - q.xi4);
    const double pair_b = std::abs(q.xi1 - q.xi4) + std::abs(q.xi3 - q.xi2);
    r.hi = std::max(pair_a, pair_b);
    r.med = std::min(pair_a, pair_b);
    return r;
}

// Unordered pair equality {xi1, xi3} = {xi2, xi4}.
inline bool is_resonant(const FreqQuadruple& q, double tol = 0.0) {
    return resonance_data(q).med <= tol;
}

// Thresholds for the three overlapping division regions. The first region is
// {med <= inner}, the second {med >= ratio (1 + |d4|)}, the third the rest;
// transitions are C^1 sin^2 ramps of width `ramp`.
struct RegionThresholds {
    double inner = 4.0;
    double ratio = 2.0;
    double ramp = 2.0;
};

struct RegionWeights {
    double chi1 = 1.0, chi2 = 0.0, chi3 = 0.0;
};

// 0 for s <= 0, 1 for s >= 1, sin^2(pi s / 2) in between.
inline double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double v = std::sin(0.5 * kPi * s);
    return v * v;
}

inline RegionWeights region_weights(const FreqQuadruple& q, const RegionThresholds& t = {}) {
    const ResonanceData r = resonance_data(q);
    const double far = smooth_step((r.med - t.inner) / t.ramp);
    const double elliptic = smooth_step((r.med - t.ratio * (1.0 + std::abs(r.d4))) / t.ramp);
    RegionWeights w;
    w.chi1 = 1.0 - far;
    w.chi2 = far * elliptic;
    w.chi3 = 1.0 - w.chi1 - w.chi2;
    if (w.chi3 < 0.0) w.chi3 = 0.0;
    return w;
}

// ---------------------------------------------------------------------------
// Trilinear symbols c(xi1, xi2, xi3).

enum class SymbolStructure { constant, separable, black_box };

// One separable term coef * alpha(xi1) * conj(beta(xi2)) * gamma(xi3); it is
// realized by the product (A u) * conj(B u) * (G u) of multipliers.
struct FactorTriple {
    cd coef{1.0, 0.0};
    std::function<cd(double)> alpha, beta, gamma;
    std::string description;
};

class TrilinearSymbol {
public:
    using Evaluator = std::function<cd(double, double, double)>;

    static TrilinearSymbol constant(cd mu, std::string name = {}) {
        TrilinearSymbol s;
        s.structure_ = SymbolStructure::constant;
        s.mu_ = mu;
        s.name_ = name.empty() ? "const:" + format_complex(mu) : std::move(name);
        return s;
    }

    static TrilinearSymbol separable(cd mu, std::vector<FactorTriple> terms, std::string name = {}) {
        if (terms.empty()) return constant(mu, std::move(name));
        TrilinearSymbol s;
        s.structure_ = SymbolStructure::separable;
        s.mu_ = mu;
        s.terms_ = std::move(terms);
        s.name_ = name.empty() ? "separable" : std::move(name);
        return s;
    }

    static TrilinearSymbol black_box(Evaluator fn, std::string name) {
        TrilinearSymbol s;
        s.structure_ = SymbolStructure::black_box;
        s.black_box_ = std::move(fn);
        s.name_ = std::move(name);
        return s;
    }

    cd operator()(double xi1, double xi2, double xi3) const {
        switch (structure_) {
            case SymbolStructure::constant: return mu_;
            case SymbolStructure::separable: {
                cd acc = mu_;
                for (const auto& t : terms_)
                    acc += t.coef * t.alpha(xi1) * std::conj(t.beta(xi2)) * t.gamma(xi3);
                return acc;
            }
            case SymbolStructure::black_box: return black_box_(xi1, xi2, xi3);
        }
        return {};
    }

    SymbolStructure structure() const { return structure_; }
    bool is_constant() const { return structure_ == SymbolStructure::constant; }
    cd constant_part() const { return mu_; }
    const std::vector<FactorTriple>& terms() const { return terms_; }
    const std::string& name() const { return name_; }

    static std::string format_complex(cd z) {
        std::ostringstream os;
        os.precision(17);
        os << z.real();
        if (z.imag() != 0.0) os << (z.imag() < 0 ? "" : "+") << z.imag() << "*i";
        return os.str();
    }

private:
    SymbolStructure structure_ = SymbolStructure::constant;
    cd mu_{0.0, 0.0};
    std::vector<FactorTriple> terms_;
    Evaluator black_box_;
    std::string name_ = "const:0";
};

// Parses the symbol library syntax:
//   const:<expr>                          constant symbol (may be complex)
//   separable:<mu>[;<coef>|<f1>|<f2>|<f3>]... f's are expressions in x,
//                                         c = mu + sum coef f1(xi1) conj(f2(xi2)) f3(xi3)
//   expr:<expression in x1,x2,x3>         black-box symbol
// and the named built-ins listed in named_symbols().
inline TrilinearSymbol parse_symbol(const std::string& spec);

inline std::vector<std::pair<std::string, std::string>> named_symbols() {
    return {
        {"nls-focusing", "const:-2"},
        {"nls-defocusing", "const:2"},
        {"sep-sech", "separable:-1;-0.5|sech(x/4)|1|sech(x/4)"},
        {"sep-sech-defocusing", "separable:1;0.5|sech(x/4)|1|sech(x/4)"},
        {"sech-diff", "expr:-1-0.5*sech(x1-x2)*sech(x3-x2)"},
        {"gain", "const:-1+0.3*i"},
    };
}

inline TrilinearSymbol parse_symbol(const std::string& spec) {
    for (const auto& [name, expansion] : named_symbols())
        if (spec == name) return parse_symbol(expansion);

    auto starts = [&](const char* p) { return spec.rfind(p, 0) == 0; };
    if (starts("const:")) {
        const std::string body = spec.substr(6);
        const cd mu = Expression::parse(body, {})(std::vector<cd>{});
        return TrilinearSymbol::constant(mu, spec);
    }
    if (starts("expr:")) {
        auto e = std::make_shared<Expression>(Expression::parse(spec.substr(5), {"x1", "x2", "x3"}));
        return TrilinearSymbol::black_box(
            [e](double a, double b, double c) { return (*e)(a, b, c); }, spec);
    }
    if (starts("separable:")) {
        std::vector<std::string> parts;
        std::stringstream ss(spec.substr(10));
        std::string item;
        while (std::getline(ss, item, ';')) parts.push_back(item);
        if (parts.empty()) throw ExpressionError("separable symbol needs a constant part");
        const cd mu = Expression::parse(parts[0], {})(std::vector<cd>{});
        std::vector<FactorTriple> terms;
        for (std::size_t k = 1; k < parts.size(); ++k) {
            std::vector<std::string> f;
            std::stringstream fs(parts[k]);
            while (std::getline(fs, item, '|')) f.push_back(item);
            if (f.size() != 4)
                throw ExpressionError("separable term must read coef|f1|f2|f3: \"" + parts[k] + "\"");
            FactorTriple t;
            t.coef = Expression::parse(f[0], {})(std::vector<cd>{});
            auto mk = [](const std::string& src) {
                auto e = std::make_shared<Expression>(Expression::parse(src, {"x"}));
                return std::function<cd(double)>([e](double x) { return (*e)(x); });
            };
            t.alpha = mk(f[1]);
            t.beta = mk(f[2]);
            t.gamma = mk(f[3]);
            t.description = parts[k];
            terms.push_back(std::move(t));
        }
        return TrilinearSymbol::separable(mu, std::move(terms), spec);
    }
    throw ExpressionError("unknown symbol specification \"" + spec + "\"");
}

// ---------------------------------------------------------------------------
// Hypothesis checks on a sample grid.

struct SampleSpec {
    double xi_max = 8.0;
    int points = 33;  // per axis, uniformly spaced in [-xi_max, xi_max]
    double fd_step = 1e-3;
};

enum class SignClass { focusing, defocusing, indefinite };

inline const char* to_string(SignClass c) {
    switch (c) {
        case SignClass::focusing: return "focusing";
        case SignClass::defocusing: return "defocusing";
        default: return "indefinite";
    }
}

struct HypothesisRecord {
    double sup_abs = 0.0;          // H1: sup |c|
    double sup_first_diff = 0.0;   // H1: sup of first-difference quotients
    double h2_violation = 0.0;     // sup |Im c(xi, xi, eta)|
    double diag_min = 0.0;         // min Re c(xi, xi, xi)
    double diag_max = 0.0;
    double diag_imag_max = 0.0;
    double symmetry_defect = 0.0;  // sup |c(x1,x2,x3) - c(x3,x2,x1)|
    SignClass sign = SignClass::indefinite;
};

inline HypothesisRecord check_hypotheses(const TrilinearSymbol& c, const SampleSpec& spec = {}) {
    if (spec.points < 2) throw std::invalid_argument("check_hypotheses: need >= 2 sample points");
    std::vector<double> xs(spec.points);
    for (int i = 0; i < spec.points; ++i)
        xs[i] = -spec.xi_max + 2.0 * spec.xi_max * i / (spec.points - 1);

    HypothesisRecord r;
    r.diag_min = std::numeric_limits<double>::infinity();
    r.diag_max = -std::numeric_limits<double>::infinity();
    const double h = spec.fd_step;
    for (double a : xs) {
        for (double b : xs) {
            r.h2_violation = std::max(r.h2_violation, std::abs(c(a, a, b).imag()));
            for (double d : xs) {
                const cd v = c(a, b, d);
                r.sup_abs = std::max(r.sup_abs, std::abs(v));
                r.symmetry_defect = std::max(r.symmetry_defect, std::abs(v - c(d, b, a)));
                const double fd = std::max({std::abs(c(a + h, b, d) - v), std::abs(c(a, b + h, d) - v),
                                            std::abs(c(a, b, d + h) - v)}) / h;
                r.sup_first_diff = std::max(r.sup_first_diff, fd);
            }
        }
        const cd diag = c(a, a, a);
        r.diag_min = std::min(r.diag_min, diag.real());
        r.diag_max = std::max(r.diag_max, diag.real());
        r.diag_imag_max = std::max(r.diag_imag_max, std::abs(diag.imag()));
    }
    if (r.diag_max < 0.0) r.sign = SignClass::focusing;
    else if (r.diag_min > 0.0) r.sign = SignClass::defocusing;
    else r.sign = SignClass::indefinite;
    return r;
}

// ---------------------------------------------------------------------------
// Quadrilinear symbols on a lattice slice {k1 - k2 + k3 - k4 = 0}.

// Frequencies k * spacing for integer k in [k_min, k_max].
struct Lattice {
    int k_min = 0;
    int k_max = -1;
    double spacing = 1.0;

    int size() const { return k_max - k_min + 1; }
    bool contains(int k) const { return k >= k_min && k <= k_max; }
    double frequency(int k) const { return k * spacing; }

    // The lattice of all grid modes.
    static Lattice modes(const Grid& g) { return {-g.size() / 2, g.size() / 2 - 1, g.dxi()}; }
    // Grid modes with |xi| <= xi_cut.
    static Lattice modes(const Grid& g, double xi_cut) {
        const int m = std::min(g.size() / 2 - 1, static_cast<int>(std::floor(xi_cut / g.dxi() + 1e-9)));
        return {-m, m, g.dxi()};
    }
    static Lattice unit_bands(int k_min, int k_max) { return {k_min, k_max, 1.0}; }
};

class QuarticSymbol {
public:
    QuarticSymbol() = default;
    explicit QuarticSymbol(const Lattice& lat)
        : lattice_(lat),
          values_(static_cast<std::size_t>(lat.size()) * lat.size() * lat.size(), cd{0.0, 0.0}) {
        if (lat.size() <= 0) throw std::invalid_argument("QuarticSymbol: empty lattice");
    }

    const Lattice& lattice() const { return lattice_; }

    bool on_slice(int k1, int k2, int k3) const {
        return lattice_.contains(k1) && lattice_.contains(k2) && lattice_.contains(k3) &&
               lattice_.contains(k1 - k2 + k3);
    }

    cd& at(int k1, int k2, int k3) { return values_[index(k1, k2, k3)]; }
    cd at(int k1, int k2, int k3) const { return values_[index(k1, k2, k3)]; }
    // Value at (k1, k2, k3, k4) with k4 implied; zero off the lattice.
    cd value(int k1, int k2, int k3) const {
        return on_slice(k1, k2, k3) ? values_[index(k1, k2, k3)] : cd{0.0, 0.0};
    }

    template <class F>
    void for_each_slice_point(F&& f) const {
        for (int k1 = lattice_.k_min; k1 <= lattice_.k_max; ++k1)
            for (int k2 = lattice_.k_min; k2 <= lattice_.k_max; ++k2)
                for (int k3 = lattice_.k_min; k3 <= lattice_.k_max; ++k3) {
                    const int k4 = k1 - k2 + k3;
                    if (lattice_.contains(k4)) f(k1, k2, k3, k4);
                }
    }

    template <class F>
    void fill(F&& f) {
        for_each_slice_point([&](int k1, int k2, int k3, int k4) { at(k1, k2, k3) = f(k1, k2, k3, k4); });
    }

    double sup_abs() const {
        double m = 0.0;
        for_each_slice_point([&](int a, int b, int c, int) { m = std::max(m, std::abs(at(a, b, c))); });
        return m;
    }

    // sup |S(k) - conj S(k2, k1, k4, k3)|: zero when the quartic form is real.
    double hermitian_defect() const {
        double m = 0.0;
        for_each_slice_point([&](int a, int b, int c, int d) {
            m = std::max(m, std::abs(at(a, b, c) - std::conj(at(b, a, d))));
        });
        return m;
    }

    FreqQuadruple quadruple(int k1, int k2, int k3, int k4) const {
        return {lattice_.frequency(k1), lattice_.frequency(k2), lattice_.frequency(k3),
                lattice_.frequency(k4)};
    }

private:
    std::size_t index(int k1, int k2, int k3) const {
        const std::size_t n = lattice_.size();
        return (static_cast<std::size_t>(k1 - lattice_.k_min) * n + (k2 - lattice_.k_min)) * n +
               (k3 - lattice_.k_min);
    }

    Lattice lattice_;
    CVec values_;
};

// Symbol c4 of the quartic source in  d/dt int M_a(u) dx = B4(c4)(u), i.e.
//   d/dt ||a0(D) u||^2 = nu4 * sum_{d4 = 0} c4 u^1 conj(u^2) u^3 conj(u^4)
// for solutions of i u_t + u_xx = C(u, conj u, u), with nu4 = dxi^3 / (2 pi).
// Raw form: -i [a0(xi4)^2 c(xi1,xi2,xi3) - a0(xi3)^2 conj c(xi2,xi1,xi4)],
// then fully symmetrized over (1 <-> 3) and (2 <-> 4).
inline QuarticSymbol mass_source_symbol(const TrilinearSymbol& c, const Band& band,
                                        const Lattice& lattice) {
    if (!band.global) {
        const double lo = lattice.frequency(lattice.k_min) - 1.0;
        const double hi = lattice.frequency(lattice.k_max) + 1.0;
        if (band.lo < lo || band.hi > hi)
            throw std::out_of_range("mass_source_symbol: band " + band.describe() +
                                    " outside the lattice range");
    }
    const cd minus_i(0.0, -1.0);
    auto raw = [&](double x1, double x2, double x3, double x4) {
        const double a3 = band(x3), a4 = band(x4);
        return minus_i * (a4 * a4 * c(x1, x2, x3) - a3 * a3 * std::conj(c(x2, x1, x4)));
    };
    QuarticSymbol s(lattice);
    s.fill([&](int k1, int k2, int k3, int k4) {
        const double x1 = lattice.frequency(k1), x2 = lattice.frequency(k2);
        const double x3 = lattice.frequency(k3), x4 = lattice.frequency(k4);
        return 0.25 * (raw(x1, x2, x3, x4) + raw(x3, x2, x1, x4) + raw(x1, x4, x3, x2) +
                       raw(x3, x4, x1, x2));
    });
    return s;
}

struct QuarticCorrection {
    Band band;
    QuarticSymbol b4;
    double resonance_guard = 0.0;  // |d4sq| below this counts as exact resonance
    double size_constant = 0.0;    // sup |b4| <hi> <med> over the stored lattice
};

inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

class ConservationViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solves c4 - i d4sq b4 = 0 on the slice d4 = 0, i.e. b4 = -i c4 / d4sq, so
// that the quartic part of d/dt (M_a + B4(b4)) vanishes under the linear flow
// u^_t = -i xi^2 u^. Exact resonances get b4 = 0 and must carry c4 = 0.
inline QuarticCorrection build_correction(const QuarticSymbol& c4, const Band& band,
                                          double c4_tolerance = 1e-10) {
    const Lattice& lat = c4.lattice();
    QuarticCorrection out{band, QuarticSymbol(lat), 0.5 * lat.spacing * lat.spacing, 0.0};
    const double scale = std::max(1.0, c4.sup_abs());
    c4.for_each_slice_point([&](int k1, int k2, int k3, int k4) {
        const FreqQuadruple q = c4.quadruple(k1, k2, k3, k4);
        const ResonanceData r = resonance_data(q);
        const cd v = c4.at(k1, k2, k3);
        if (std::abs(r.d4sq) < out.resonance_guard) {
            if (std::abs(v) > c4_tolerance * scale) {
                std::ostringstream os;
                os << "build_correction: nonzero quartic source " << std::abs(v)
                   << " at resonant lattice point (" << k1 << "," << k2 << "," << k3 << "," << k4
                   << "); the symbol violates the conservative hypothesis Im c(xi,xi,eta) = 0";
                throw ConservationViolation(os.str());
            }
            return;
        }
        const cd b = cd(0.0, -1.0) * v / r.d4sq;
        out.b4.at(k1, k2, k3) = b;
        out.size_constant = std::max(out.size_constant, std::abs(b) * japanese(r.hi) * japanese(r.med));
    });
    return out;
}

}  // namespace cubiclab
