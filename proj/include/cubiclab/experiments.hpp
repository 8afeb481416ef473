#pragma once

// Desk-scale studies: drift scaling of the raw and modified mass, the mass
// source identity, lifespans, soliton tables, windowed theorem constants,
// interaction balance sweeps and the bilinear distance sweep.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubiclab/evolve.hpp"
#include "cubiclab/fit.hpp"
#include "cubiclab/functionals.hpp"
#include "cubiclab/nonlinear.hpp"
#include "cubiclab/norms.hpp"
#include "cubiclab/symbols.hpp"

namespace cubiclab {

// ---------------------------------------------------------------------------
// Data families. Shapes have unit L2 norm; the sweep amplitude multiplies them.

enum class DataFamily { random_bands, gaussian, soliton, plane_wave };

inline const char* to_string(DataFamily f) {
    switch (f) {
        case DataFamily::random_bands: return "random-bands";
        case DataFamily::gaussian: return "gaussian";
        case DataFamily::soliton: return "soliton";
        default: return "plane-wave";
    }
}

inline DataFamily parse_data_family(const std::string& s) {
    if (s == "random-bands") return DataFamily::random_bands;
    if (s == "gaussian") return DataFamily::gaussian;
    if (s == "soliton") return DataFamily::soliton;
    if (s == "plane-wave") return DataFamily::plane_wave;
    throw std::invalid_argument("unknown data family \"" + s + "\"");
}

struct DataSpec {
    DataFamily family = DataFamily::random_bands;
    unsigned seed = 1;
    int kmax = 5;            // random-bands: modes |k| <= kmax
    double window = 0.0;     // random-bands: Gaussian window width, 0 = periodic
    double center = 0.0;     // gaussian
    double width = 2.0;      // gaussian: exp(-(x - center)^2 / (2 width^2))
    double xi = 0.0;         // gaussian, plane-wave: carrier frequency
    double lambda = 1.0;     // soliton scale
};

inline Field random_band_field(const Grid& g, int kmax, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    if (kmax >= g.size() / 2) throw std::invalid_argument("random_band_field: kmax exceeds the grid");
    // draws keyed by mode index, so the field does not depend on the point count
    Spectrum s(g);
    for (int k = -kmax; k <= kmax; ++k) {
        const double re = n(rng), im = n(rng);
        s[g.slot(k)] = cd(re, im);
    }
    return inverse_transform(s);
}

inline Field soliton_profile(const Grid& g, double lambda, double center = 0.0) {
    return Field::sample(g, [=](double x) { return lambda / std::cosh(lambda * (x - center)); });
}

// Unit-mass shape, except the soliton, which keeps its natural mass 2 lambda.
inline Field make_shape(const Grid& g, const DataSpec& d) {
    Field u;
    switch (d.family) {
        case DataFamily::random_bands: {
            u = random_band_field(g, d.kmax, d.seed);
            if (d.window > 0.0)
                for (int i = 0; i < g.size(); ++i) {
                    const double y = g.x(i) / d.window;
                    u[i] *= std::exp(-0.5 * y * y);
                }
            break;
        }
        case DataFamily::gaussian:
            u = Field::sample(g, [&](double x) {
                const double y = (x - d.center) / d.width;
                return std::exp(cd(-0.5 * y * y, d.xi * x));
            });
            break;
        case DataFamily::soliton: return soliton_profile(g, d.lambda, d.center);
        case DataFamily::plane_wave:
            u = Field::sample(g, [&](double x) { return std::exp(cd(0.0, d.xi * (x - g.x_min()))); });
            break;
    }
    const double n = l2_norm(u);
    if (!(n > 0.0)) throw std::invalid_argument("data family produced a zero field");
    return cd(1.0 / n) * u;
}

// Least-squares slope of y against t.
inline double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 2) throw std::invalid_argument("ls_slope: need matching series of length >= 2");
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) mt += t[i], my += y[i];
    mt /= static_cast<double>(t.size());
    my /= static_cast<double>(t.size());
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        a += (t[i] - mt) * (y[i] - my);
        b += (t[i] - mt) * (t[i] - mt);
    }
    return a / b;
}

// ---------------------------------------------------------------------------
// Drift scaling.

struct DriftConfig {
    std::string symbol = "sep-sech";
    int n_points = 64;
    double length = kTwoPi;
    DataSpec data{};
    std::vector<double> eps{0.2, 0.3, 0.45, 0.65, 0.8};
    double t_short = 1.0;
    int samples = 5;
    double dt = 1e-3;
    Scheme scheme = Scheme::ifrk4;
};

struct DriftRow {
    double eps = 0.0;
    double raw = 0.0;        // |least-squares slope of M(t)|
    double corrected = 0.0;  // same for M#
    double gap0 = 0.0;       // |M# - M| at t = 0
    std::string status = "ok";
};

struct DriftResult {
    std::vector<DriftRow> rows;
    std::optional<ScalingFit> raw_fit, corrected_fit;
    std::string refusal;  // non-empty when the experiment refused to run
    double correction_size = 0.0;
    LowRankInfo low_rank;
    std::string strategy;
};

inline DriftResult drift_scaling(const DriftConfig& cfg) {
    DriftResult out;
    const TrilinearSymbol sym = parse_symbol(cfg.symbol);
    const HypothesisRecord hyp = check_hypotheses(sym);
    if (hyp.h2_violation > 1e-10)
        throw std::invalid_argument("drift_scaling: symbol violates Im c(xi, xi, eta) = 0 by " +
                                    std::to_string(hyp.h2_violation));
    if (cfg.samples < 2 || !(cfg.t_short > 0.0)) throw std::invalid_argument("drift_scaling: bad sampling window");
    const Grid g(cfg.n_points, cfg.length);
    const QuarticSymbol c4 = mass_source_symbol(sym, Band::whole(), Lattice::modes(g));
    if (c4.sup_abs() <= 1e-12) {
        out.refusal = "mass exactly conserved";
        return out;
    }
    const QuarticCorrection corr = build_correction(c4, Band::whole());
    out.correction_size = corr.size_constant;
    const NonlinearityPlan plan = NonlinearityPlan::make(sym, g);
    out.low_rank = plan.low_rank();
    out.strategy = to_string(plan.strategy());
    const Field shape = make_shape(g, cfg.data);

    const long steps = static_cast<long>(std::llround(cfg.t_short / cfg.dt));
    if (steps % (cfg.samples - 1) != 0)
        throw std::invalid_argument("drift_scaling: t_short / dt must be a multiple of samples - 1");
    std::vector<double> xs, raw, cor;
    for (double eps : cfg.eps) {
        EvolveConfig ec;
        ec.dt = cfg.dt;
        ec.t_end = cfg.t_short;
        ec.scheme = cfg.scheme;
        ec.cadence = static_cast<int>(steps / (cfg.samples - 1));
        std::vector<double> t, m, ms;
        const RunResult r = run(cd(eps) * shape, ec, plan, {[&](const Snapshot& s) {
                                    const ModifiedMass mm = modified_mass(s.u, corr);
                                    t.push_back(s.time);
                                    m.push_back(mm.mass);
                                    ms.push_back(mm.mass_sharp);
                                }});
        DriftRow row;
        row.eps = eps;
        if (r.state.terminated() || static_cast<int>(t.size()) != cfg.samples) {
            row.status = std::string("excluded: ") + to_string(r.state.exit ? r.state.exit->reason : ExitReason::none);
        } else {
            row.raw = std::abs(ls_slope(t, m));
            row.corrected = std::abs(ls_slope(t, ms));
            row.gap0 = std::abs(ms.front() - m.front());
            xs.push_back(eps);
            raw.push_back(row.raw);
            cor.push_back(row.corrected);
        }
        out.rows.push_back(row);
    }
    if (xs.size() >= kMinFitPoints) {
        out.raw_fit = fit_power_law(xs, raw);
        out.corrected_fit = fit_power_law(xs, cor);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mass source identity: centered difference of M_a(t) about t = 0 against the
// quartic source functional B4(c4)(u0).

struct SourceCheckRow {
    unsigned seed = 0;
    double h = 0.0;
    double numeric = 0.0;
    double predicted = 0.0;
    double rel_error = 0.0;
};

struct SourceCheckConfig {
    std::string symbol = "sep-sech";
    int n_points = 32;
    double length = kTwoPi;
    Band band = Band::interval(1, 2);
    double amplitude = 0.5;
    int kmax = 5;
    std::vector<unsigned> seeds{1, 2, 3};
    std::vector<double> h{4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4};
    int substeps = 4;  // IFRK4 steps per +-h
};

inline std::vector<SourceCheckRow> mass_source_check(const SourceCheckConfig& cfg) {
    const TrilinearSymbol sym = parse_symbol(cfg.symbol);
    const Grid g(cfg.n_points, cfg.length);
    const QuarticSymbol c4 = mass_source_symbol(sym, cfg.band, Lattice::modes(g));
    const NonlinearityPlan plan = NonlinearityPlan::make(sym, g);
    std::vector<SourceCheckRow> rows;
    for (unsigned seed : cfg.seeds) {
        DataSpec d;
        d.seed = seed;
        d.kmax = cfg.kmax;
        const Field u0 = cd(cfg.amplitude) * make_shape(g, d);
        const double predicted = quartic_functional(u0, c4).value;
        const Spectrum s0 = transform(u0);
        for (double h : cfg.h) {
            auto mass_at = [&](double t) {
                Spectrum s = s0;
                for (int k = 0; k < cfg.substeps; ++k) s = ifrk4_step(s, t / cfg.substeps, plan);
                return band_mass(inverse_transform(s), cfg.band);
            };
            const double numeric = (mass_at(h) - mass_at(-h)) / (2.0 * h);
            rows.push_back({seed, h, numeric, predicted, std::abs(numeric - predicted) / std::abs(predicted)});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Lifespans.

struct LifespanConfig {
    std::string symbol = "gain";
    int n_points = 64;
    double length = kTwoPi;
    DataSpec data{};
    std::vector<double> eps{0.8, 0.65, 0.5};
    double cap = 200.0;
    double dt = 0.0;  // 0: default_dt of the largest datum
    double mass_growth = 2.0;
    int cadence = 10;
    double edge_width = 0.0;     // localized data: wrap monitor band width, 0 = off
    double edge_fraction = 1e-6;
};

struct LifespanRow {
    double eps = 0.0;
    double exit_time = 0.0;  // time reached
    std::string status;      // exit reason, "censored" or "invalid: wrap-around"
    double reference_8 = 0.0;  // eps^-8
    double reference_6 = 0.0;  // eps^-6
};

inline std::vector<LifespanRow> lifespan_sweep(const LifespanConfig& cfg) {
    std::vector<LifespanRow> rows;
    if (cfg.cap == 0.0) return rows;
    if (!(cfg.cap > 0.0)) throw std::invalid_argument("lifespan_sweep: cap must be >= 0");
    const TrilinearSymbol sym = parse_symbol(cfg.symbol);
    const Grid g(cfg.n_points, cfg.length);
    const NonlinearityPlan plan = NonlinearityPlan::make(sym, g);
    const Field shape = make_shape(g, cfg.data);
    const double sup_c = check_hypotheses(sym).sup_abs;
    double eps_max = 0.0;
    for (double e : cfg.eps) eps_max = std::max(eps_max, e);

    for (double eps : cfg.eps) {
        const Field u0 = cd(eps) * shape;
        EvolveConfig ec;
        ec.t_end = cfg.cap;
        ec.dt = cfg.dt > 0.0 ? cfg.dt : default_dt(cd(eps_max) * shape, sup_c);
        ec.cadence = cfg.cadence;
        ec.health.mass_growth = cfg.mass_growth;
        bool wrapped = false;
        double wrap_time = 0.0;
        std::vector<Diagnostic> diags;
        if (cfg.edge_width > 0.0)
            diags.push_back([&](const Snapshot& s) {
                if (!wrapped && edge_mass_fraction(s.u, cfg.edge_width) > cfg.edge_fraction) {
                    wrapped = true;
                    wrap_time = s.time;
                }
            });
        const RunResult r = run(u0, ec, plan, diags);
        LifespanRow row;
        row.eps = eps;
        row.reference_8 = std::pow(eps, -8.0);
        row.reference_6 = std::pow(eps, -6.0);
        if (wrapped) {
            row.exit_time = wrap_time;
            row.status = "invalid: wrap-around";
        } else if (r.state.exit) {
            row.exit_time = r.state.exit->time;
            row.status = to_string(r.state.exit->reason);
        } else {
            row.exit_time = r.state.time;
            row.status = "censored";
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Windowed theorem constants.
//   size mode (eps given):  sup ||u||_{L2} / eps, ||u||_{L6(I)} / eps^{2/3},
//                           ||d/dx|u|^2||_{L2_t H^{-1/2}} / eps^2
//   data mode (||u0||):     ||u||_{L6(I)} / (||u0|| (|I| ||u0||^4)^{1/6}),
//                           ||d/dx|u|^2||_{L2_t (H^{-1/2}-dot + c L2)} / ||u0||^2,
//                           c^2 = ||u0||^2 |I| ||u0||^4

enum class AuditNormalization { size, data };

struct WindowRow {
    TimeInterval window;
    double l2 = 0.0;
    double strichartz = 0.0;
    double bilinear = 0.0;
    double c = 0.0;  // data mode sum-space constant
};

inline std::vector<TimeInterval> windows_from(double t0, const std::vector<double>& lengths) {
    std::vector<TimeInterval> w;
    for (double l : lengths) w.push_back({t0, t0 + l});
    return w;
}

inline std::vector<WindowRow> theorem_audit(const FieldSeries& s, const std::vector<TimeInterval>& windows,
                                            AuditNormalization mode, double size) {
    if (!(size > 0.0)) throw std::invalid_argument("theorem_audit: size must be positive");
    std::vector<WindowRow> rows;
    for (const auto& I : windows) {
        const auto slice = detail::time_slice(s.time, I);
        double sup_l2 = 0.0;
        for (std::size_t i : slice.index) sup_l2 = std::max(sup_l2, l2_norm(s.fields[i]));
        WindowRow row;
        row.window = I;
        row.l2 = sup_l2 / size;
        const double l6 = spacetime_l6(s, I);
        if (mode == AuditNormalization::size) {
            row.strichartz = l6 / std::pow(size, 2.0 / 3.0);
            row.bilinear = bilinear_strichartz(s, Band::whole(), Band::whole(), 0.0, I,
                                               {-0.5, SobolevFlavor::inhomogeneous()}) / (size * size);
        } else {
            const double scale = I.length() * std::pow(size, 4);
            row.strichartz = l6 / (size * std::pow(scale, 1.0 / 6.0));
            row.c = std::sqrt(size * size * scale);
            row.bilinear = bilinear_strichartz(s, Band::whole(), Band::whole(), 0.0, I,
                                               {-0.5, SobolevFlavor::sum(row.c)}) / (size * size);
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Soliton table for the focusing cubic NLS (c = -2): u = e^{i lambda^2 t} Q_lambda.
// Integrals are taken over (0, T); the size ratios at eps = lambda^{1/2} are
// measured on the window [0, eps^{-6}], the longest interval the size bounds
// cover, so each run extends to max(T, eps^{-6}).

struct SolitonConfig {
    std::vector<double> lambda{0.25, 0.5, 1.0};
    double t_end = 10.0;
    int n_points = 1024;
    double length_scale = 40.0 * kPi;  // torus length = length_scale / lambda
    double dt = 1e-3;
    double sample_every = 0.05;
};

struct SolitonRow {
    double lambda = 0.0;
    double eps = 0.0;           // lambda^{1/2}
    double mass = 0.0;          // ||Q_lambda||^2
    double mass_ref = 0.0;      // 2 lambda
    double l6_6 = 0.0;          // ||u||_{L6((0,T) x R)}^6
    double l6_ref = 0.0;        // (16/15) T lambda^5
    double gradient_sq = 0.0;   // ||d/dx |u|^2||^2_{L2_{t,x}} over (0, T)
    double gradient_ref = 0.0;  // (16/15) T lambda^5
    double shape_error = 0.0;   // relative L2 at T after removing the phase
    double phase_error = 0.0;   // |arg| of the residual phase at T
    double window = 0.0;        // eps^{-6}
    double ratio_l2 = 0.0;          // sup ||u||_{L2} / eps
    double ratio_strichartz = 0.0;  // ||u||_{L6} / eps^{2/3}
    double ratio_bilinear = 0.0;    // ||d/dx |u|^2||_{L2_t H^{-1/2}} / eps^2
};

inline double phase_wrap(double a) { return std::remainder(a, kTwoPi); }

inline std::vector<SolitonRow> soliton_suite(const SolitonConfig& cfg) {
    std::vector<SolitonRow> rows;
    for (double lambda : cfg.lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("soliton_suite: lambda must be positive");
        const Grid g(cfg.n_points, cfg.length_scale / lambda);
        if (lambda * g.dx() > 0.2)
            throw std::invalid_argument("soliton_suite: profile under-resolved, lambda dx = " +
                                        std::to_string(lambda * g.dx()) + " > 0.2");
        const Field q = soliton_profile(g, lambda);
        const NonlinearityPlan plan = NonlinearityPlan::make(TrilinearSymbol::constant(-2.0), g);
        const double eps = std::sqrt(lambda);
        const double window = std::pow(eps, -6.0);
        const long per_sample = std::max(1L, static_cast<long>(std::llround(cfg.sample_every / cfg.dt)));
        const double h = per_sample * cfg.dt;
        auto on_cadence = [&](double t) { return std::abs(t / h - std::round(t / h)) < 1e-9; };
        if (!on_cadence(cfg.t_end) || !on_cadence(window))
            throw std::invalid_argument("soliton_suite: sample spacing must divide T and eps^{-6}");

        EvolveConfig ec;
        ec.dt = cfg.dt;
        ec.t_end = std::max(cfg.t_end, window);
        ec.cadence = static_cast<int>(per_sample);
        FieldSeries series;
        Field u_at_T;
        const RunResult r = run(q, ec, plan, {series_recorder(series), [&](const Snapshot& s) {
                                    if (std::abs(s.time - cfg.t_end) < 0.5 * cfg.dt) u_at_T = s.u;
                                }});
        if (r.state.terminated()) throw std::runtime_error("soliton_suite: run exited early");

        SolitonRow row;
        row.lambda = lambda;
        row.eps = eps;
        row.window = window;
        row.mass = l2_norm_squared(q);
        row.mass_ref = 2.0 * lambda;
        const TimeInterval I{0.0, cfg.t_end};
        row.l6_6 = std::pow(spacetime_l6(series, I), 6.0);
        row.l6_ref = 16.0 / 15.0 * cfg.t_end * std::pow(lambda, 5);
        row.gradient_sq = std::pow(bilinear_strichartz(series, Band::whole(), Band::whole(), 0.0, I), 2.0);
        row.gradient_ref = row.l6_ref;

        cd z{0.0, 0.0};
        for (std::size_t i = 0; i < q.size(); ++i) z += u_at_T[i] * q[i];
        z *= g.dx() / row.mass;
        row.shape_error = relative_l2_error(u_at_T, (z / std::abs(z)) * q);
        row.phase_error = std::abs(phase_wrap(std::arg(z) - lambda * lambda * cfg.t_end));

        const auto w = theorem_audit(series, {{0.0, window}}, AuditNormalization::size, eps);
        row.ratio_l2 = w.front().l2;
        row.ratio_strichartz = w.front().strichartz;
        row.ratio_bilinear = w.front().bilinear;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Data-normalized window study. Data, grid and times are laid out at unit
// norm and rescaled by m = ||u0||^2 (lengths / m, times / m^2), so the
// windows |I| = k ||u0||^{-4} keep their shape across norms.

struct WindowStudyConfig {
    std::string symbol = "nls-focusing";
    DataSpec data{DataFamily::random_bands, 7, 32, 2.0};
    double norm = 1.0;                         // ||u0||
    std::vector<double> multipliers{1.0, 2.0, 4.0};  // |I| / ||u0||^{-4}
    int n_points = 512;
    double length = 100.0;     // at unit norm
    double dt = 2e-3;          // at unit norm
    double sample_every = 0.02;  // at unit norm
};

struct WindowStudy {
    std::vector<WindowRow> rows;
    double mass_drift = 0.0;  // max relative mass change over the run
};

inline WindowStudy window_study(const WindowStudyConfig& cfg) {
    if (!(cfg.norm > 0.0)) throw std::invalid_argument("window_study: norm must be positive");
    const double m = cfg.norm * cfg.norm;
    const Grid g(cfg.n_points, cfg.length / m);
    DataSpec d = cfg.data;
    Field u0;
    if (d.family == DataFamily::soliton) {
        d.lambda = 0.5 * m;
        u0 = make_shape(g, d);
    } else {
        d.window /= m;
        d.width /= m;
        d.center /= m;
        d.xi *= m;
        u0 = cd(cfg.norm) * make_shape(g, d);
    }
    const NonlinearityPlan plan = NonlinearityPlan::make(parse_symbol(cfg.symbol), g);
    double longest = 0.0;
    for (double k : cfg.multipliers) longest = std::max(longest, k);
    EvolveConfig ec;
    ec.dt = cfg.dt / (m * m);
    ec.t_end = longest / (m * m);
    ec.cadence = std::max(1, static_cast<int>(std::llround(cfg.sample_every / cfg.dt)));
    ec.health.tail_fraction = 1.0;
    FieldSeries series;
    const RunResult r = run(u0, ec, plan, {series_recorder(series)});
    if (r.state.terminated()) throw std::runtime_error("window_study: run exited early");
    std::vector<double> lengths;
    for (double k : cfg.multipliers) lengths.push_back(k / (m * m));
    WindowStudy out;
    const double norm0 = l2_norm(u0);
    out.rows = theorem_audit(series, windows_from(0.0, lengths), AuditNormalization::data, norm0);
    const double m0 = l2_norm_squared(u0);
    for (const auto& f : series.fields) out.mass_drift = std::max(out.mass_drift, std::abs(l2_norm_squared(f) - m0) / m0);
    return out;
}

// ---------------------------------------------------------------------------
// Interpolation audit on an evolved run.

struct InterpolationStudyConfig {
    std::string symbol = "nls-focusing";
    DataSpec data{};
    double amplitude = 1.0;  // ignored for the soliton
    int n_points = 256;
    double length = 40.0;
    double t_end = 2.0;
    double dt = 1e-3;
    double sample_every = 0.02;
    std::vector<Band> bands{Band::whole()};
};

inline InterpolationReport interpolation_study(const InterpolationStudyConfig& cfg) {
    const Grid g(cfg.n_points, cfg.length);
    Field u0 = make_shape(g, cfg.data);
    if (cfg.data.family != DataFamily::soliton) u0 = cd(cfg.amplitude) * u0;
    const NonlinearityPlan plan = NonlinearityPlan::make(parse_symbol(cfg.symbol), g);
    EvolveConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.cadence = std::max(1, static_cast<int>(std::llround(cfg.sample_every / cfg.dt)));
    ec.health.tail_fraction = 1.0;
    FieldSeries series;
    const RunResult r = run(u0, ec, plan, {series_recorder(series)});
    if (r.state.terminated()) throw std::runtime_error("interpolation_study: run exited early");
    return interpolation_audit(series, cfg.bands);
}

// ---------------------------------------------------------------------------
// Interaction balance sweeps.

struct MorawetzConfig {
    std::string symbol = "nls-focusing";
    int n_points = 512;
    double length = 80.0;
    DataSpec data{DataFamily::gaussian, 1, 5, 0.0, 0.0, 2.0, 0.5, 1.0};
    InteractionOptions options{Band::interval(-2, 0), Band::interval(-1, 1), 0.3, 1};
    double x0 = 1.5;
    std::vector<double> eps{0.2, 0.3, 0.45, 0.65, 0.8};
    double t_end = 1.0;
    double cadence = 0.02;  // sample spacing h
    int substeps = 10;      // time steps per sample
};

struct MorawetzRow {
    double eps = 0.0;  // or the sample spacing for the free-flow order study
    MorawetzReport report;
};

struct MorawetzSweep {
    std::vector<MorawetzRow> rows;
    std::optional<ScalingFit> fit;  // remainder L1 vs eps (or sup vs h)
};

inline MorawetzReport morawetz_run(const Field& u0, const NonlinearityPlan& plan, const MorawetzConfig& cfg,
                                   double h) {
    EvolveConfig ec;
    ec.dt = h / cfg.substeps;
    ec.t_end = cfg.t_end;
    ec.cadence = cfg.substeps;
    ec.health.tail_fraction = 1.0;
    std::vector<double> I, J;
    const RunResult r = run(u0, ec, plan, {[&](const Snapshot& s) {
                                I.push_back(interaction_functional(s.u, cfg.x0, cfg.options));
                                J.push_back(j4(s.u, cfg.x0, cfg.options));
                            }});
    if (r.state.terminated()) throw std::runtime_error("morawetz_run: run exited early");
    MorawetzReport rep = morawetz_balance(I, J, 0.0, h);
    rep.band_a = cfg.options.band_a.describe();
    rep.band_b = cfg.options.band_b.describe();
    rep.xi0 = cfg.options.xi0;
    rep.x0 = cfg.x0;
    return rep;
}

inline MorawetzSweep morawetz_sweep(const MorawetzConfig& cfg) {
    const Grid g(cfg.n_points, cfg.length);
    const NonlinearityPlan plan = NonlinearityPlan::make(parse_symbol(cfg.symbol), g);
    const Field shape = make_shape(g, cfg.data);
    MorawetzSweep out;
    std::vector<double> xs, ys;
    for (double eps : cfg.eps) {
        MorawetzRow row{eps, morawetz_run(cd(eps) * shape, plan, cfg, cfg.cadence)};
        xs.push_back(eps);
        ys.push_back(row.report.remainder_l1);
        out.rows.push_back(std::move(row));
    }
    if (xs.size() >= kMinFitPoints) out.fit = fit_power_law(xs, ys);
    return out;
}

// Free flow (exact evolution): the remainder is the centered-difference error,
// fitted against the sample spacing.
inline MorawetzSweep morawetz_free_order(const MorawetzConfig& cfg, double amplitude,
                                         const std::vector<double>& spacings) {
    const Grid g(cfg.n_points, cfg.length);
    const Field u0 = cd(amplitude) * make_shape(g, cfg.data);
    MorawetzSweep out;
    std::vector<double> xs, ys;
    for (double h : spacings) {
        const int n = static_cast<int>(std::llround(cfg.t_end / h));
        std::vector<double> I, J;
        for (int i = 0; i <= n; ++i) {
            const Field u = free_evolution(u0, i * h);
            I.push_back(interaction_functional(u, cfg.x0, cfg.options));
            J.push_back(j4(u, cfg.x0, cfg.options));
        }
        MorawetzRow row{h, morawetz_balance(I, J, 0.0, h)};
        xs.push_back(h);
        ys.push_back(row.report.remainder_sup);
        out.rows.push_back(std::move(row));
    }
    if (xs.size() >= kMinFitPoints) out.fit = fit_power_law(xs, ys);
    return out;
}

// ---------------------------------------------------------------------------
// Bilinear distance sweep: two unit-mass Gaussian packets at frequencies
// +-d/2 start at -+x_sep and cross once under the free flow on [0, 2 x_sep / d].

struct DistanceConfig {
    std::vector<int> distances{2, 4, 8, 16, 32};
    int n_points = 2048;
    double length = 160.0;
    double width = 4.0;  // exp(-x^2 / (2 width^2))
    double x_sep = 30.0;
    int samples = 201;
};

struct DistanceRow {
    int distance = 0;
    double value = 0.0;
    double normalized = 0.0;  // value / d^{1/2}
};

struct DistanceSweep {
    std::vector<DistanceRow> rows;
    std::optional<ScalingFit> fit;
};

inline DistanceSweep bilinear_distance_sweep(const DistanceConfig& cfg) {
    const Grid g(cfg.n_points, cfg.length);
    DistanceSweep out;
    std::vector<double> xs, ys;
    for (int d : cfg.distances) {
        if (d <= 0 || d % 2 != 0) throw std::invalid_argument("bilinear_distance_sweep: distances must be even and positive");
        const int ka = d / 2, kb = -d / 2;
        if (!representable_bands(g).contains(ka + 1)) throw std::invalid_argument("bilinear_distance_sweep: grid too coarse");
        DataSpec a{DataFamily::gaussian, 1, 0, 0.0, -cfg.x_sep, cfg.width, static_cast<double>(ka), 1.0};
        DataSpec b{DataFamily::gaussian, 1, 0, 0.0, cfg.x_sep, cfg.width, static_cast<double>(kb), 1.0};
        const Field u0 = make_shape(g, a) + make_shape(g, b);
        const double T = 2.0 * cfg.x_sep / d;
        FieldSeries s;
        for (int i = 0; i < cfg.samples; ++i) {
            const double t = T * i / (cfg.samples - 1);
            s.push(t, free_evolution(u0, t));
        }
        DistanceRow row;
        row.distance = d;
        row.value = bilinear_strichartz(s, Band::single(ka), Band::single(kb), 0.0, {0.0, T});
        row.normalized = row.value / std::sqrt(static_cast<double>(d));
        xs.push_back(d);
        ys.push_back(row.value);
        out.rows.push_back(row);
    }
    if (xs.size() >= kMinFitPoints) out.fit = fit_power_law(xs, ys);
    return out;
}

// ---------------------------------------------------------------------------
// Single run with the functional series (M, M#, I_AB, J4, dI/dt - J4).

struct RunConfig {
    std::string symbol = "nls-focusing";
    int n_points = 128;
    double length = 40.0;
    Scheme scheme = Scheme::ifrk4;
    double dt = 1e-3;
    double t_end = 2.0;
    int cadence = 20;
    double amplitude = 0.5;
    DataSpec data{DataFamily::gaussian, 1, 5, 0.0, 0.0, 2.0, 0.5, 1.0};
    HealthThresholds health;
    InteractionOptions options{Band::interval(-2, 0), Band::interval(-1, 1), 0.3, 1};
    double x0 = 1.5;
    bool corrected_mass = true;
};

inline constexpr int kMaxCorrectedPoints = 128;

struct FunctionalRow {
    double time = 0.0;
    double mass = 0.0;
    double mass_sharp = 0.0;  // nan when the correction is off
    double interaction = 0.0;
    double j4 = 0.0;
    double remainder = 0.0;   // nan at the first and last sample
};

struct FunctionalRun {
    std::vector<FunctionalRow> rows;
    std::string exit_reason = "none";
    double final_time = 0.0;
    std::string strategy;
    double mass_drift = 0.0;  // max |M(t) - M(0)| / M(0)
    std::optional<MorawetzReport> balance;
};

inline FunctionalRun run_functionals(const RunConfig& cfg) {
    const TrilinearSymbol sym = parse_symbol(cfg.symbol);
    const Grid g(cfg.n_points, cfg.length);
    std::optional<QuarticCorrection> corr;
    if (cfg.corrected_mass) {
        if (cfg.n_points > kMaxCorrectedPoints)
            throw std::invalid_argument("run_functionals: corrected mass needs n_points <= " +
                                        std::to_string(kMaxCorrectedPoints));
        corr = build_correction(mass_source_symbol(sym, Band::whole(), Lattice::modes(g)), Band::whole());
    }
    const NonlinearityPlan plan = NonlinearityPlan::make(sym, g);
    EvolveConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.scheme = cfg.scheme;
    ec.cadence = cfg.cadence;
    ec.health = cfg.health;
    ec.validate();

    FunctionalRun out;
    out.strategy = to_string(plan.strategy());
    std::vector<double> I, J;
    const RunResult r = run(cd(cfg.amplitude) * make_shape(g, cfg.data), ec, plan, {[&](const Snapshot& s) {
                                FunctionalRow row;
                                row.time = s.time;
                                if (corr) {
                                    const ModifiedMass mm = modified_mass(s.u, *corr);
                                    row.mass = mm.mass;
                                    row.mass_sharp = mm.mass_sharp;
                                } else {
                                    row.mass = l2_norm_squared(s.u);
                                    row.mass_sharp = std::numeric_limits<double>::quiet_NaN();
                                }
                                row.interaction = interaction_functional(s.u, cfg.x0, cfg.options);
                                row.j4 = j4(s.u, cfg.x0, cfg.options);
                                row.remainder = std::numeric_limits<double>::quiet_NaN();
                                I.push_back(row.interaction);
                                J.push_back(row.j4);
                                out.rows.push_back(row);
                            }});
    out.final_time = r.state.time;
    if (r.state.exit) out.exit_reason = to_string(r.state.exit->reason);
    if (I.size() >= 3) {
        const double h = out.rows[1].time - out.rows[0].time;
        MorawetzReport rep = morawetz_balance(I, J, out.rows.front().time, h);
        for (std::size_t i = 0; i < rep.remainder.size(); ++i) out.rows[i + 1].remainder = rep.remainder[i];
        rep.band_a = cfg.options.band_a.describe();
        rep.band_b = cfg.options.band_b.describe();
        rep.xi0 = cfg.options.xi0;
        rep.x0 = cfg.x0;
        out.balance = std::move(rep);
    }
    if (!out.rows.empty()) {
        const double m0 = out.rows.front().mass;
        for (const auto& row : out.rows) out.mass_drift = std::max(out.mass_drift, std::abs(row.mass - m0) / m0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Envelope of the initial band masses and the bootstrap audit along a run.

struct BootstrapConfig {
    std::string symbol = "nls-focusing";
    int n_points = 128;
    double length = kTwoPi;
    DataSpec data{};
    double eps = 0.3;
    double t_end = 2.0;
    double dt = 1e-3;
    double sample_every = 0.01;
    double delta = kEnvelopeDelta;
    double max_constant = kEnvelopeMaxConstant;
    double x0 = 0.0;
    std::vector<std::pair<int, int>> pairs{{-2, 2}, {1, 3}, {-4, 4}};
};

struct BootstrapStudy {
    int band_lo = 0;
    RVec band_data;  // ||P_k u0||
    Envelope envelope;
    AuditTable table;
};

inline BootstrapStudy bootstrap_study(const BootstrapConfig& cfg) {
    const Grid g(cfg.n_points, cfg.length);
    const Field u0 = cd(cfg.eps) * make_shape(g, cfg.data);
    BootstrapStudy out;
    out.band_data = band_norms(u0, out.band_lo);
    const int hi = out.band_lo + static_cast<int>(out.band_data.size()) - 1;
    out.envelope = build_envelope(out.band_data, out.band_lo, cfg.eps, cfg.delta, out.band_lo, hi, cfg.max_constant);

    const NonlinearityPlan plan = NonlinearityPlan::make(parse_symbol(cfg.symbol), g);
    EvolveConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.cadence = std::max(1, static_cast<int>(std::llround(cfg.sample_every / cfg.dt)));
    ec.health.tail_fraction = 1.0;
    FieldSeries series;
    const RunResult r = run(u0, ec, plan, {series_recorder(series)});
    if (r.state.terminated()) throw std::runtime_error("bootstrap_study: run exited early");
    AuditOptions o;
    o.pairs = cfg.pairs;
    o.x0 = cfg.x0;
    out.table = audit_bootstrap(series, out.envelope, cfg.eps, o);
    return out;
}

}  // namespace cubiclab
