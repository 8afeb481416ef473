#pragma once

// Time integration of i u_t + u_xx = C(u, conj u, u) with exact linear
// propagation, health monitoring and checkpoints.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubiclab/nonlinear.hpp"
#include "cubiclab/spectral.hpp"

namespace cubiclab {

enum class Scheme { strang, ifrk4 };

inline const char* to_string(Scheme s) { return s == Scheme::strang ? "strang" : "ifrk4"; }

inline Scheme parse_scheme(const std::string& s) {
    if (s == "strang") return Scheme::strang;
    if (s == "ifrk4" || s == "integrating-factor-rk4") return Scheme::ifrk4;
    throw std::invalid_argument("unknown scheme \"" + s + "\"");
}

struct HealthThresholds {
    double amplitude_cap = 1e3;
    double tail_fraction = 1e-6;
    double mass_growth = 2.0;  // exit once mass > mass_growth * initial mass
};

struct EvolveConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::ifrk4;
    int cadence = 1;
    HealthThresholds health;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be nonnegative");
        if (t_end > 0.0 && dt > t_end) throw std::invalid_argument("dt must not exceed t_end");
        if (cadence < 1) throw std::invalid_argument("cadence must be >= 1");
    }

    // Number of steps; dt is shrunk so that steps * dt == t_end.
    long steps() const { return t_end == 0.0 ? 0 : static_cast<long>(std::ceil(t_end / dt - 1e-9)); }
    double effective_dt() const { return t_end == 0.0 ? dt : t_end / static_cast<double>(steps()); }
};

enum class ExitReason { none, numerical_blowup, mass_growth, amplitude_cap, tail_fraction };

inline const char* to_string(ExitReason r) {
    switch (r) {
        case ExitReason::none: return "completed";
        case ExitReason::numerical_blowup: return "numerical blow-up";
        case ExitReason::mass_growth: return "mass growth";
        case ExitReason::amplitude_cap: return "amplitude cap";
        default: return "spectral tail";
    }
}

struct HealthFlags {
    bool non_finite = false;
    bool mass = false;
    bool amplitude = false;
    bool tail = false;

    bool any() const { return non_finite || mass || amplitude || tail; }
};

struct ExitRecord {
    ExitReason reason = ExitReason::none;
    double time = 0.0;
};

struct RunState {
    double time = 0.0;
    long step = 0;
    double dt = 0.0;  // step size used to advance `step`; time = step * dt
    Field u;
    HealthFlags flags;
    std::optional<ExitRecord> exit;
    double initial_mass = 0.0;

    static RunState initial(const Field& u0) {
        RunState s;
        s.u = u0;
        s.initial_mass = l2_norm_squared(u0);
        return s;
    }
    bool terminated() const { return exit.has_value(); }
};

struct HealthSample {
    double time = 0.0;
    double mass = 0.0;
    double max_amplitude = 0.0;
    double tail = 0.0;
};

struct Snapshot {
    double time;
    long step;
    const Field& u;
    const HealthSample& health;
};

using Diagnostic = std::function<void(const Snapshot&)>;

struct RunResult {
    RunState state;
    std::vector<HealthSample> health;
};

namespace detail {

inline CVec linear_phase(const Grid& g, double h) {
    return multiplier_table(g, [h](double xi) { return std::exp(cd(0.0, -xi * xi * h)); });
}

inline Spectrum rhs(const NonlinearityPlan& plan, const Spectrum& v) {
    Spectrum n = plan.apply(v);
    for (auto& c : n.coeffs) c *= cd(0.0, -1.0);
    return n;
}

inline void axpy(Spectrum& y, cd a, const Spectrum& x) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
}

inline Spectrum times(const CVec& m, const Spectrum& s) { return apply_multiplier(s, m); }

}  // namespace detail

// Lawson integrating-factor RK4 on w = e^{i xi^2 t} u^; h may be negative.
inline Spectrum ifrk4_step(const Spectrum& u, double h, const NonlinearityPlan& plan) {
    const CVec e_half = detail::linear_phase(u.grid, 0.5 * h);
    const CVec e_full = detail::linear_phase(u.grid, h);

    const Spectrum k1 = detail::rhs(plan, u);
    Spectrum a = u;
    detail::axpy(a, 0.5 * h, k1);
    const Spectrum k2 = detail::rhs(plan, detail::times(e_half, a));
    Spectrum b = detail::times(e_half, u);
    detail::axpy(b, 0.5 * h, k2);
    const Spectrum k3 = detail::rhs(plan, b);
    Spectrum c = detail::times(e_full, u);
    detail::axpy(c, h, detail::times(e_half, k3));
    const Spectrum k4 = detail::rhs(plan, c);

    Spectrum out = detail::times(e_full, u);
    const double w = h / 6.0;
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] += w * (e_full[j] * k1[j] + 2.0 * e_half[j] * (k2[j] + k3[j]) + k4[j]);
    return out;
}

// Strang splitting for real constant symbols: half phase rotation, exact
// linear step, half phase rotation.
inline Field strang_step(const Field& u, double h, const NonlinearityPlan& plan) {
    const TrilinearSymbol& c = plan.symbol();
    if (!c.is_constant() || c.constant_part().imag() != 0.0)
        throw std::invalid_argument("strang scheme requires a real constant symbol");
    const double mu = c.constant_part().real();
    auto rotate = [mu, h](Field f) {
        for (auto& v : f.values) v *= std::exp(cd(0.0, -mu * std::norm(v) * 0.5 * h));
        return f;
    };
    return rotate(free_evolution(rotate(u), h));
}

inline bool all_finite(const Field& u) {
    for (const auto& v : u.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

// One step of size h (negative h integrates backwards).
inline void step(RunState& s, double h, Scheme scheme, const NonlinearityPlan& plan) {
    if (s.terminated()) throw std::logic_error("step: run already terminated");
    try {
        if (scheme == Scheme::strang) s.u = strang_step(s.u, h, plan);
        else s.u = inverse_transform(ifrk4_step(transform(s.u), h, plan));
    } catch (const std::domain_error&) {
        s.u.values.assign(s.u.size(), cd(std::numeric_limits<double>::quiet_NaN(), 0.0));
    }
    ++s.step;
    s.dt = h;
    s.time = s.step * h;
    if (!all_finite(s.u)) {
        s.flags.non_finite = true;
        s.exit = ExitRecord{ExitReason::numerical_blowup, s.time};
    }
}

inline void step(RunState& s, const EvolveConfig& cfg, const NonlinearityPlan& plan) {
    step(s, cfg.effective_dt(), cfg.scheme, plan);
}

inline HealthSample measure_health(const Field& u, double time) {
    return {time, l2_norm_squared(u), max_abs(u), tail_fraction(transform(u))};
}

// Updates the monotone flags; returns the exit reason triggered, if any.
inline ExitReason check_health(RunState& s, const HealthSample& h, const HealthThresholds& t) {
    ExitReason r = ExitReason::none;
    if (s.initial_mass > 0.0 && h.mass > t.mass_growth * s.initial_mass) {
        s.flags.mass = true;
        r = ExitReason::mass_growth;
    }
    if (h.max_amplitude > t.amplitude_cap) {
        s.flags.amplitude = true;
        if (r == ExitReason::none) r = ExitReason::amplitude_cap;
    }
    if (h.tail > t.tail_fraction) {
        s.flags.tail = true;
        if (r == ExitReason::none) r = ExitReason::tail_fraction;
    }
    return r;
}

// Integrates from `state` (step count resumes) to cfg.t_end or early exit.
// Diagnostics see a snapshot at t = 0 (fresh runs), every `cadence` steps
// and at the final step.
inline RunResult run(RunState state, const EvolveConfig& cfg, const NonlinearityPlan& plan,
                     const std::vector<Diagnostic>& diagnostics = {}) {
    cfg.validate();
    if (!(state.u.grid == plan.grid())) throw std::invalid_argument("run: field grid differs from plan grid");
    const long total = cfg.steps();
    const double h = cfg.effective_dt();
    if (state.step > 0 && state.dt != 0.0 && std::abs(state.dt - h) > 1e-12 * h)
        throw std::invalid_argument("run: resumed state used a different step size");
    RunResult out;

    auto observe = [&] {
        const HealthSample hs = measure_health(state.u, state.time);
        out.health.push_back(hs);
        for (const auto& d : diagnostics) d(Snapshot{state.time, state.step, state.u, hs});
        const ExitReason r = check_health(state, hs, cfg.health);
        if (r != ExitReason::none && !state.exit) state.exit = ExitRecord{r, state.time};
    };

    if (state.step == 0) observe();
    while (!state.terminated() && state.step < total) {
        step(state, h, cfg.scheme, plan);
        if (state.terminated()) {
            out.health.push_back({state.time, std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::infinity(), 1.0});
            break;
        }
        if (state.step % cfg.cadence == 0 || state.step == total) observe();
    }
    out.state = std::move(state);
    return out;
}

inline RunResult run(const Field& u0, const EvolveConfig& cfg, const NonlinearityPlan& plan,
                     const std::vector<Diagnostic>& diagnostics = {}) {
    return run(RunState::initial(u0), cfg, plan, diagnostics);
}

// Default step 0.1 / max(1, |u0|_inf^2 sup|c|).
inline double default_dt(const Field& u0, double sup_c) {
    const double a = max_abs(u0);
    return 0.1 / std::max(1.0, a * a * sup_c);
}

// Halves dt from default_dt until the final-time masses of two successive
// halvings agree to `tol` (relative). Returns the accepted dt.
inline double auto_dt(const Field& u0, EvolveConfig cfg, const NonlinearityPlan& plan, double sup_c,
                      double tol = 1e-6, int max_halvings = 10) {
    double dt = std::min(default_dt(u0, sup_c), cfg.t_end > 0.0 ? cfg.t_end : 1.0);
    auto final_mass = [&](double h) {
        cfg.dt = h;
        cfg.cadence = std::numeric_limits<int>::max();
        cfg.health.tail_fraction = std::numeric_limits<double>::infinity();
        const RunResult r = run(u0, cfg, plan);
        return r.state.terminated() ? std::numeric_limits<double>::quiet_NaN() : l2_norm_squared(r.state.u);
    };
    double prev = final_mass(dt);
    for (int k = 0; k < max_halvings; ++k) {
        const double next = final_mass(0.5 * dt);
        dt *= 0.5;
        if (std::isfinite(prev) && std::isfinite(next) &&
            std::abs(next - prev) <= tol * std::max(std::abs(next), 1e-300))
            return dt;
        prev = next;
    }
    throw std::runtime_error("auto_dt: no agreement after " + std::to_string(max_halvings) + " halvings");
}

// Fraction of mass within `width` of the torus edges (wrap-around monitor for
// localized data).
inline double edge_mass_fraction(const Field& u, double width) {
    const Grid& g = u.grid;
    double edge = 0.0, total = 0.0;
    for (int n = 0; n < g.size(); ++n) {
        const double w = std::norm(u[n]);
        total += w;
        const double x = g.x(n);
        if (x - g.x_min() < width || g.x_min() + g.length() - x < width) edge += w;
    }
    return total > 0.0 ? edge / total : 0.0;
}

// ---------------------------------------------------------------------------
// Checkpoints. Text format, one item per line:
//   cubiclab-checkpoint v1
//   n_points <int>
//   length <real>
//   x_min <real>
//   time <real>
//   step <int>
//   dt <real>
//   initial_mass <real>
//   spectrum
//   <re> <im>            (n_points lines, FFT order, transform convention)

inline constexpr const char* kCheckpointMagic = "cubiclab-checkpoint v1";

inline void write_checkpoint(const std::string& path, const RunState& s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    const Grid& g = s.u.grid;
    os << kCheckpointMagic << '\n'
       << "n_points " << g.size() << '\n'
       << "length " << g.length() << '\n'
       << "x_min " << g.x_min() << '\n'
       << "time " << s.time << '\n'
       << "step " << s.step << '\n'
       << "dt " << s.dt << '\n'
       << "initial_mass " << s.initial_mass << '\n'
       << "spectrum\n";
    for (const auto& c : transform(s.u).coeffs) os << c.real() << ' ' << c.imag() << '\n';
    if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline RunState read_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    std::getline(is, line);
    if (line != kCheckpointMagic) throw std::runtime_error("not a checkpoint file: " + path);
    auto field = [&](const char* key) {
        std::string k;
        std::string v;
        if (!(is >> k >> v) || k != key)
            throw std::runtime_error(std::string("checkpoint: expected key ") + key);
        return v;
    };
    const int n = std::stoi(field("n_points"));
    const double length = std::stod(field("length"));
    const double x_min = std::stod(field("x_min"));
    RunState s;
    s.time = std::stod(field("time"));
    s.step = std::stol(field("step"));
    s.dt = std::stod(field("dt"));
    s.initial_mass = std::stod(field("initial_mass"));
    std::string tag;
    is >> tag;
    if (tag != "spectrum") throw std::runtime_error("checkpoint: missing spectrum section");
    Spectrum sp(Grid(n, length, x_min));
    for (int j = 0; j < n; ++j) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw std::runtime_error("checkpoint: truncated spectrum");
        sp[j] = cd(re, im);
    }
    s.u = inverse_transform(sp);
    return s;
}

}  // namespace cubiclab
