#pragma once

// Scenario configuration: the defaults file (config/defaults.json, embedded at
// build time), user config files merged over it, dotted key=value overrides,
// and conversion into the experiment structs with physics validation.
//
// Unknown keys and malformed files are usage errors. Values that parse but
// make no physical sense (odd n_points, negative eps, ...) are physics errors
// and carry the dotted key that failed.

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubiclab/default_config.hpp"
#include "cubiclab/experiments.hpp"

namespace cubiclab {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class UsageError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class PhysicsError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

inline Json default_config() { return Json::parse(kDefaultConfigJson); }

namespace detail {

inline bool same_kind(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

inline std::string join_key(const std::string& prefix, const std::string& k) { return prefix.empty() ? k : prefix + "." + k; }

// Arrays replace wholesale; their contents are checked by validation.
inline void merge_into(Json& base, const Json& overlay, const std::string& prefix) {
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const std::string key = join_key(prefix, it.key());
        if (!base.contains(it.key())) throw UsageError(key, "unknown config key");
        Json& slot = base[it.key()];
        if (slot.is_object()) {
            if (!it.value().is_object()) throw UsageError(key, "expected a table");
            merge_into(slot, it.value(), key);
        } else {
            if (!same_kind(slot, it.value())) throw UsageError(key, "wrong value type " + std::string(it.value().type_name()));
            slot = it.value();
        }
    }
}

}  // namespace detail

inline void merge_config(Json& base, const Json& overlay) {
    if (!overlay.is_object()) throw UsageError("", "config must be a JSON object");
    detail::merge_into(base, overlay, "");
}

inline Json load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("", "cannot read config file " + path.string());
    Json user;
    try {
        user = Json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("", "config file " + path.string() + " is not valid JSON: " + e.what());
    }
    Json cfg = default_config();
    merge_config(cfg, user);
    return cfg;
}

// "a.b.c=value". The value is read as JSON when possible and as a bare string
// otherwise; a comma list fills an array key.
inline void apply_override(Json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("", "override must read key=value: \"" + assignment + "\"");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    Json* slot = &cfg;
    std::stringstream ks(key);
    std::string part;
    while (std::getline(ks, part, '.')) {
        if (!slot->is_object() || !slot->contains(part)) throw UsageError(key, "unknown config key");
        slot = &(*slot)[part];
    }
    if (slot->is_object()) throw UsageError(key, "cannot assign a value to a table");

    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded() && slot->is_array()) value = Json::parse("[" + text + "]", nullptr, false);
    if (value.is_discarded() || (slot->is_string() && !value.is_string())) value = text;
    if (slot->is_array() && !value.is_array()) value = Json::array({value});
    if (!detail::same_kind(*slot, value)) throw UsageError(key, "wrong value type " + std::string(value.type_name()));
    *slot = value;
}

// ---------------------------------------------------------------------------
// Typed reads with physics checks.

class Section {
public:
    Section(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {}

    std::string key(const std::string& k) const { return detail::join_key(prefix_, k); }
    const Json& raw(const std::string& k) const {
        if (!j_.contains(k)) throw UsageError(key(k), "missing config key");
        return j_.at(k);
    }
    Section sub(const std::string& k) const { return Section(raw(k), key(k)); }

    double real(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_number()) throw PhysicsError(key(k), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw PhysicsError(key(k), "must be finite");
        return d;
    }
    double positive(const std::string& k) const {
        const double d = real(k);
        if (!(d > 0.0)) throw PhysicsError(key(k), "must be positive");
        return d;
    }
    double nonnegative(const std::string& k) const {
        const double d = real(k);
        if (!(d >= 0.0)) throw PhysicsError(key(k), "must be >= 0");
        return d;
    }
    long long integer(const std::string& k) const { return as_integer(raw(k), key(k)); }
    int at_least(const std::string& k, int lo) const {
        const long long v = integer(k);
        if (v < lo || v > 1000000000) throw PhysicsError(key(k), "must be an integer >= " + std::to_string(lo));
        return static_cast<int>(v);
    }
    int n_points(const std::string& k = "n_points") const {
        const long long v = integer(k);
        if (v < 8 || v % 2 != 0 || v > (1 << 22)) throw PhysicsError(key(k), "must be an even integer >= 8");
        return static_cast<int>(v);
    }
    std::string text(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_string()) throw PhysicsError(key(k), "expected a string");
        return v.get<std::string>();
    }
    bool flag(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_boolean()) throw PhysicsError(key(k), "expected true or false");
        return v.get<bool>();
    }
    std::vector<double> positive_list(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_array() || v.empty()) throw PhysicsError(key(k), "expected a non-empty list");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !(e.get<double>() > 0.0) || !std::isfinite(e.get<double>()))
                throw PhysicsError(key(k), "entries must be positive numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::vector<long long> integer_list(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_array() || v.empty()) throw PhysicsError(key(k), "expected a non-empty list");
        std::vector<long long> out;
        for (const auto& e : v) out.push_back(as_integer(e, key(k)));
        return out;
    }
    std::string symbol(const std::string& k = "symbol") const {
        const std::string s = text(k);
        try {
            (void)parse_symbol(s);
        } catch (const std::exception& e) {
            throw PhysicsError(key(k), e.what());
        }
        return s;
    }
    Scheme scheme(const std::string& k = "scheme") const {
        try {
            return parse_scheme(text(k));
        } catch (const std::invalid_argument& e) {
            throw PhysicsError(key(k), e.what());
        }
    }
    Band band(const std::string& k) const { return band_from(raw(k), key(k)); }

    static Band band_from(const Json& v, const std::string& where) {
        if (v.is_string() && (v == "whole" || v == "global")) return Band::whole();
        if (v.is_array() && v.size() == 2) {
            const long long lo = as_integer(v[0], where), hi = as_integer(v[1], where);
            if (hi < lo) throw PhysicsError(where, "band needs lo <= hi");
            return Band::interval(static_cast<int>(lo), static_cast<int>(hi));
        }
        throw PhysicsError(where, "band must be \"whole\" or [lo, hi]");
    }

    static long long as_integer(const Json& v, const std::string& where) {
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
        }
        throw PhysicsError(where, "expected an integer");
    }

private:
    const Json& j_;
    std::string prefix_;
};

inline DataSpec data_from(const Section& s, int n_points) {
    DataSpec d;
    try {
        d.family = parse_data_family(s.text("family"));
    } catch (const std::invalid_argument& e) {
        throw PhysicsError(s.key("family"), e.what());
    }
    const long long seed = s.integer("seed");
    if (seed < 0 || seed > 4294967295LL) throw PhysicsError(s.key("seed"), "must fit in 32 bits");
    d.seed = static_cast<unsigned>(seed);
    d.kmax = s.at_least("kmax", 0);
    if (d.family == DataFamily::random_bands && d.kmax >= n_points / 2)
        throw PhysicsError(s.key("kmax"), "must be below n_points / 2");
    d.window = s.nonnegative("window");
    d.center = s.real("center");
    d.width = s.positive("width");
    d.xi = s.real("xi");
    d.lambda = s.positive("lambda");
    return d;
}

inline InteractionOptions interaction_from(const Section& s) {
    InteractionOptions o;
    o.band_a = s.band("band_a");
    o.band_b = s.band("band_b");
    o.xi0 = s.real("xi0");
    o.oversample = s.at_least("oversample", 1);
    return o;
}

inline RunConfig run_config(const Json& cfg) {
    const Section s(cfg.at("run"), "run");
    RunConfig c;
    c.symbol = s.symbol();
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.scheme = s.scheme();
    c.dt = s.positive("dt");
    c.t_end = s.nonnegative("t_end");
    if (c.t_end > 0.0 && c.dt > c.t_end) throw PhysicsError(s.key("dt"), "must not exceed t_end");
    c.cadence = s.at_least("cadence", 1);
    c.amplitude = s.positive("amplitude");
    c.data = data_from(s.sub("data"), c.n_points);
    const Section h = s.sub("health");
    c.health.amplitude_cap = h.positive("amplitude_cap");
    c.health.tail_fraction = h.positive("tail_fraction");
    c.health.mass_growth = h.positive("mass_growth");
    const Section in = s.sub("interaction");
    c.options = interaction_from(in);
    c.x0 = in.real("x0");
    c.corrected_mass = s.flag("corrected_mass");
    if (c.corrected_mass) {
        if (c.n_points > kMaxCorrectedPoints)
            throw PhysicsError(s.key("corrected_mass"), "needs n_points <= " + std::to_string(kMaxCorrectedPoints));
        if (check_hypotheses(parse_symbol(c.symbol)).h2_violation > 1e-10)
            throw PhysicsError(s.key("corrected_mass"), "symbol violates Im c(xi, xi, eta) = 0; no corrected mass exists");
    }
    return c;
}

inline DriftConfig drift_config(const Json& cfg) {
    const Section s(cfg.at("drift"), "drift");
    DriftConfig c;
    c.symbol = s.symbol();
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.scheme = s.scheme();
    c.dt = s.positive("dt");
    c.t_short = s.positive("t_short");
    c.samples = s.at_least("samples", 3);
    c.eps = s.positive_list("eps");
    c.data = data_from(s.sub("data"), c.n_points);
    return c;
}

inline SourceCheckConfig source_config(const Json& cfg) {
    const Section s(cfg.at("source"), "source");
    SourceCheckConfig c;
    c.symbol = s.symbol();
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.band = s.band("band");
    c.amplitude = s.positive("amplitude");
    c.kmax = s.at_least("kmax", 0);
    if (c.kmax >= c.n_points / 2) throw PhysicsError(s.key("kmax"), "must be below n_points / 2");
    c.seeds.clear();
    for (long long v : s.integer_list("seeds")) {
        if (v < 0 || v > 4294967295LL) throw PhysicsError(s.key("seeds"), "must fit in 32 bits");
        c.seeds.push_back(static_cast<unsigned>(v));
    }
    c.h = s.positive_list("h");
    c.substeps = s.at_least("substeps", 1);
    return c;
}

inline LifespanConfig lifespan_config(const Json& cfg) {
    const Section s(cfg.at("lifespan"), "lifespan");
    LifespanConfig c;
    c.symbol = s.symbol();
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.eps = s.positive_list("eps");
    c.cap = s.nonnegative("cap");
    c.dt = s.nonnegative("dt");
    c.mass_growth = s.positive("mass_growth");
    if (!(c.mass_growth > 1.0)) throw PhysicsError(s.key("mass_growth"), "must exceed 1");
    c.cadence = s.at_least("cadence", 1);
    c.edge_width = s.nonnegative("edge_width");
    c.edge_fraction = s.positive("edge_fraction");
    c.data = data_from(s.sub("data"), c.n_points);
    return c;
}

struct MorawetzSpec {
    MorawetzConfig sweep;
    double free_amplitude = 0.5;
    std::vector<double> free_spacings;
};

inline MorawetzSpec morawetz_config(const Json& cfg) {
    const Section s(cfg.at("morawetz"), "morawetz");
    MorawetzSpec m;
    MorawetzConfig& c = m.sweep;
    c.symbol = s.symbol();
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.eps = s.positive_list("eps");
    c.t_end = s.positive("t_end");
    c.cadence = s.positive("cadence");
    c.substeps = s.at_least("substeps", 1);
    c.x0 = s.real("x0");
    c.options = interaction_from(s.sub("interaction"));
    c.data = data_from(s.sub("data"), c.n_points);
    m.free_amplitude = s.positive("free_amplitude");
    m.free_spacings = s.positive_list("free_spacings");
    return m;
}

inline DistanceConfig distance_config(const Json& cfg) {
    const Section s(cfg.at("distance"), "distance");
    DistanceConfig c;
    c.distances.clear();
    for (long long d : s.integer_list("distances")) {
        if (d <= 0 || d % 2 != 0 || d > 1000000) throw PhysicsError(s.key("distances"), "entries must be even and positive");
        c.distances.push_back(static_cast<int>(d));
    }
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.width = s.positive("width");
    c.x_sep = s.positive("x_sep");
    c.samples = s.at_least("samples", 3);
    return c;
}

inline SolitonConfig soliton_config(const Json& cfg) {
    const Section s(cfg.at("soliton"), "soliton");
    SolitonConfig c;
    c.lambda = s.positive_list("lambda");
    c.t_end = s.positive("t_end");
    c.n_points = s.n_points();
    c.length_scale = s.positive("length_scale");
    c.dt = s.positive("dt");
    c.sample_every = s.positive("sample_every");
    // lambda dx = length_scale / n_points for every lambda
    if (c.length_scale / c.n_points > 0.2)
        throw PhysicsError(s.key("n_points"), "profile under-resolved (lambda dx > 0.2)");
    return c;
}

struct WindowSpec {
    WindowStudyConfig study;
    std::vector<double> norms;
};

inline WindowSpec windows_config(const Json& cfg) {
    const Section s(cfg.at("windows"), "windows");
    WindowSpec w;
    WindowStudyConfig& c = w.study;
    c.symbol = s.symbol();
    w.norms = s.positive_list("norm");
    c.multipliers = s.positive_list("multipliers");
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.dt = s.positive("dt");
    c.sample_every = s.positive("sample_every");
    c.data = data_from(s.sub("data"), c.n_points);
    return w;
}

inline InterpolationStudyConfig interpolation_config(const Json& cfg) {
    const Section s(cfg.at("interpolation"), "interpolation");
    InterpolationStudyConfig c;
    c.symbol = s.symbol();
    c.amplitude = s.positive("amplitude");
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.t_end = s.positive("t_end");
    c.dt = s.positive("dt");
    c.sample_every = s.positive("sample_every");
    const Json& bands = s.raw("bands");
    if (!bands.is_array() || bands.empty()) throw PhysicsError(s.key("bands"), "expected a non-empty list");
    c.bands.clear();
    for (const auto& b : bands) c.bands.push_back(Section::band_from(b, s.key("bands")));
    c.data = data_from(s.sub("data"), c.n_points);
    return c;
}

inline BootstrapConfig bootstrap_config(const Json& cfg) {
    const Section s(cfg.at("bootstrap"), "bootstrap");
    BootstrapConfig c;
    c.symbol = s.symbol();
    c.n_points = s.n_points();
    c.length = s.positive("length");
    c.eps = s.positive("eps");
    c.t_end = s.positive("t_end");
    c.dt = s.positive("dt");
    c.sample_every = s.positive("sample_every");
    c.delta = s.positive("delta");
    c.max_constant = s.positive("max_constant");
    if (c.max_constant < 1.0) throw PhysicsError(s.key("max_constant"), "must be >= 1");
    c.x0 = s.real("x0");
    const Json& pairs = s.raw("pairs");
    if (!pairs.is_array()) throw PhysicsError(s.key("pairs"), "expected a list of [k1, k2]");
    c.pairs.clear();
    for (const auto& p : pairs) {
        if (!p.is_array() || p.size() != 2) throw PhysicsError(s.key("pairs"), "expected a list of [k1, k2]");
        c.pairs.emplace_back(static_cast<int>(Section::as_integer(p[0], s.key("pairs"))),
                             static_cast<int>(Section::as_integer(p[1], s.key("pairs"))));
    }
    c.data = data_from(s.sub("data"), c.n_points);
    return c;
}

struct SymbolInspectConfig {
    std::string symbol;
    SampleSpec sample;
};

inline SymbolInspectConfig symbol_inspect_config(const Json& cfg) {
    const Section s(cfg.at("symbol_inspect"), "symbol_inspect");
    SymbolInspectConfig c;
    c.symbol = s.symbol();
    c.sample.xi_max = s.positive("xi_max");
    c.sample.points = s.at_least("points", 2);
    c.sample.fd_step = s.positive("fd_step");
    return c;
}

// Converts every section, so any physics error surfaces before compute.
inline void validate_config(const Json& cfg) {
    (void)run_config(cfg);
    (void)drift_config(cfg);
    (void)source_config(cfg);
    (void)lifespan_config(cfg);
    (void)morawetz_config(cfg);
    (void)distance_config(cfg);
    (void)soliton_config(cfg);
    (void)windows_config(cfg);
    (void)interpolation_config(cfg);
    (void)bootstrap_config(cfg);
    (void)symbol_inspect_config(cfg);
}

}  // namespace cubiclab
