// cubiclab: command-line driver for the cubic NLS lab.
//
//   cubiclab <verb> [--config FILE] [--out DIR] [--set key=value ...] [verb flags]
//
// Exit codes: 0 success, 1 compute failure, 2 usage or config file errors,
// 3 physics errors in the configuration. Failures print one JSON line on stderr.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cubiclab/config.hpp"
#include "cubiclab/io.hpp"
#include "cubiclab/selftest.hpp"

using namespace cubiclab;

namespace {

enum Exit { kOk = 0, kCompute = 1, kUsage = 2, kPhysics = 3 };

void error_line(const std::string& kind, const std::string& key, const std::string& message) {
    nlohmann::ordered_json j;
    j["status"] = "error";
    j["kind"] = kind;
    if (!key.empty()) j["key"] = key;
    j["message"] = message;
    std::cerr << j.dump() << std::endl;
}

void progress(const std::string& verb, const std::string& what) { std::cerr << "cubiclab " << verb << ": " << what << std::endl; }

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

nlohmann::ordered_json fit_json(const ScalingFit& f) {
    return {{"slope", f.slope}, {"half_width", f.half_width}, {"confidence", f.confidence}, {"points", f.x.size()}};
}

struct Context {
    std::string verb;
    Json config;
    Manifest& manifest;
    OutputDir& out;
};

// ---------------------------------------------------------------------------

int do_run(Context& c) {
    const RunConfig rc = run_config(c.config);
    c.manifest.seeds = {rc.data.seed};
    progress(c.verb, "evolving " + rc.symbol + " to t = " + std::to_string(rc.t_end));
    const FunctionalRun r = run_functionals(rc);
    CsvTable t("functionals", {"time", "M", "M_sharp", "I_AB", "J4", "remainder"});
    for (const auto& row : r.rows) t.add({row.time, row.mass, row.mass_sharp, row.interaction, row.j4, row.remainder});
    c.out.write("functionals.csv", t);
    auto& res = c.manifest.results;
    res["exit_reason"] = r.exit_reason;
    res["final_time"] = r.final_time;
    res["strategy"] = r.strategy;
    res["mass_drift"] = r.mass_drift;
    if (r.balance) {
        res["remainder_sup"] = r.balance->remainder_sup;
        res["remainder_l1"] = r.balance->remainder_l1;
        res["cadence_too_coarse"] = r.balance->cadence_too_coarse;
    }
    std::cout << "run: " << r.rows.size() << " samples, exit " << r.exit_reason << ", mass drift " << r.mass_drift
              << "\n";
    return kOk;
}

int sweep_drift(Context& c) {
    const DriftConfig dc = drift_config(c.config);
    c.manifest.seeds = {dc.data.seed};
    progress(c.verb, "drift over eps = " + join(dc.eps));
    const DriftResult r = drift_scaling(dc);
    CsvTable t("drift", {"eps", "raw", "corrected", "gap0", "status"});
    for (const auto& row : r.rows) t.add({row.eps, row.raw, row.corrected, row.gap0, row.status});
    c.out.write("drift.csv", t);
    auto& res = c.manifest.results;
    if (!r.refusal.empty()) {
        res["refusal"] = r.refusal;
        std::cout << "drift: refused: " << r.refusal << "\n";
        return kOk;
    }
    res["strategy"] = r.strategy;
    res["correction_size"] = r.correction_size;
    if (r.raw_fit && r.corrected_fit) {
        c.out.write("drift_fit.csv", fit_table({{"raw_mass", *r.raw_fit}, {"corrected_mass", *r.corrected_fit}}));
        res["raw_fit"] = fit_json(*r.raw_fit);
        res["corrected_fit"] = fit_json(*r.corrected_fit);
        std::cout << "drift: raw slope " << r.raw_fit->slope << " +- " << r.raw_fit->half_width << "\n"
                  << "drift: corrected slope " << r.corrected_fit->slope << " +- " << r.corrected_fit->half_width << "\n";
    } else {
        res["fit"] = "fewer than " + std::to_string(kMinFitPoints) + " usable sweep points";
        std::cout << "drift: no fit (fewer than " << kMinFitPoints << " usable points)\n";
    }
    return kOk;
}

int sweep_lifespan(Context& c) {
    const LifespanConfig lc = lifespan_config(c.config);
    c.manifest.seeds = {lc.data.seed};
    progress(c.verb, "lifespan of " + lc.symbol + " over eps = " + join(lc.eps) + ", cap " + std::to_string(lc.cap));
    const auto rows = lifespan_sweep(lc);
    CsvTable t("lifespan", {"eps", "exit_time", "status", "reference_eps8", "reference_eps6"});
    for (const auto& r : rows) {
        t.add({r.eps, r.exit_time, r.status, r.reference_8, r.reference_6});
        std::cout << "lifespan: eps " << r.eps << " -> " << r.exit_time << " (" << r.status << ")\n";
    }
    c.out.write("lifespan.csv", t);
    return kOk;
}

int sweep_morawetz(Context& c) {
    const MorawetzSpec ms = morawetz_config(c.config);
    c.manifest.seeds = {ms.sweep.data.seed};
    progress(c.verb, "interaction balance over eps = " + join(ms.sweep.eps));
    const MorawetzSweep nl = morawetz_sweep(ms.sweep);
    progress(c.verb, "free-flow order over spacings = " + join(ms.free_spacings));
    const MorawetzSweep fr = morawetz_free_order(ms.sweep, ms.free_amplitude, ms.free_spacings);

    const std::vector<std::string> cols{"eps", "remainder_sup", "remainder_l1", "derivative_error",
                                        "cadence_too_coarse", "band_a", "band_b", "xi0", "x0"};
    CsvTable t("morawetz", cols);
    for (const auto& r : nl.rows)
        t.add({r.eps, r.report.remainder_sup, r.report.remainder_l1, r.report.derivative_error,
               static_cast<long long>(r.report.cadence_too_coarse), r.report.band_a, r.report.band_b, r.report.xi0,
               r.report.x0});
    c.out.write("morawetz.csv", t);
    CsvTable f("morawetz_free", {"spacing", "remainder_sup", "remainder_l1"});
    for (const auto& r : fr.rows) f.add({r.eps, r.report.remainder_sup, r.report.remainder_l1});
    c.out.write("morawetz_free.csv", f);

    std::vector<std::pair<std::string, ScalingFit>> fits;
    if (nl.fit) fits.emplace_back("remainder_l1_vs_eps", *nl.fit);
    if (fr.fit) fits.emplace_back("free_remainder_sup_vs_spacing", *fr.fit);
    if (!fits.empty()) c.out.write("morawetz_fit.csv", fit_table(fits));
    for (const auto& [name, fit] : fits) {
        c.manifest.results[name] = fit_json(fit);
        std::cout << "morawetz: " << name << " slope " << fit.slope << " +- " << fit.half_width << "\n";
    }
    return kOk;
}

int sweep_distance(Context& c) {
    const DistanceConfig dc = distance_config(c.config);
    progress(c.verb, "bilinear distance sweep");
    const DistanceSweep r = bilinear_distance_sweep(dc);
    CsvTable t("distance", {"distance", "value", "normalized"});
    for (const auto& row : r.rows) t.add({static_cast<long long>(row.distance), row.value, row.normalized});
    c.out.write("distance.csv", t);
    if (r.fit) {
        c.out.write("distance_fit.csv", fit_table({{"bilinear_vs_distance", *r.fit}}));
        c.manifest.results["fit"] = fit_json(*r.fit);
        std::cout << "distance: slope " << r.fit->slope << " +- " << r.fit->half_width << "\n";
    }
    return kOk;
}

int sweep_source(Context& c) {
    const SourceCheckConfig sc = source_config(c.config);
    c.manifest.seeds = sc.seeds;
    progress(c.verb, "mass source identity");
    const auto rows = mass_source_check(sc);
    CsvTable t("mass_source", {"seed", "h", "numeric", "predicted", "rel_error"});
    for (const auto& r : rows)
        t.add({static_cast<long long>(r.seed), r.h, r.numeric, r.predicted, r.rel_error});
    c.out.write("mass_source.csv", t);
    // worst seed at the finest step
    double finest = sc.h.front();
    for (double h : sc.h) finest = std::min(finest, h);
    double worst = 0.0;
    for (const auto& r : rows)
        if (r.h == finest) worst = std::max(worst, r.rel_error);
    c.manifest.oracle_errors["mass_source_rel_error"] = worst;
    std::cout << "source: worst relative error at h = " << finest << ": " << worst << "\n";
    return kOk;
}

int do_soliton(Context& c) {
    const SolitonConfig sc = soliton_config(c.config);
    progress(c.verb, "soliton table for lambda = " + join(sc.lambda) + ", T = " + std::to_string(sc.t_end));
    const auto rows = soliton_suite(sc);
    CsvTable t("soliton", {"lambda", "eps", "mass", "mass_ref", "l6_6", "l6_ref", "gradient_sq", "gradient_ref",
                           "shape_error", "phase_error", "window", "ratio_l2", "ratio_strichartz", "ratio_bilinear"});
    double mass_err = 0.0, shape = 0.0, phase = 0.0;
    for (const auto& r : rows) {
        t.add({r.lambda, r.eps, r.mass, r.mass_ref, r.l6_6, r.l6_ref, r.gradient_sq, r.gradient_ref, r.shape_error,
               r.phase_error, r.window, r.ratio_l2, r.ratio_strichartz, r.ratio_bilinear});
        mass_err = std::max(mass_err, std::abs(r.mass - r.mass_ref) / r.mass_ref);
        shape = std::max(shape, r.shape_error);
        phase = std::max(phase, r.phase_error);
        std::cout << "soliton: lambda " << r.lambda << " mass " << r.mass << " l6^6 " << r.l6_6 << " (ref " << r.l6_ref
                  << ") ratios " << r.ratio_l2 << " " << r.ratio_strichartz << " " << r.ratio_bilinear << "\n";
    }
    c.out.write("soliton.csv", t);
    c.manifest.oracle_errors["mass_rel_error"] = mass_err;
    c.manifest.oracle_errors["shape_error"] = shape;
    c.manifest.oracle_errors["phase_error"] = phase;
    return kOk;
}

int audit_windows(Context& c) {
    const WindowSpec ws = windows_config(c.config);
    c.manifest.seeds = {ws.study.data.seed};
    CsvTable t("windows", {"norm", "t0", "t1", "length", "l2", "strichartz", "bilinear", "c"});
    for (double norm : ws.norms) {
        WindowStudyConfig wc = ws.study;
        wc.norm = norm;
        progress(c.verb, "theorem windows at norm " + std::to_string(norm));
        const WindowStudy s = window_study(wc);
        for (const auto& r : s.rows) {
            t.add({norm, r.window.t0, r.window.t1, r.window.length(), r.l2, r.strichartz, r.bilinear, r.c});
            std::cout << "windows: norm " << norm << " |I| " << r.window.length() << " strichartz " << r.strichartz
                      << " bilinear " << r.bilinear << "\n";
        }
        c.manifest.oracle_errors["mass_drift_norm_" + std::to_string(norm)] = s.mass_drift;
    }
    c.out.write("windows.csv", t);
    return kOk;
}

int audit_bootstrap_verb(Context& c) {
    const BootstrapConfig bc = bootstrap_config(c.config);
    c.manifest.seeds = {bc.data.seed};
    progress(c.verb, "envelope and bootstrap audit");
    const BootstrapStudy s = bootstrap_study(bc);
    CsvTable e("envelope", {"k", "band_norm", "envelope"});
    for (std::size_t i = 0; i < s.band_data.size(); ++i) {
        const int k = s.band_lo + static_cast<int>(i);
        e.add({static_cast<long long>(k), s.band_data[i], s.envelope[k]});
    }
    c.out.write("envelope.csv", e);
    CsvTable t("bootstrap", {"bound", "k1", "k2", "measured", "claimed", "ratio"});
    for (const auto& r : s.table.rows)
        t.add({r.bound, static_cast<long long>(r.k1), static_cast<long long>(r.k2), r.measured, r.claimed, r.ratio});
    c.out.write("bootstrap.csv", t);
    auto& res = c.manifest.results;
    res["admissibility_constant"] = s.envelope.admissibility;
    res["envelope_constant_limit"] = bc.max_constant;
    res["time_constraint"] = s.table.time_constraint;
    for (const char* b : {"uk-ee", "uk-se", "uk-bi", "uab-bi"}) {
        res[std::string("sup_") + b] = s.table.sup(b);
        std::cout << "bootstrap: sup ratio " << b << " = " << s.table.sup(b) << "\n";
    }
    return kOk;
}

int audit_interpolation(Context& c) {
    const InterpolationStudyConfig ic = interpolation_config(c.config);
    c.manifest.seeds = {ic.data.seed};
    progress(c.verb, "interpolation chain audit");
    const InterpolationReport r = interpolation_study(ic);
    CsvTable t("interpolation", {"band", "constant", "status"});
    for (const auto& row : r.rows)
        t.add({row.band.describe(), row.constant.value_or(std::numeric_limits<double>::quiet_NaN()),
               std::string(row.constant ? "ok" : "skipped")});
    c.out.write("interpolation.csv", t);
    c.manifest.results["sup"] = r.sup;
    c.manifest.results["skipped"] = r.skipped;
    std::cout << "interpolation: sup constant " << r.sup << ", skipped " << r.skipped << "\n";
    return kOk;
}

int do_symbol_inspect(Context& c) {
    const SymbolInspectConfig sc = symbol_inspect_config(c.config);
    const TrilinearSymbol sym = parse_symbol(sc.symbol);
    const HypothesisRecord h = check_hypotheses(sym, sc.sample);
    CsvTable t("symbol", {"symbol", "sup_abs", "sup_first_diff", "h2_violation", "diag_min", "diag_max",
                          "diag_imag_max", "symmetry_defect", "sign"});
    t.add({sc.symbol, h.sup_abs, h.sup_first_diff, h.h2_violation, h.diag_min, h.diag_max, h.diag_imag_max,
           h.symmetry_defect, std::string(to_string(h.sign))});
    c.out.write("symbol.csv", t);
    auto& res = c.manifest.results;
    res["symbol"] = sc.symbol;
    res["sign"] = to_string(h.sign);
    res["sup_abs"] = h.sup_abs;
    res["h2_violation"] = h.h2_violation;
    res["symmetry_defect"] = h.symmetry_defect;
    std::cout << "symbol " << sc.symbol << ": sign " << to_string(h.sign) << ", sup |c| " << h.sup_abs
              << ", sup |Im c(xi,xi,eta)| " << h.h2_violation << ", symmetry defect " << h.symmetry_defect << "\n";
    return kOk;
}

int do_selftest(Context& c) {
    const auto results = run_selftest();
    CsvTable t("selftest", {"property", "error", "tolerance", "status"});
    bool all = true;
    for (const auto& r : results) {
        const std::string status = r.pass ? "PASS" : "FAIL";
        all = all && r.pass;
        t.add({r.property, r.error, r.tolerance, status});
        c.manifest.oracle_errors[r.property] = r.error;
        std::cout << status << "  " << r.property << "  error " << r.error << " (tolerance " << r.tolerance << ")\n";
    }
    c.out.write("selftest.csv", t);
    if (!all) throw std::runtime_error("selftest: at least one property failed");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cubiclab: pseudo-spectral simulation lab for 1D cubic NLS"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", config_path, "JSON file merged over config/defaults.json");
        sc->add_option("--out", out_dir, "output directory (default out/<verb>)");
        sc->add_option("--set", sets, "dotted key=value override, repeatable, last wins")->take_all();
    };

    CLI::App* run = app.add_subcommand("run", "single evolution with the functional series");
    CLI::App* sweep = app.add_subcommand("sweep", "drift, lifespan, interaction-balance, distance or source sweep");
    CLI::App* soliton = app.add_subcommand("soliton", "soliton saturation table");
    CLI::App* audit = app.add_subcommand("audit", "theorem windows, bootstrap audit or interpolation audit");
    CLI::App* inspect = app.add_subcommand("symbol-inspect", "hypothesis record of a trilinear symbol");
    CLI::App* self = app.add_subcommand("selftest", "oracle-equivalence suite");
    for (CLI::App* sc : {run, sweep, soliton, audit, inspect, self}) common(sc);

    std::string experiment, eps, lambda, kind = "windows", symbol;
    double horizon = 0.0;
    sweep->add_option("--experiment", experiment, "drift | lifespan | morawetz | distance | source")
        ->required()
        ->check(CLI::IsMember({"drift", "lifespan", "morawetz", "distance", "source"}));
    sweep->add_option("--eps", eps, "comma-separated eps list");
    soliton->add_option("--lambda", lambda, "comma-separated lambda list");
    soliton->add_option("--T", horizon, "horizon T")->check(CLI::PositiveNumber);
    audit->add_option("--kind", kind, "windows | bootstrap | interpolation")
        ->check(CLI::IsMember({"windows", "bootstrap", "interpolation"}));
    inspect->add_option("--symbol", symbol, "symbol name or specification");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << std::flush;
        error_line("usage", "", e.what());
        return kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string verb = chosen->get_name();

    Json cfg;
    try {
        cfg = config_path.empty() ? default_config() : load_config(config_path);
        if (verb == "sweep" && !eps.empty()) {
            if (experiment == "distance" || experiment == "source")
                throw UsageError("--eps", "not used by the " + experiment + " experiment");
            apply_override(cfg, experiment + ".eps=" + eps);
        }
        if (verb == "soliton" && !lambda.empty()) apply_override(cfg, "soliton.lambda=" + lambda);
        if (verb == "soliton" && horizon > 0.0) {
            std::ostringstream os;
            os.precision(17);
            os << horizon;
            apply_override(cfg, "soliton.t_end=" + os.str());
        }
        if (verb == "symbol-inspect" && !symbol.empty()) apply_override(cfg, "symbol_inspect.symbol=" + symbol);
        for (const auto& s : sets) apply_override(cfg, s);
        validate_config(cfg);
    } catch (const UsageError& e) {
        std::cerr << chosen->help() << std::flush;
        error_line("usage", e.key(), e.what());
        return kUsage;
    } catch (const PhysicsError& e) {
        error_line("physics", e.key(), e.what());
        return kPhysics;
    }

    Manifest manifest;
    manifest.verb = verb;
    manifest.config = cfg;
    if (verb == "sweep") manifest.results["experiment"] = experiment;
    if (verb == "audit") manifest.results["kind"] = kind;
    std::unique_ptr<OutputDir> out;
    try {
        out = std::make_unique<OutputDir>(out_dir.empty() ? "out/" + verb : out_dir, manifest);
    } catch (const std::exception& e) {
        error_line("usage", "--out", e.what());
        return kUsage;
    }

    Context ctx{verb, cfg, manifest, *out};
    int code = kOk;
    try {
        if (verb == "run") code = do_run(ctx);
        else if (verb == "sweep" && experiment == "drift") code = sweep_drift(ctx);
        else if (verb == "sweep" && experiment == "lifespan") code = sweep_lifespan(ctx);
        else if (verb == "sweep" && experiment == "morawetz") code = sweep_morawetz(ctx);
        else if (verb == "sweep" && experiment == "distance") code = sweep_distance(ctx);
        else if (verb == "sweep") code = sweep_source(ctx);
        else if (verb == "soliton") code = do_soliton(ctx);
        else if (verb == "audit" && kind == "bootstrap") code = audit_bootstrap_verb(ctx);
        else if (verb == "audit" && kind == "interpolation") code = audit_interpolation(ctx);
        else if (verb == "audit") code = audit_windows(ctx);
        else if (verb == "symbol-inspect") code = do_symbol_inspect(ctx);
        else code = do_selftest(ctx);
        manifest.status = "ok";
    } catch (const std::exception& e) {
        manifest.status = "failed";
        manifest.error = {{"kind", "compute"}, {"message", e.what()}};
        code = kCompute;
        error_line("compute", "", e.what());
    }
    try {
        out->write_manifest();
    } catch (const std::exception& e) {
        error_line("io", "", e.what());
        return kCompute;
    }
    std::cout << std::flush;
    return code;
}
