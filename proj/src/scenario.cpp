#include "bsim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include "bsim/analysis.hpp"
#include "bsim/constants.hpp"
#include "bsim/csv.hpp"
#include "bsim/duffing.hpp"
#include "bsim/noisebudget.hpp"
#include "bsim/sde.hpp"
#include "bsim/trajfile.hpp"
#include "bsim/tuning.hpp"

namespace bsim::scenario {

using nlohmann::json;

namespace {

// ---------- schema helpers ----------

// "notes" is allowed in every object so scenario files can carry inline
// documentation (JSON has no comments).
void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed, std::vector<std::string>& errors) {
    if (!obj.is_object()) {
        errors.push_back(where + ": expected an object");
        return;
    }
    std::vector<std::string> unknown;
    for (const auto& [key, _] : obj.items())
        if (key != "notes" && allowed.count(key) == 0) unknown.push_back(key);
    if (!unknown.empty()) {
        std::string msg = where + ": unknown key(s):";
        for (const auto& k : unknown) msg += " " + k;
        errors.push_back(msg);
    }
}

bool has(const json& obj, const char* key) { return obj.is_object() && obj.contains(key); }

double req_num(const json& obj, const std::string& where, const char* key,
               std::vector<std::string>& errors) {
    if (!has(obj, key)) {
        errors.push_back(where + ": missing required key '" + key + "'");
        return 0.0;
    }
    if (!obj[key].is_number()) {
        errors.push_back(where + ": key '" + key + "' must be a number");
        return 0.0;
    }
    return obj[key].get<double>();
}

double opt_num(const json& obj, const std::string& where, const char* key, double def,
               std::vector<std::string>& errors) {
    if (!has(obj, key)) return def;
    if (!obj[key].is_number()) {
        errors.push_back(where + ": key '" + key + "' must be a number");
        return def;
    }
    return obj[key].get<double>();
}

long opt_int(const json& obj, const std::string& where, const char* key, long def,
             std::vector<std::string>& errors) {
    if (!has(obj, key)) return def;
    if (!obj[key].is_number_integer()) {
        errors.push_back(where + ": key '" + key + "' must be an integer");
        return def;
    }
    return obj[key].get<long>();
}

// ---------- block parsers ----------

potential::PotentialModel parse_potential(const json& j, const std::string& where,
                                          std::vector<std::string>& errors) {
    if (j.is_string()) {
        if (j.get<std::string>() == "default") return potential::gold_contact_model();
        errors.push_back(where + ": only the string \"default\" or an explicit model is allowed");
        return potential::gold_contact_model();
    }
    try {
        return potential_from_json(j);
    } catch (const std::exception& e) {
        errors.push_back(where + ": " + e.what());
        return potential::gold_contact_model();
    }
}

duffing::ResonatorParams parse_resonator(const json& j, const std::string& where,
                                         std::vector<std::string>& errors) {
    check_keys(j, where, {"m", "m_eff", "omega0", "Q", "alpha", "xi"}, errors);
    const double m = req_num(j, where, "m", errors);
    const double m_eff = opt_num(j, where, "m_eff", 0.5 * m, errors);
    const double omega0 = req_num(j, where, "omega0", errors);
    const double Q = req_num(j, where, "Q", errors);
    const double alpha = opt_num(j, where, "alpha", 0.0, errors);
    const double xi = opt_num(j, where, "xi", 1.0, errors);
    duffing::ResonatorParams p{};
    try {
        p = duffing::ResonatorParams::make(m, m_eff, omega0, Q, alpha, xi);
    } catch (const std::exception& e) {
        errors.push_back(where + ": " + e.what());
    }
    return p;
}

json resonator_to_json(const duffing::ResonatorParams& p) {
    return json{{"m", p.m},   {"m_eff", p.m_eff}, {"omega0", p.omega0},
                {"Q", p.Q},   {"alpha", p.alpha}, {"xi", p.xi},
                {"k", p.k}};
}

std::vector<double> parse_grid(const json& j, const std::string& where,
                               std::vector<std::string>& errors, bool default_log = false) {
    check_keys(j, where, {"min", "max", "n", "log"}, errors);
    const double lo = req_num(j, where, "min", errors);
    const double hi = req_num(j, where, "max", errors);
    const long n = opt_int(j, where, "n", 100, errors);
    bool logspace = default_log;
    if (has(j, "log")) {
        if (!j["log"].is_boolean()) errors.push_back(where + ": 'log' must be a boolean");
        else logspace = j["log"].get<bool>();
    }
    if (n < 2) errors.push_back(where + ": 'n' must be at least 2");
    if (!(hi > lo)) errors.push_back(where + ": requires max > min");
    if (logspace && !(lo > 0.0)) errors.push_back(where + ": log grid requires min > 0");
    std::vector<double> g;
    if (errors.empty()) {
        g.reserve(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(n - 1);
            g.push_back(logspace ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u);
        }
    }
    return g;
}

// ---------- parsed scenario ----------

struct Parsed {
    std::string command;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    int workers = 0;
    json resolved;
    json body; // raw document for command-specific parsing at run time
};

const std::set<std::string> known_commands = {
    "potential-scan", "tune-sweep", "hysteresis",
    "threshold-scan", "stochastic-resonance", "noise-budget"};

const std::set<std::string>& command_keys(const std::string& cmd) {
    static const std::set<std::string> common = {"command", "output_dir", "seed", "workers"};
    static const std::map<std::string, std::set<std::string>> extra = {
        {"potential-scan", {"potential", "n_points"}},
        {"tune-sweep", {"potential", "anchor", "force_grid", "force_sign", "estimate"}},
        {"hysteresis", {"resonator", "sweep"}},
        {"threshold-scan", {"mass_grid", "chem_alpha", "geometry"}},
        {"stochastic-resonance",
         {"resonator", "drive", "noise", "integrator", "dt", "duration", "sample_stride",
          "ensemble", "discard", "demod_bandwidth", "welch", "thresholds", "histogram_bins",
          "inversion"}},
        {"noise-budget", {"resonator", "temperature", "sources", "measured_S_total",
                          "tolerance_dB"}}};
    static std::map<std::string, std::set<std::string>> merged = [] {
        std::map<std::string, std::set<std::string>> m;
        for (const auto& [cmd2, keys] : extra) {
            std::set<std::string> s = common;
            s.insert(keys.begin(), keys.end());
            m[cmd2] = std::move(s);
        }
        return m;
    }();
    auto it = merged.find(cmd);
    if (it == merged.end()) return common;
    return it->second;
}

// Schema and physics checks shared by validate and run. Populates `out` and
// appends problems; returns false when the scenario cannot be executed.
bool check_scenario(const json& doc, Parsed& out, std::vector<std::string>& errors,
                    std::vector<std::string>& warnings) {
    if (!doc.is_object()) {
        errors.push_back("scenario: top level must be an object");
        return false;
    }
    if (!has(doc, "command") || !doc["command"].is_string()) {
        errors.push_back("scenario: missing required string key 'command'");
        return false;
    }
    out.command = doc["command"].get<std::string>();
    if (known_commands.count(out.command) == 0) {
        errors.push_back("scenario: unknown command '" + out.command + "'");
        return false;
    }
    check_keys(doc, "scenario", command_keys(out.command), errors);

    if (!has(doc, "output_dir") || !doc["output_dir"].is_string())
        errors.push_back("scenario: missing required string key 'output_dir'");
    else
        out.output_dir = doc["output_dir"].get<std::string>();

    out.seed = 0;
    if (has(doc, "seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
            errors.push_back("scenario: 'seed' must be an unsigned integer");
        else
            out.seed = doc["seed"].get<std::uint64_t>();
    }
    out.workers = static_cast<int>(
        opt_int(doc, "scenario", "workers",
                static_cast<long>(std::max(1u, std::thread::hardware_concurrency())), errors));
    if (out.workers < 1) errors.push_back("scenario: 'workers' must be >= 1");

    out.body = doc;
    out.resolved = doc;
    out.resolved["seed"] = out.seed;
    out.resolved["workers"] = out.workers;

    const std::string& cmd = out.command;

    if (cmd == "potential-scan") {
        auto model = parse_potential(doc.value("potential", json("default")), "potential", errors);
        try {
            model.validate();
        } catch (const std::exception& e) {
            errors.push_back(std::string("potential: ") + e.what());
        }
        const long n = opt_int(doc, "scenario", "n_points", 400, errors);
        if (n < 8) errors.push_back("potential-scan: 'n_points' must be >= 8");
        out.resolved["potential"] = potential_to_json(model);
        out.resolved["n_points"] = n;
    } else if (cmd == "tune-sweep") {
        auto model = parse_potential(doc.value("potential", json("default")), "potential", errors);
        if (!has(doc, "anchor")) {
            errors.push_back("tune-sweep: missing required block 'anchor'");
        } else {
            const json& a = doc["anchor"];
            check_keys(a, "anchor", {"k0", "xi", "x_free"}, errors);
            tuning::BeamAnchor anchor;
            anchor.k0 = req_num(a, "anchor", "k0", errors);
            anchor.xi = opt_num(a, "anchor", "xi", 1.0, errors);
            anchor.x_free = req_num(a, "anchor", "x_free", errors);
            if (errors.empty()) {
                try {
                    anchor.validate(model);
                } catch (const std::exception& e) {
                    errors.push_back(std::string("anchor: ") + e.what());
                }
            }
            out.resolved["anchor"] =
                json{{"k0", anchor.k0}, {"xi", anchor.xi}, {"x_free", anchor.x_free}};
        }
        if (!has(doc, "force_grid"))
            errors.push_back("tune-sweep: missing required block 'force_grid'");
        else
            parse_grid(doc["force_grid"], "force_grid", errors);
        const long sign = opt_int(doc, "scenario", "force_sign", 1, errors);
        if (sign != 1 && sign != -1) errors.push_back("tune-sweep: 'force_sign' must be 1 or -1");
        out.resolved["force_sign"] = sign;
        if (has(doc, "estimate")) {
            check_keys(doc["estimate"], "estimate", {"k", "xi"}, errors);
            json est = doc["estimate"];
            if (has(doc, "anchor") && doc["anchor"].is_object()) {
                if (!has(est, "k")) est["k"] = doc["anchor"].value("k0", 0.0);
                if (!has(est, "xi")) est["xi"] = doc["anchor"].value("xi", 1.0);
            }
            out.resolved["estimate"] = est;
        }
        out.resolved["potential"] = potential_to_json(model);
    } else if (cmd == "hysteresis") {
        if (!has(doc, "resonator"))
            errors.push_back("hysteresis: missing required block 'resonator'");
        else
            out.resolved["resonator"] =
                resonator_to_json(parse_resonator(doc["resonator"], "resonator", errors));
        if (!has(doc, "sweep")) {
            errors.push_back("hysteresis: missing required block 'sweep'");
        } else {
            const json& s = doc["sweep"];
            const std::string type = s.is_object() ? s.value("type", std::string()) : std::string();
            if (type == "frequency") {
                check_keys(s, "sweep", {"type", "F_drive", "omega_min", "omega_max", "n_points"},
                           errors);
                req_num(s, "sweep", "F_drive", errors);
                const double lo = req_num(s, "sweep", "omega_min", errors);
                const double hi = req_num(s, "sweep", "omega_max", errors);
                if (!(hi > lo)) errors.push_back("sweep: requires omega_max > omega_min");
            } else if (type == "drive") {
                check_keys(s, "sweep", {"type", "omega", "F_min", "F_max", "n_points"}, errors);
                req_num(s, "sweep", "omega", errors);
                const double lo = req_num(s, "sweep", "F_min", errors);
                const double hi = req_num(s, "sweep", "F_max", errors);
                if (!(hi > lo)) errors.push_back("sweep: requires F_max > F_min");
            } else {
                errors.push_back("sweep: 'type' must be \"frequency\" or \"drive\"");
            }
            if (s.is_object() && opt_int(s, "sweep", "n_points", 400, errors) < 8)
                errors.push_back("sweep: 'n_points' must be >= 8");
            out.resolved["sweep"] = s;
            if (!has(out.resolved["sweep"], "n_points")) out.resolved["sweep"]["n_points"] = 400;
        }
    } else if (cmd == "threshold-scan") {
        if (!has(doc, "mass_grid"))
            errors.push_back("threshold-scan: missing required block 'mass_grid'");
        else
            parse_grid(doc["mass_grid"], "mass_grid", errors, true);
        out.resolved["chem_alpha"] = opt_num(doc, "scenario", "chem_alpha",
                                             potential::gold_contact_alpha_star, errors);
        if (has(doc, "geometry") && !doc["geometry"].is_string())
            check_keys(doc["geometry"], "geometry",
                       {"density", "t_over_l", "w_over_l", "freq_coeff", "Q", "lambda",
                        "t_over_l_floor"},
                       errors);
    } else if (cmd == "stochastic-resonance") {
        duffing::ResonatorParams p{};
        if (!has(doc, "resonator"))
            errors.push_back("stochastic-resonance: missing required block 'resonator'");
        else
            p = parse_resonator(doc["resonator"], "resonator", errors);
        out.resolved["resonator"] = resonator_to_json(p);

        sde::DriveSpec d;
        if (!has(doc, "drive")) {
            errors.push_back("stochastic-resonance: missing required block 'drive'");
        } else {
            const json& dj = doc["drive"];
            check_keys(dj, "drive", {"F_drive", "omega", "dF", "Omega", "phase0"}, errors);
            d.F_drive = req_num(dj, "drive", "F_drive", errors);
            d.omega = req_num(dj, "drive", "omega", errors);
            d.dF = opt_num(dj, "drive", "dF", 0.0, errors);
            d.Omega = opt_num(dj, "drive", "Omega", 0.0, errors);
            d.phase0 = opt_num(dj, "drive", "phase0", 0.0, errors);
            out.resolved["drive"] = json{{"F_drive", d.F_drive}, {"omega", d.omega},
                                         {"dF", d.dF},           {"Omega", d.Omega},
                                         {"phase0", d.phase0}};
        }

        if (!has(doc, "noise")) {
            errors.push_back("stochastic-resonance: missing required block 'noise'");
        } else {
            const json& nj = doc["noise"];
            check_keys(nj, "noise", {"S_F", "thermal_T"}, errors);
            const bool have_sf = has(nj, "S_F");
            const bool have_t = has(nj, "thermal_T");
            if (have_sf == have_t)
                errors.push_back("noise: give exactly one of 'S_F' or 'thermal_T'");
        }

        const std::string integ = doc.value("integrator", std::string("envelope"));
        if (integ != "envelope" && integ != "full")
            errors.push_back("stochastic-resonance: 'integrator' must be \"envelope\" or \"full\"");
        out.resolved["integrator"] = integ;

        const double dt = req_num(doc, "stochastic-resonance", "dt", errors);
        const double duration = req_num(doc, "stochastic-resonance", "duration", errors);
        if (errors.empty() && p.omega0 > 0.0) {
            if (integ == "full" && dt > 2.0 * pi / (50.0 * d.omega))
                errors.push_back("stochastic-resonance: dt too coarse for the full integrator "
                                 "(needs dt <= 2*pi / (50*omega))");
            if (integ == "envelope" && dt > 0.1 * p.Q / p.omega0)
                errors.push_back("stochastic-resonance: dt too coarse for the envelope "
                                 "integrator (needs dt <= 0.1*Q/omega0)");
            if (duration < 100.0 * dt)
                errors.push_back("stochastic-resonance: duration must cover >= 100 steps");
            const double decay = p.omega0 / p.Q;
            if (d.dF > 0.0 && d.Omega >= decay)
                errors.push_back("stochastic-resonance: modulation Omega must be below the "
                                 "decay rate omega0/Q");
            else if (d.dF > 0.0 && d.Omega >= 0.1 * decay)
                warnings.push_back("stochastic-resonance: Omega is within a decade of the decay "
                                   "rate omega0/Q; the slow-modulation picture needs Omega well "
                                   "below it");
            if (integ == "full" && !has(doc, "demod_bandwidth"))
                errors.push_back("stochastic-resonance: full integrator requires "
                                 "'demod_bandwidth'");
        }
        if (opt_int(doc, "stochastic-resonance", "ensemble", 1, errors) < 1)
            errors.push_back("stochastic-resonance: 'ensemble' must be >= 1");
        if (opt_int(doc, "stochastic-resonance", "sample_stride", 1, errors) < 1)
            errors.push_back("stochastic-resonance: 'sample_stride' must be >= 1");
        if (has(doc, "welch"))
            check_keys(doc["welch"], "welch", {"segment_length", "overlap", "window"}, errors);
        if (has(doc, "thresholds"))
            check_keys(doc["thresholds"], "thresholds", {"low", "high"}, errors);
        if (has(doc, "inversion"))
            check_keys(doc["inversion"], "inversion", {"x_m", "delta_omega"}, errors);
        out.resolved["ensemble"] = doc.value("ensemble", 1);
        out.resolved["sample_stride"] = doc.value("sample_stride", 1);
        if (p.omega0 > 0.0)
            out.resolved["discard"] =
                opt_num(doc, "stochastic-resonance", "discard", 20.0 * p.Q / p.omega0, errors);
    } else if (cmd == "noise-budget") {
        if (!has(doc, "resonator"))
            errors.push_back("noise-budget: missing required block 'resonator'");
        else
            out.resolved["resonator"] =
                resonator_to_json(parse_resonator(doc["resonator"], "resonator", errors));
        const double T = req_num(doc, "noise-budget", "temperature", errors);
        if (!(T > 0.0)) errors.push_back("noise-budget: 'temperature' must be > 0");
        if (has(doc, "sources")) {
            if (!doc["sources"].is_array()) {
                errors.push_back("noise-budget: 'sources' must be an array");
            } else {
                int i = 0;
                for (const auto& s : doc["sources"]) {
                    const std::string where = "sources[" + std::to_string(i++) + "]";
                    check_keys(s, where,
                               {"name", "S_F", "provenance", "transduction", "T_circuit"}, errors);
                    if (!has(s, "name") || !s["name"].is_string())
                        errors.push_back(where + ": missing required string key 'name'");
                    const bool have_sf = has(s, "S_F");
                    const bool have_tr = has(s, "transduction");
                    if (have_sf == have_tr)
                        errors.push_back(where + ": give exactly one of 'S_F' or 'transduction'");
                    if (have_tr) {
                        check_keys(s["transduction"], where + ".transduction", {"B", "l", "R"},
                                   errors);
                        if (!has(s, "T_circuit"))
                            errors.push_back(where + ": 'transduction' requires 'T_circuit'");
                    }
                }
            }
        }
        out.resolved["tolerance_dB"] = doc.value("tolerance_dB", 1.0);
    }

    return errors.empty();
}

// ---------- output helpers ----------

void write_named_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& [name, vals] : rows) {
        out << name;
        for (double v : vals) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::filesystem::path& dir, const Parsed& sc,
                    const std::vector<std::string>& outputs, const json& results) {
    json m;
    m["version"] = version;
    m["generated_at"] = iso_timestamp();
    m["command"] = sc.command;
    m["scenario"] = sc.resolved;
    m["outputs"] = outputs;
    m["results"] = results;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("manifest: cannot open " + (dir / "manifest.json").string());
    out << m.dump(2) << '\n';
}

// ---------- command runners ----------

void run_potential_scan(const Parsed& sc, const std::filesystem::path& dir) {
    const auto model = potential_from_json(sc.resolved["potential"]);
    const long n = sc.resolved["n_points"].get<long>();
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n - 1);
        const double x = model.x_min_valid + (model.x_max_valid - model.x_min_valid) * u;
        rows.push_back({x, potential::eval(model, x, 0), potential::eval(model, x, 1),
                        potential::eval(model, x, 2), -potential::eval(model, x, 2),
                        -potential::eval(model, x, 4) / 6.0});
    }
    csv::write(dir / "potential_scan.csv",
               {"x_m", "U_J", "dU_dx_N", "d2U_dx2_N_per_m", "dk_N_per_m", "alpha_N_per_m3"},
               rows);
    json results;
    try {
        const double xs = potential::max_attraction_point(model);
        results["x_star"] = xs;
        results["alpha_at_x_star"] = -potential::eval(model, xs, 4) / 6.0;
    } catch (const potential::NoSignChangeError&) {
        results["x_star"] = nullptr;
    }
    write_manifest(dir, sc, {"potential_scan.csv"}, results);
}

void run_tune_sweep(const Parsed& sc, const std::filesystem::path& dir) {
    const auto model = potential_from_json(sc.resolved["potential"]);
    std::vector<std::string> dummy;
    tuning::BeamAnchor anchor;
    anchor.k0 = sc.resolved["anchor"]["k0"].get<double>();
    anchor.xi = sc.resolved["anchor"]["xi"].get<double>();
    anchor.x_free = sc.resolved["anchor"]["x_free"].get<double>();
    std::vector<std::string> errs;
    const auto grid = parse_grid(sc.body["force_grid"], "force_grid", errs);
    const int sign = sc.resolved["force_sign"].get<int>();

    const auto curve = tuning::tune_curve(model, anchor, grid, sign);
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.points.size());
    for (const auto& p : curve.points)
        rows.push_back({p.F, p.x_eq, p.dk, p.alpha, p.k_eff, p.stable ? 1.0 : 0.0});
    csv::write(dir / "tune_curve.csv",
               {"F_N", "x_eq_m", "dk_N_per_m", "alpha_N_per_m3", "k_eff_N_per_m", "stable"},
               rows);
    std::vector<std::string> outputs = {"tune_curve.csv"};

    json results;
    results["truncated"] = curve.truncated;
    results["last_stable_F"] = curve.last_stable_F;
    results["n_points"] = curve.points.size();

    if (sc.resolved.contains("estimate") && curve.points.size() >= 7) {
        const double k = sc.resolved["estimate"]["k"].get<double>();
        const double xi = sc.resolved["estimate"]["xi"].get<double>();
        std::vector<std::pair<double, double>> samples;
        samples.reserve(curve.points.size());
        for (const auto& p : curve.points) samples.emplace_back(p.F, p.dk);
        const auto est = tuning::estimate_alpha_from_dk(samples, k, xi);
        std::vector<std::vector<double>> arows;
        for (const auto& a : est)
            arows.push_back({a.F, a.alpha, a.interior ? 1.0 : 0.0});
        csv::write(dir / "alpha_estimate.csv", {"F_N", "alpha_N_per_m3", "interior"}, arows);
        outputs.push_back("alpha_estimate.csv");
    }
    write_manifest(dir, sc, outputs, results);
}

void run_hysteresis(const Parsed& sc, const std::filesystem::path& dir) {
    std::vector<std::string> errs;
    const auto p = parse_resonator(sc.body["resonator"], "resonator", errs);
    const json& s = sc.resolved["sweep"];
    const std::string type = s["type"].get<std::string>();
    const int n = s["n_points"].get<int>();

    duffing::SweepBranch up, down;
    if (type == "frequency") {
        const double F = s["F_drive"].get<double>();
        up = duffing::hysteresis_sweep(p, F, s["omega_min"].get<double>(),
                                       s["omega_max"].get<double>(),
                                       duffing::SweepDirection::up, n);
        down = duffing::hysteresis_sweep(p, F, s["omega_min"].get<double>(),
                                         s["omega_max"].get<double>(),
                                         duffing::SweepDirection::down, n);
    } else {
        const double w = s["omega"].get<double>();
        up = duffing::drive_sweep(p, w, s["F_min"].get<double>(), s["F_max"].get<double>(),
                                  duffing::SweepDirection::up, n);
        down = duffing::drive_sweep(p, w, s["F_min"].get<double>(), s["F_max"].get<double>(),
                                    duffing::SweepDirection::down, n);
    }

    auto dump = [&](const duffing::SweepBranch& b, const char* name) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < b.control.size(); ++i)
            rows.push_back({b.control[i], b.amplitude[i], b.phase[i]});
        csv::write(dir / name, {"control", "amplitude_m", "phase_rad"}, rows);
    };
    dump(up, "sweep_up.csv");
    dump(down, "sweep_down.csv");

    std::vector<std::vector<double>> jrows;
    for (const auto& j : up.jumps)
        jrows.push_back({0.0, j.control, j.from_amplitude, j.to_amplitude});
    for (const auto& j : down.jumps)
        jrows.push_back({1.0, j.control, j.from_amplitude, j.to_amplitude});
    csv::write(dir / "jumps.csv",
               {"direction_up0_down1", "control", "from_amplitude_m", "to_amplitude_m"}, jrows);

    json results;
    if (p.alpha != 0.0) {
        const auto cp = duffing::critical_point(p);
        results["F_c"] = cp.F_c;
        results["omega_c"] = cp.omega_c;
        results["x_c"] = cp.x_c;
    }
    results["jumps_up"] = up.jumps.size();
    results["jumps_down"] = down.jumps.size();
    write_manifest(dir, sc, {"sweep_up.csv", "sweep_down.csv", "jumps.csv"}, results);
}

void run_threshold_scan(const Parsed& sc, const std::filesystem::path& dir) {
    std::vector<std::string> errs;
    const auto grid = parse_grid(sc.body["mass_grid"], "mass_grid", errs, true);
    const double chem_alpha = sc.resolved["chem_alpha"].get<double>();
    duffing::GeometryScaling geo = duffing::GeometryScaling::reference_beam();
    if (sc.body.contains("geometry") && sc.body["geometry"].is_object()) {
        const json& g = sc.body["geometry"];
        geo.density = g.value("density", geo.density);
        geo.t_over_l = g.value("t_over_l", geo.t_over_l);
        geo.w_over_l = g.value("w_over_l", geo.w_over_l);
        geo.freq_coeff = g.value("freq_coeff", geo.freq_coeff);
        geo.Q = g.value("Q", geo.Q);
        geo.lambda = g.value("lambda", geo.lambda);
        geo.t_over_l_floor = g.value("t_over_l_floor", geo.t_over_l_floor);
    }
    const auto intr =
        duffing::threshold_vs_mass(grid, duffing::ThresholdMode::intrinsic, 0.0, geo);
    const auto chem =
        duffing::threshold_vs_mass(grid, duffing::ThresholdMode::chemical, chem_alpha, geo);
    std::vector<std::vector<double>> rows;
    for (const auto& p : intr) rows.push_back({p.mass, p.F_c, 0.0});
    for (const auto& p : chem) rows.push_back({p.mass, p.F_c, 1.0});
    csv::write(dir / "threshold.csv", {"mass_kg", "Fc_N", "mode_intrinsic0_chemical1"}, rows);

    json results;
    if (!intr.empty() && !chem.empty()) {
        results["Fc_intrinsic_at_min_mass"] = intr.front().F_c;
        results["Fc_chemical_at_min_mass"] = chem.front().F_c;
        results["separation_orders_at_min_mass"] =
            std::log10(intr.front().F_c / chem.front().F_c);
    }
    write_manifest(dir, sc, {"threshold.csv"}, results);
}

// Two dominant histogram peaks of the envelope amplitude, low first.
std::pair<double, double> find_plateaus(std::span<const double> amps) {
    const auto h = analysis::amplitude_histogram(amps, 64);
    const std::size_t nb = h.counts.size();
    std::vector<double> smooth(nb, 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
        double s = 0.0;
        int c = 0;
        for (int o = -1; o <= 1; ++o) {
            const auto j = static_cast<std::ptrdiff_t>(i) + o;
            if (j >= 0 && j < static_cast<std::ptrdiff_t>(nb)) {
                s += static_cast<double>(h.counts[static_cast<std::size_t>(j)]);
                ++c;
            }
        }
        smooth[i] = s / c;
    }
    std::size_t p1 = 0;
    for (std::size_t i = 1; i < nb; ++i)
        if (smooth[i] > smooth[p1]) p1 = i;
    std::size_t p2 = nb; // sentinel
    for (std::size_t i = 0; i < nb; ++i) {
        const auto dist = i > p1 ? i - p1 : p1 - i;
        if (dist < 8) continue;
        if (p2 == nb || smooth[i] > smooth[p2]) p2 = i;
    }
    if (p2 == nb) p2 = p1; // unimodal record; degenerate plateaus
    auto center = [&](std::size_t i) { return 0.5 * (h.edges[i] + h.edges[i + 1]); };
    double a = center(p1), b = center(p2);
    if (a > b) std::swap(a, b);
    return {a, b};
}

struct SrEnsembleResult {
    std::vector<double> psd;              // averaged, matches f_grid
    analysis::SpectrumResult spec;        // first member's grid/window
    std::vector<double> member0_amp;      // amplitude series of member 0
    double amp_dt = 0.0;
    sde::TrajectorySeries member0_traj;   // raw series of member 0
    std::vector<std::size_t> hist_counts; // pooled
    std::vector<double> hist_edges;
    double gamma_k = 0.0;
    double dwell_low = 0.0, dwell_high = 0.0;
    int n_switches = 0;
    std::vector<double> switch_times; // member 0 only
    double plateau_low = 0.0, plateau_high = 0.0;
    double thr_low = 0.0, thr_high = 0.0;
    // averaged PSD of the discretized +-1 state record: its background is the
    // pure telegraph Lorentzian, free of intrawell fluctuation power
    std::vector<double> state_psd;
    // state-conditioned mean of the in-phase quadrature; the drive modulation
    // tilts the rotating-frame potential along this coordinate
    double u_low = std::numeric_limits<double>::quiet_NaN();
    double u_high = std::numeric_limits<double>::quiet_NaN();
};

// One ensemble (all members share drive/noise; streams distinguish members).
SrEnsembleResult run_sr_ensemble(const duffing::ResonatorParams& p, const sde::DriveSpec& d,
                                 double S_F, std::uint64_t seed, std::uint64_t stream_base,
                                 bool envelope, double dt, double duration, int stride,
                                 double discard, double demod_bw, int members, int workers,
                                 std::size_t seg_len, double overlap, analysis::Window win,
                                 const std::optional<std::pair<double, double>>& thr_override,
                                 int hist_bins) {
    std::vector<std::vector<double>> amp(static_cast<std::size_t>(members));
    std::vector<std::vector<double>> uq(static_cast<std::size_t>(members));
    std::vector<sde::TrajectorySeries> raw(static_cast<std::size_t>(members));
    double amp_dt = 0.0;

    auto worker = [&](int first) {
        for (int m = first; m < members; m += workers) {
            sde::NoiseSpec n;
            n.S_F = S_F;
            n.seed = seed;
            n.stream = stream_base + static_cast<std::uint64_t>(m);
            sde::TrajectorySeries traj =
                envelope ? sde::simulate_envelope(p, d, n, dt, duration, stride)
                         : sde::simulate_full(p, d, n, dt, duration, stride);
            sde::TrajectorySeries env =
                envelope ? traj : analysis::demodulate(traj, d.omega, demod_bw);
            const auto skip = static_cast<std::size_t>(discard / env.dt);
            std::vector<double> a, u;
            a.reserve(env.size() > skip ? env.size() - skip : 0);
            u.reserve(a.capacity());
            for (std::size_t i = skip; i < env.size(); ++i) {
                a.push_back(env.amplitude(i));
                u.push_back(env.ch1[i]);
            }
            amp[static_cast<std::size_t>(m)] = std::move(a);
            uq[static_cast<std::size_t>(m)] = std::move(u);
            if (m == 0) {
                raw[0] = std::move(traj);
            }
        }
    };
    {
        std::vector<std::future<void>> futs;
        const int nw = std::min(workers, members);
        futs.reserve(static_cast<std::size_t>(nw));
        for (int w = 1; w < nw; ++w)
            futs.push_back(std::async(std::launch::async, worker, w));
        worker(0);
        for (auto& f : futs) f.get();
    }
    amp_dt = dt * stride;

    SrEnsembleResult out;
    out.amp_dt = amp_dt;
    out.member0_amp = amp[0];
    out.member0_traj = std::move(raw[0]);

    // averaged Welch PSD of the amplitude
    for (int m = 0; m < members; ++m) {
        const auto s = analysis::welch_psd(amp[static_cast<std::size_t>(m)], amp_dt, seg_len,
                                           overlap, win);
        if (m == 0) {
            out.spec = s;
            out.psd = s.psd;
        } else {
            for (std::size_t i = 0; i < out.psd.size(); ++i) out.psd[i] += s.psd[i];
        }
    }
    for (auto& v : out.psd) v /= members;
    out.spec.psd = out.psd;

    // thresholds from pooled member-0 plateaus unless pinned by the scenario
    const auto [plo, phi] = find_plateaus(out.member0_amp);
    out.plateau_low = plo;
    out.plateau_high = phi;
    if (thr_override) {
        out.thr_low = thr_override->first;
        out.thr_high = thr_override->second;
    } else {
        out.thr_low = plo + 0.4 * (phi - plo);
        out.thr_high = plo + 0.6 * (phi - plo);
    }

    double switch_sum = 0.0, t_sum = 0.0, dl_sum = 0.0, dh_sum = 0.0;
    int dl_n = 0, dh_n = 0;
    double u_sum[2] = {0.0, 0.0}, u_cnt[2] = {0.0, 0.0};
    int state_psd_members = 0;
    bool telegraph_ok = out.thr_high > out.thr_low;
    if (telegraph_ok) {
        for (int m = 0; m < members; ++m) {
            const auto& a = amp[static_cast<std::size_t>(m)];
            const double lo = *std::min_element(a.begin(), a.end());
            const double hi = *std::max_element(a.begin(), a.end());
            if (!(out.thr_low >= lo && out.thr_high <= hi)) continue;
            const auto tel = analysis::two_state(a, amp_dt, out.thr_low, out.thr_high);
            switch_sum += tel.n_switches;
            t_sum += amp_dt * static_cast<double>(a.size());
            if (tel.dwell_low > 0.0) { dl_sum += tel.dwell_low; ++dl_n; }
            if (tel.dwell_high > 0.0) { dh_sum += tel.dwell_high; ++dh_n; }
            if (m == 0) out.switch_times = tel.switch_times;

            const auto& u = uq[static_cast<std::size_t>(m)];
            std::vector<double> sgn(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                const int st = tel.states[i];
                sgn[i] = st ? 1.0 : -1.0;
                u_sum[st] += u[i];
                u_cnt[st] += 1.0;
            }
            const auto sp = analysis::welch_psd(sgn, amp_dt, seg_len, overlap, win);
            if (out.state_psd.empty()) {
                out.state_psd = sp.psd;
            } else {
                for (std::size_t i = 0; i < out.state_psd.size(); ++i)
                    out.state_psd[i] += sp.psd[i];
            }
            ++state_psd_members;
        }
    }
    if (state_psd_members > 0)
        for (auto& v : out.state_psd) v /= state_psd_members;
    if (u_cnt[0] > 0.0 && u_cnt[1] > 0.0) {
        out.u_low = u_sum[0] / u_cnt[0];
        out.u_high = u_sum[1] / u_cnt[1];
    }
    out.n_switches = static_cast<int>(switch_sum);
    out.gamma_k = t_sum > 0.0 ? switch_sum / t_sum : 0.0;
    out.dwell_low = dl_n ? dl_sum / dl_n : 0.0;
    out.dwell_high = dh_n ? dh_sum / dh_n : 0.0;

    // pooled histogram on a common range
    double lo = amp[0][0], hi = amp[0][0];
    for (const auto& a : amp)
        for (double v : a) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (!(hi > lo)) hi = lo + 1.0;
    out.hist_edges.resize(static_cast<std::size_t>(hist_bins) + 1);
    out.hist_counts.assign(static_cast<std::size_t>(hist_bins), 0);
    for (int i = 0; i <= hist_bins; ++i)
        out.hist_edges[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / hist_bins;
    for (const auto& a : amp)
        for (double v : a) {
            auto b = static_cast<std::ptrdiff_t>((v - lo) / (hi - lo) * hist_bins);
            b = std::clamp<std::ptrdiff_t>(b, 0, hist_bins - 1);
            ++out.hist_counts[static_cast<std::size_t>(b)];
        }
    return out;
}

void run_stochastic_resonance(const Parsed& sc, const std::filesystem::path& dir) {
    std::vector<std::string> errs;
    const auto p = parse_resonator(sc.body["resonator"], "resonator", errs);
    sde::DriveSpec d;
    d.F_drive = sc.resolved["drive"]["F_drive"].get<double>();
    d.omega = sc.resolved["drive"]["omega"].get<double>();
    d.dF = sc.resolved["drive"]["dF"].get<double>();
    d.Omega = sc.resolved["drive"]["Omega"].get<double>();
    d.phase0 = sc.resolved["drive"]["phase0"].get<double>();

    double S_F = 0.0;
    if (sc.body["noise"].contains("S_F"))
        S_F = sc.body["noise"]["S_F"].get<double>();
    else
        S_F = sde::thermal_noise_for(p, sc.body["noise"]["thermal_T"].get<double>()).S_F;

    const bool envelope = sc.resolved["integrator"].get<std::string>() == "envelope";
    const double dt = sc.body["dt"].get<double>();
    const double duration = sc.body["duration"].get<double>();
    const int stride = sc.resolved["sample_stride"].get<int>();
    const int members = sc.resolved["ensemble"].get<int>();
    const double discard = sc.resolved["discard"].get<double>();
    const double demod_bw = sc.body.value("demod_bandwidth", 0.0);

    const auto n_amp = static_cast<std::size_t>((duration - discard) / (dt * stride));
    std::size_t seg_len = 64;
    while (seg_len * 16 <= n_amp && seg_len < (1u << 20)) seg_len *= 2;
    double overlap = 0.5;
    analysis::Window win = analysis::Window::hann;
    if (sc.body.contains("welch")) {
        const json& w = sc.body["welch"];
        seg_len = w.value("segment_length", seg_len);
        overlap = w.value("overlap", overlap);
        if (w.value("window", std::string("hann")) == "rect") win = analysis::Window::rect;
    }
    std::optional<std::pair<double, double>> thr;
    if (sc.body.contains("thresholds"))
        thr = std::make_pair(sc.body["thresholds"]["low"].get<double>(),
                             sc.body["thresholds"]["high"].get<double>());
    const int hist_bins = sc.body.value("histogram_bins", 60);

    const bool modulated = d.dF > 0.0;
    sde::DriveSpec d_nomod = d;
    d_nomod.dF = 0.0;
    d_nomod.Omega = 0.0;

    // unmodulated ensemble on even streams, modulated on odd: both runs stay
    // reproducible independently of whether the other is enabled
    const auto base = run_sr_ensemble(p, d_nomod, S_F, sc.seed, 0, envelope, dt, duration,
                                      stride, discard, demod_bw, members, sc.workers, seg_len,
                                      overlap, win, thr, hist_bins);
    std::optional<SrEnsembleResult> mod;
    if (modulated)
        mod = run_sr_ensemble(p, d, S_F, sc.seed, 1u << 20, envelope, dt, duration, stride,
                              discard, demod_bw, members, sc.workers, seg_len, overlap, win, thr,
                              hist_bins);

    std::vector<std::string> outputs;
    const auto& traj0 = modulated ? mod->member0_traj : base.member0_traj;
    trajfile::write(dir / "trajectory.bsim", traj0);
    outputs.push_back("trajectory.bsim");

    auto dump_spec = [&](const analysis::SpectrumResult& s, const char* name) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < s.f_grid.size(); ++i)
            rows.push_back({s.f_grid[i], s.psd[i]});
        csv::write(dir / name, {"f_Hz", "psd_m2_per_Hz"}, rows);
        outputs.emplace_back(name);
    };
    dump_spec(base.spec, "spectrum_noise.csv");
    if (mod) dump_spec(mod->spec, "spectrum_mod.csv");

    auto dump_state_spec = [&](const std::vector<double>& psd, const char* name) {
        if (psd.empty()) return;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < psd.size() && i < base.spec.f_grid.size(); ++i)
            rows.push_back({base.spec.f_grid[i], psd[i]});
        csv::write(dir / name, {"f_Hz", "psd_per_Hz"}, rows);
        outputs.emplace_back(name);
    };
    dump_state_spec(base.state_psd, "spectrum_state_noise.csv");
    if (mod) dump_state_spec(mod->state_psd, "spectrum_state_mod.csv");

    {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < base.hist_counts.size(); ++i)
            rows.push_back({base.hist_edges[i], base.hist_edges[i + 1],
                            static_cast<double>(base.hist_counts[i])});
        csv::write(dir / "histogram.csv", {"edge_lo_m", "edge_hi_m", "count"}, rows);
        outputs.emplace_back("histogram.csv");
    }
    {
        std::vector<std::vector<double>> rows;
        for (double t : base.switch_times) rows.push_back({t});
        csv::write(dir / "switches.csv", {"t_s"}, rows);
        outputs.emplace_back("switches.csv");
    }

    json results;
    results["S_F_injected"] = S_F;
    results["gamma_k"] = base.gamma_k;
    results["n_switches"] = base.n_switches;
    results["dwell_low"] = base.dwell_low;
    results["dwell_high"] = base.dwell_high;
    results["plateau_low"] = base.plateau_low;
    results["plateau_high"] = base.plateau_high;
    if (std::isfinite(base.u_low) && std::isfinite(base.u_high)) {
        results["u_low"] = base.u_low;
        results["u_high"] = base.u_high;
    }
    results["threshold_low"] = base.thr_low;
    results["threshold_high"] = base.thr_high;

    if (mod) {
        // x_m is half the vibration-amplitude separation of the two bistable
        // states, read from the envelope plateaus of the unmodulated run
        double x_m = 0.5 * (base.plateau_high - base.plateau_low);
        // adiabatic two-state theory: the PSD ratio at Omega equals
        // pi (gamma_k/delta_omega) (x_m dF m w / S)^2 when delta_omega is
        // (pi/4) times the equivalent noise bandwidth of the estimator
        const double enbw_hz =
            (win == analysis::Window::hann ? 1.5 : 1.0) * mod->spec.resolution;
        double delta_omega = 0.25 * pi * enbw_hz;
        if (sc.body.contains("inversion")) {
            x_m = sc.body["inversion"].value("x_m", x_m);
            delta_omega = sc.body["inversion"].value("delta_omega", delta_omega);
        }
        try {
            const double snr_peak = analysis::snr_at(mod->spec, d.Omega);
            results["snr_peak_over_background"] = snr_peak;
            // SNR convention for the inversion: modulated over unmodulated
            // power at Omega
            const auto bin =
                static_cast<std::size_t>(std::lround(d.Omega / (2.0 * pi) / mod->spec.resolution));
            const double snr_ratio = mod->spec.psd[bin] / base.spec.psd[bin];
            results["snr_mod_over_noise"] = snr_ratio;
            results["snr_excess"] = snr_ratio - 1.0;
            // diagnostic: the same ratio on the discretized state record,
            // whose background is free of intrawell fluctuation power
            if (bin < mod->state_psd.size() && bin < base.state_psd.size() &&
                base.state_psd[bin] > 0.0)
                results["snr_excess_state"] =
                    mod->state_psd[bin] / base.state_psd[bin] - 1.0;
            if (base.gamma_k > 0.0 && x_m > 0.0 && snr_ratio > 1.0) {
                const double S_tot = analysis::infer_total_noise(
                    snr_ratio, d.dF, p.m_eff, d.omega, x_m, delta_omega, base.gamma_k);
                results["S_total_inferred"] = S_tot;
                results["sqrt_S_total_inferred"] = std::sqrt(S_tot);
            }
            results["x_m"] = x_m;
            results["delta_omega"] = delta_omega;
        } catch (const std::exception& e) {
            results["snr_error"] = e.what();
        }
    }

    std::ofstream sout(dir / "summary.json");
    sout << results.dump(2) << '\n';
    outputs.emplace_back("summary.json");
    write_manifest(dir, sc, outputs, results);
}

void run_noise_budget(const Parsed& sc, const std::filesystem::path& dir) {
    std::vector<std::string> errs;
    const auto p = parse_resonator(sc.body["resonator"], "resonator", errs);
    const double T = sc.body["temperature"].get<double>();

    std::vector<noisebudget::NoiseSource> sources;
    sources.push_back(noisebudget::thermal_source(p, T));
    if (sc.body.contains("sources")) {
        for (const auto& s : sc.body["sources"]) {
            if (s.contains("transduction")) {
                noisebudget::Transduction tr;
                tr.B = s["transduction"]["B"].get<double>();
                tr.l = s["transduction"]["l"].get<double>();
                tr.R = s["transduction"]["R"].get<double>();
                auto src = noisebudget::johnson_source(tr, s["T_circuit"].get<double>());
                src.name = s["name"].get<std::string>();
                sources.push_back(src);
            } else {
                noisebudget::NoiseSource src;
                src.name = s["name"].get<std::string>();
                src.S_F = s["S_F"].get<double>();
                const std::string prov = s.value("provenance", std::string("custom"));
                src.provenance = prov == "johnson"      ? noisebudget::Provenance::johnson
                                 : prov == "backaction" ? noisebudget::Provenance::backaction
                                 : prov == "phase"      ? noisebudget::Provenance::phase
                                                        : noisebudget::Provenance::custom;
                sources.push_back(src);
            }
        }
    }

    const auto budget = noisebudget::combine(sources, T);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (const auto& e : budget.breakdown)
        rows.push_back({e.name, {e.S_F, std::sqrt(e.S_F), e.fraction, e.dB_rel_thermal}});
    write_named_csv(dir / "budget.csv",
                    {"name", "S_F_N2_per_Hz", "sqrt_S_F_N_per_rtHz", "fraction",
                     "dB_rel_thermal"},
                    rows);
    std::vector<std::string> outputs = {"budget.csv"};

    json results;
    results["S_total"] = budget.S_total;
    results["sqrt_S_total"] = std::sqrt(budget.S_total);
    results["S_parametric"] = budget.S_parametric;
    results["T_parametric"] =
        std::isfinite(budget.T_parametric) ? json(budget.T_parametric) : json(nullptr);
    if (sc.body.contains("measured_S_total")) {
        const auto rep = noisebudget::total_vs_measured(
            budget.S_total, sc.body["measured_S_total"].get<double>(),
            sc.resolved["tolerance_dB"].get<double>());
        results["consistency"] = json{{"power_ratio", rep.power_ratio},
                                      {"amplitude_ratio", rep.amplitude_ratio},
                                      {"dB", rep.dB},
                                      {"pass", rep.pass}};
    }
    write_manifest(dir, sc, outputs, results);
}

json load_json(const std::filesystem::path& path, std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back("scenario: cannot read " + path.string());
        return json();
    }
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        errors.push_back(std::string("scenario: JSON parse error: ") + e.what());
        return json();
    }
}

} // namespace

json potential_to_json(const potential::PotentialModel& model) {
    json terms = json::array();
    for (const auto& t : model.terms)
        terms.push_back({{"coefficient", t.coefficient}, {"exponent", t.exponent}});
    return json{{"terms", terms},
                {"window", {{"min", model.x_min_valid}, {"max", model.x_max_valid}}}};
}

potential::PotentialModel potential_from_json(const json& j) {
    if (!j.is_object() || !j.contains("terms") || !j.contains("window"))
        throw std::invalid_argument("potential: expected keys 'terms' and 'window'");
    potential::PotentialModel m;
    for (const auto& t : j["terms"]) {
        potential::PowerLawTerm term;
        term.coefficient = t.at("coefficient").get<double>();
        term.exponent = t.at("exponent").get<double>();
        m.terms.push_back(term);
    }
    m.x_min_valid = j["window"].at("min").get<double>();
    m.x_max_valid = j["window"].at("max").get<double>();
    m.validate();
    return m;
}

Report validate_file(const std::filesystem::path& scenario_path) {
    Report r;
    const json doc = load_json(scenario_path, r.errors);
    if (r.errors.empty()) {
        Parsed sc;
        check_scenario(doc, sc, r.errors, r.warnings);
        r.resolved = sc.resolved;
    }
    r.ok = r.errors.empty();
    return r;
}

void run_file(const std::filesystem::path& scenario_path, const Overrides& overrides) {
    std::vector<std::string> errors, warnings;
    json doc = load_json(scenario_path, errors);
    if (!errors.empty()) throw ValidationError(std::move(errors));

    if (overrides.output_dir) doc["output_dir"] = overrides.output_dir->string();
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.workers) doc["workers"] = *overrides.workers;

    Parsed sc;
    if (!check_scenario(doc, sc, errors, warnings)) throw ValidationError(std::move(errors));

    std::filesystem::create_directories(sc.output_dir);
    if (sc.command == "potential-scan") run_potential_scan(sc, sc.output_dir);
    else if (sc.command == "tune-sweep") run_tune_sweep(sc, sc.output_dir);
    else if (sc.command == "hysteresis") run_hysteresis(sc, sc.output_dir);
    else if (sc.command == "threshold-scan") run_threshold_scan(sc, sc.output_dir);
    else if (sc.command == "stochastic-resonance") run_stochastic_resonance(sc, sc.output_dir);
    else if (sc.command == "noise-budget") run_noise_budget(sc, sc.output_dir);
}

} // namespace bsim::scenario
