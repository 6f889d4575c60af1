// config.hpp: JSON run configuration: parsing, defaults, validation, echo

#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ccqed/dynamics.hpp"
#include "ccqed/error.hpp"
#include "ccqed/model_core.hpp"
#include "ccqed/schedule.hpp"
#include "ccqed/schedule_design.hpp"

namespace ccqed::io {

using json = nlohmann::ordered_json;

enum class Scenario { eigens, ldos, dynamics, shape, adiabaticity };

inline std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::eigens: return "eigens";
        case Scenario::ldos: return "ldos";
        case Scenario::dynamics: return "dynamics";
        case Scenario::shape: return "shape";
        case Scenario::adiabaticity: return "adiabaticity";
    }
    return "unknown";
}

inline Scenario scenario_from_string(std::string_view s, const std::string& path = "scenario") {
    for (Scenario sc : {Scenario::eigens, Scenario::ldos, Scenario::dynamics, Scenario::shape, Scenario::adiabaticity})
        if (to_string(sc) == s) return sc;
    throw ConfigError(path, "unknown scenario '" + std::string(s) + "'");
}

// Constant-detuning default when a config asks for {"kind": "constant"} without a value.
inline constexpr double kDefaultConstantDeltaOverEta = 50.0;

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::zero;
    double value = 0.0;  // constant
    bool value_set = false;
    double rate = 0.0;   // linear_ramp
    std::vector<SamplePoint> samples;  // sampled
};

struct TargetConfig {
    GaussianTarget target;
    std::size_t n_samples = 1201;
    DesignOptions design;
};

struct SweepConfig {
    double min = -4.0;
    double max = 4.0;
    std::size_t points = 401;
};

struct AnalysisConfig {
    std::size_t pulse_samples = 2401;
    double threshold_fraction = 0.01;
    double decay_fit_start = 5.0;
    double decay_fit_end = 80.0;
};

struct AdiabaticityConfig {
    AdiabaticRegime regime = AdiabaticRegime::shaping;
    double margin_factor = 5.0;
};

struct OutputConfig {
    std::string dir = "out";
};

struct RunConfig {
    Scenario scenario = Scenario::shape;
    SystemParams system;
    std::size_t n_modes = 2001;
    double bandwidth = 40.0;
    IntegrationOptions integration;
    ScheduleSpec schedule;
    TargetConfig target;
    SweepConfig sweep;
    AnalysisConfig analysis;
    AdiabaticityConfig adiabaticity;
    OutputConfig output;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || a == key;
        if (!ok) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
}

inline std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline void read_number(const json& obj, const std::string& path, std::string_view key, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(join(path, key), "must be finite");
}

inline void read_count(const json& obj, const std::string& path, std::string_view key, std::size_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(join(path, key), "expected a nonnegative integer");
    out = v.get<std::size_t>();
}

inline void read_string(const json& obj, const std::string& path, std::string_view key, std::string& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    out = v.get<std::string>();
}

inline ScheduleKind schedule_kind_from_string(const std::string& s, const std::string& path) {
    for (ScheduleKind k : {ScheduleKind::constant, ScheduleKind::zero, ScheduleKind::linear_ramp,
                           ScheduleKind::sampled, ScheduleKind::designed})
        if (to_string(k) == s) return k;
    throw ConfigError(path, "unknown schedule kind '" + s + "'");
}

template <class F>
void guarded(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace detail

// Validates a fully-populated RunConfig against the module invariants.
inline void validate(const RunConfig& c) {
    detail::guarded("system", [&] { c.system.validate(); });
    if (c.n_modes < 2) throw ConfigError("continuum.n_modes", "must be >= 2");
    if (!(c.bandwidth > 0.0)) throw ConfigError("continuum.bandwidth", "must be > 0");
    if (!(c.integration.dt > 0.0)) throw ConfigError("integration.dt", "must be > 0");
    if (!(c.integration.t_final >= c.integration.dt)) throw ConfigError("integration.t_final", "must be >= dt");
    if (c.integration.snapshot_stride < 1) throw ConfigError("integration.snapshot_stride", "must be >= 1");
    detail::guarded("target", [&] { c.target.target.validate(); });
    if (c.target.n_samples < 2) throw ConfigError("target.n_samples", "must be >= 2");
    if (!(c.target.design.feasibility_margin > 0.0 && c.target.design.feasibility_margin < 1.0))
        throw ConfigError("target.feasibility_margin", "must lie in (0, 1)");
    if (!(c.target.design.fraction.delta_max_over_eta > 0.0))
        throw ConfigError("target.delta_max_over_eta", "must be > 0");
    if (c.sweep.points < 2 || !(c.sweep.max > c.sweep.min))
        throw ConfigError("sweep", "need max > min and at least two points");
    if (c.analysis.pulse_samples < 2) throw ConfigError("analysis.pulse_samples", "must be >= 2");
    if (!(c.analysis.threshold_fraction > 0.0 && c.analysis.threshold_fraction < 1.0))
        throw ConfigError("analysis.threshold_fraction", "must lie in (0, 1)");
    if (c.schedule.kind == ScheduleKind::sampled && c.schedule.samples.size() < 2)
        throw ConfigError("schedule.samples", "a sampled schedule needs at least two (t, delta) pairs");
    if (c.schedule.kind == ScheduleKind::sampled)
        detail::guarded("schedule.samples", [&] { make_sampled(c.schedule.samples); });
    if (c.output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

// Reads a two-column (t, delta) CSV with a header row.
inline std::vector<SamplePoint> read_schedule_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open schedule CSV '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<SamplePoint> pts;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw Error("malformed schedule CSV row in '" + path + "': " + line);
        try {
            pts.push_back({std::stod(a), std::stod(b)});
        } catch (const std::exception&) {
            throw Error("malformed schedule CSV row in '" + path + "': " + line);
        }
    }
    return pts;
}

inline RunConfig config_from_json(const json& doc, std::string_view scenario_override = {}) {
    using namespace detail;
    reject_unknown(doc, "",
                   {"scenario", "system", "continuum", "integration", "schedule", "target", "sweep", "analysis",
                    "adiabaticity", "output"});
    RunConfig c;
    if (!scenario_override.empty()) {
        c.scenario = scenario_from_string(scenario_override);
    } else if (doc.contains("scenario")) {
        if (!doc.at("scenario").is_string()) throw ConfigError("scenario", "expected a string");
        c.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
    }

    if (doc.contains("system")) {
        const auto& s = doc.at("system");
        reject_unknown(s, "system",
                       {"g", "eta", "kappa_t", "kappa_l", "kappa_r", "gamma", "omega_e_offset", "kappa_t_intrinsic"});
        read_number(s, "system", "g", c.system.g);
        read_number(s, "system", "eta", c.system.eta);
        read_number(s, "system", "kappa_t", c.system.kappa_t);
        read_number(s, "system", "kappa_l", c.system.kappa_l);
        read_number(s, "system", "kappa_r", c.system.kappa_r);
        read_number(s, "system", "gamma", c.system.gamma);
        read_number(s, "system", "omega_e_offset", c.system.omega_e_offset);
        read_number(s, "system", "kappa_t_intrinsic", c.system.kappa_t_intrinsic);
    }
    if (doc.contains("continuum")) {
        const auto& s = doc.at("continuum");
        reject_unknown(s, "continuum", {"n_modes", "bandwidth"});
        read_count(s, "continuum", "n_modes", c.n_modes);
        read_number(s, "continuum", "bandwidth", c.bandwidth);
    }
    if (doc.contains("integration")) {
        const auto& s = doc.at("integration");
        reject_unknown(s, "integration", {"t_final", "dt", "snapshot_stride", "max_stiffness_per_substep"});
        read_number(s, "integration", "t_final", c.integration.t_final);
        read_number(s, "integration", "dt", c.integration.dt);
        read_count(s, "integration", "snapshot_stride", c.integration.snapshot_stride);
        read_number(s, "integration", "max_stiffness_per_substep", c.integration.max_stiffness_per_substep);
    }

    // Scenario-dependent schedule default.
    c.schedule.kind = c.scenario == Scenario::shape || c.scenario == Scenario::adiabaticity ? ScheduleKind::designed
                                                                                            : ScheduleKind::zero;
    if (doc.contains("schedule")) {
        const auto& s = doc.at("schedule");
        reject_unknown(s, "schedule", {"kind", "value", "rate", "samples", "csv"});
        std::string kind;
        read_string(s, "schedule", "kind", kind);
        if (!kind.empty()) c.schedule.kind = schedule_kind_from_string(kind, "schedule.kind");
        if (s.contains("value")) {
            read_number(s, "schedule", "value", c.schedule.value);
            c.schedule.value_set = true;
        }
        read_number(s, "schedule", "rate", c.schedule.rate);
        if (s.contains("samples")) {
            const auto& arr = s.at("samples");
            if (!arr.is_array()) throw ConfigError("schedule.samples", "expected an array of [t, delta] pairs");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const auto& p = arr[i];
                const std::string path = "schedule.samples[" + std::to_string(i) + "]";
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError(path, "expected [t, delta]");
                c.schedule.samples.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        }
        if (s.contains("csv")) {
            std::string path;
            read_string(s, "schedule", "csv", path);
            try {
                c.schedule.samples = read_schedule_csv(path);
            } catch (const Error& e) {
                throw ConfigError("schedule.csv", e.what());
            }
        }
    }
    if (c.schedule.kind == ScheduleKind::constant && !c.schedule.value_set) {
        c.schedule.value = kDefaultConstantDeltaOverEta * c.system.eta;
        c.schedule.value_set = true;
    }

    if (doc.contains("target")) {
        const auto& s = doc.at("target");
        reject_unknown(s, "target",
                       {"t0", "sigma", "p_tot", "n_samples", "delta_max_over_eta", "on_infeasible",
                        "feasibility_margin"});
        read_number(s, "target", "t0", c.target.target.t0);
        read_number(s, "target", "sigma", c.target.target.sigma);
        read_number(s, "target", "p_tot", c.target.target.p_tot);
        read_count(s, "target", "n_samples", c.target.n_samples);
        read_number(s, "target", "delta_max_over_eta", c.target.design.fraction.delta_max_over_eta);
        read_number(s, "target", "feasibility_margin", c.target.design.feasibility_margin);
        std::string policy;
        read_string(s, "target", "on_infeasible", policy);
        if (policy == "error")
            c.target.design.on_infeasible = InfeasiblePolicy::error;
        else if (policy == "scale" || policy.empty())
            c.target.design.on_infeasible = InfeasiblePolicy::scale;
        else
            throw ConfigError("target.on_infeasible", "expected 'error' or 'scale'");
    }
    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        reject_unknown(s, "sweep", {"delta_over_eta_min", "delta_over_eta_max", "points"});
        read_number(s, "sweep", "delta_over_eta_min", c.sweep.min);
        read_number(s, "sweep", "delta_over_eta_max", c.sweep.max);
        read_count(s, "sweep", "points", c.sweep.points);
    }
    if (doc.contains("analysis")) {
        const auto& s = doc.at("analysis");
        reject_unknown(s, "analysis", {"pulse_samples", "threshold_fraction", "decay_fit_start", "decay_fit_end"});
        read_count(s, "analysis", "pulse_samples", c.analysis.pulse_samples);
        read_number(s, "analysis", "threshold_fraction", c.analysis.threshold_fraction);
        read_number(s, "analysis", "decay_fit_start", c.analysis.decay_fit_start);
        read_number(s, "analysis", "decay_fit_end", c.analysis.decay_fit_end);
    }
    if (doc.contains("adiabaticity")) {
        const auto& s = doc.at("adiabaticity");
        reject_unknown(s, "adiabaticity", {"regime", "margin_factor"});
        std::string regime;
        read_string(s, "adiabaticity", "regime", regime);
        if (regime == "rabi")
            c.adiabaticity.regime = AdiabaticRegime::rabi;
        else if (regime == "shaping" || regime.empty())
            c.adiabaticity.regime = AdiabaticRegime::shaping;
        else
            throw ConfigError("adiabaticity.regime", "expected 'shaping' or 'rabi'");
        read_number(s, "adiabaticity", "margin_factor", c.adiabaticity.margin_factor);
    }
    if (doc.contains("output")) {
        const auto& s = doc.at("output");
        reject_unknown(s, "output", {"dir"});
        read_string(s, "output", "dir", c.output.dir);
    }
    validate(c);
    return c;
}

// Sets a dotted path ("system.g") in `doc`; the value is parsed as JSON when
// possible and kept as a string otherwise.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key, "empty path component");
        if (!node->is_object()) throw ConfigError(key, "path crosses a non-object value");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

// Accepts either a config document or a run manifest (whose "config" echo is used).
inline RunConfig parse_config(std::string_view text, std::string_view scenario_override = {},
                              const std::vector<std::string>& overrides = {}) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("", "config is not valid JSON");
    if (doc.is_object() && doc.contains("manifest_version") && doc.contains("config")) doc = doc.at("config");
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc, scenario_override);
}

inline RunConfig load_config(const std::string& path, std::string_view scenario_override = {},
                             const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), scenario_override, overrides);
}

// Fully-resolved config, every default made explicit.
inline json to_json(const RunConfig& c) {
    json j;
    j["scenario"] = to_string(c.scenario);
    j["system"] = {{"g", c.system.g},
                   {"eta", c.system.eta},
                   {"kappa_t", c.system.kappa_t},
                   {"kappa_l", c.system.kappa_l},
                   {"kappa_r", c.system.kappa_r},
                   {"gamma", c.system.gamma},
                   {"omega_e_offset", c.system.omega_e_offset},
                   {"kappa_t_intrinsic", c.system.kappa_t_intrinsic}};
    j["continuum"] = {{"n_modes", c.n_modes}, {"bandwidth", c.bandwidth}};
    j["integration"] = {{"t_final", c.integration.t_final},
                        {"dt", c.integration.dt},
                        {"snapshot_stride", c.integration.snapshot_stride},
                        {"max_stiffness_per_substep", c.integration.max_stiffness_per_substep}};
    json sched;
    sched["kind"] = to_string(c.schedule.kind);
    switch (c.schedule.kind) {
        case ScheduleKind::constant: sched["value"] = c.schedule.value; break;
        case ScheduleKind::linear_ramp: sched["rate"] = c.schedule.rate; break;
        case ScheduleKind::sampled: {
            json arr = json::array();
            for (const auto& p : c.schedule.samples) arr.push_back({p.t, p.delta});
            sched["samples"] = arr;
            break;
        }
        default: break;
    }
    j["schedule"] = sched;
    j["target"] = {{"t0", c.target.target.t0},
                   {"sigma", c.target.target.sigma},
                   {"p_tot", c.target.target.p_tot},
                   {"n_samples", c.target.n_samples},
                   {"delta_max_over_eta", c.target.design.fraction.delta_max_over_eta},
                   {"on_infeasible", c.target.design.on_infeasible == InfeasiblePolicy::error ? "error" : "scale"},
                   {"feasibility_margin", c.target.design.feasibility_margin}};
    j["sweep"] = {{"delta_over_eta_min", c.sweep.min},
                  {"delta_over_eta_max", c.sweep.max},
                  {"points", c.sweep.points}};
    j["analysis"] = {{"pulse_samples", c.analysis.pulse_samples},
                     {"threshold_fraction", c.analysis.threshold_fraction},
                     {"decay_fit_start", c.analysis.decay_fit_start},
                     {"decay_fit_end", c.analysis.decay_fit_end}};
    j["adiabaticity"] = {{"regime", to_string(c.adiabaticity.regime)},
                         {"margin_factor", c.adiabaticity.margin_factor}};
    j["output"] = {{"dir", c.output.dir}};
    return j;
}

}  // namespace ccqed::io
