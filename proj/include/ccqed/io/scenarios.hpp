// scenarios.hpp: scenario orchestration, manifests, threaded sweeps

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ccqed/dynamics.hpp"
#include "ccqed/io/config.hpp"
#include "ccqed/io/csv.hpp"
#include "ccqed/model_core.hpp"
#include "ccqed/pipeline.hpp"
#include "ccqed/pulse_analysis.hpp"
#include "ccqed/schedule_design.hpp"

namespace ccqed::io {

inline constexpr const char* kToolName = "ccqed-sim";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestVersion = 1;

struct RunManifest {
    json doc;
    std::vector<std::string> files;  // relative to the output directory
};

namespace detail {

namespace fs = std::filesystem;

// Tracks files a scenario writes so a failed run leaves nothing behind.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
    }
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) fs::remove(dir_ / f, ec);
        if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    void csv(const std::string& name, const std::vector<Column>& cols) {
        files_.push_back(name);
        export_csv((dir_ / name).string(), cols);
    }
    void text(const std::string& name, const std::string& body) {
        files_.push_back(name);
        write_text((dir_ / name).string(), body);
    }
    const std::vector<std::string>& files() const { return files_; }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
    bool created_dir_ = false;
    bool committed_ = false;
};

struct ResolvedSchedule {
    DetuningSchedule schedule;
    std::optional<DesignedSchedule> design;
};

inline ResolvedSchedule resolve_schedule(const RunConfig& c) {
    ResolvedSchedule r;
    switch (c.schedule.kind) {
        case ScheduleKind::zero: r.schedule = make_zero(); break;
        case ScheduleKind::constant: r.schedule = make_constant(c.schedule.value); break;
        case ScheduleKind::linear_ramp: r.schedule = make_ramp(c.schedule.rate); break;
        case ScheduleKind::sampled: r.schedule = make_sampled(c.schedule.samples); break;
        case ScheduleKind::designed:
            r.design = design_symmetric_schedule(c.system, c.target.target, c.integration.t_final, c.target.n_samples,
                                                 c.target.design);
            r.schedule = r.design->schedule;
            break;
    }
    return r;
}

inline json design_json(const DesignedSchedule& d) {
    return {{"requested_p_tot", d.requested_p_tot},
            {"p_tot", d.p_tot},
            {"max_feasible_p_tot", d.max_feasible_p_tot},
            {"scaled", d.scaled}};
}

inline json adiabaticity_json(const AdiabaticityReport& r) {
    return {{"regime", to_string(r.regime)},
            {"lhs", r.lhs},
            {"beta_max", r.beta_max},
            {"sqrt_beta_max", r.mid},
            {"rhs", r.rhs},
            {"lower_margin", r.lower_margin},
            {"upper_margin", r.upper_margin},
            {"margin_factor", r.margin_factor},
            {"rabi_condition", r.extra_rabi_check},
            {"pass", r.pass}};
}

inline json final_populations_json(const Populations& p) {
    return {{"p_e", p.emitter.back()},
            {"p_t", p.target.back()},
            {"p_l", p.left.back()},
            {"p_r", p.right.back()},
            {"p_cont", p.continuum.back()}};
}

inline void write_populations(OutputSet& out, const Populations& p) {
    out.csv("populations.csv", {{"t", p.times},
                                {"p_e", p.emitter},
                                {"p_t", p.target},
                                {"p_l", p.left},
                                {"p_r", p.right},
                                {"p_cont", p.continuum}});
}

inline void write_waveform(OutputSet& out, const std::string& name, const Waveform& w) {
    const std::size_t n = w.amplitudes.size();
    std::vector<double> t(n), re(n), im(n), a2(n), ph(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = w.grid.at(i);
        re[i] = w.amplitudes[i].real();
        im[i] = w.amplitudes[i].imag();
        a2[i] = std::norm(w.amplitudes[i]);
        ph[i] = std::arg(w.amplitudes[i]);
    }
    out.csv(name, {{"t", t}, {"re_f", re}, {"im_f", im}, {"abs2_f", a2}, {"phase", ph}});
}

inline void write_schedule(OutputSet& out, const DetuningSchedule& s, std::span<const double> times) {
    std::vector<double> t, d;
    if (s.kind() == ScheduleKind::sampled || s.kind() == ScheduleKind::designed) {
        for (const auto& p : s.samples()) {
            t.push_back(p.t);
            d.push_back(p.delta);
        }
    } else {
        t.assign(times.begin(), times.end());
        for (double x : t) d.push_back(s(x));
    }
    out.csv("schedule.csv", {{"t", t}, {"delta", d}});
}

inline json grid_json(const ContinuumGrid& g, const Trajectory& traj) {
    return {{"kappa_prime", g.kappa_prime},
            {"mode_spacing", g.spacing},
            {"recurrence_time", g.recurrence_time()},
            {"outer_step", traj.step},
            {"rk4_substeps", traj.substeps}};
}

// Pulse metrics on the centroid-symmetric window; null when the pulse is degenerate.
inline json pulse_metrics(const Waveform& pulse, double threshold) {
    try {
        const Waveform a = centroid_window(pulse);
        const auto fid = overlap_fidelity(a, time_invert(a), threshold);
        const auto fit = fit_gaussian(a);
        return {{"fidelity", fid.fidelity},
                {"phase_flatness", fid.phase_flatness},
                {"r_squared", fit.r_squared},
                {"fit_center", fit.center},
                {"fit_width", fit.width}};
    } catch (const DegenerateError&) {
        return nullptr;
    } catch (const ConvergenceError&) {
        return nullptr;
    }
}

inline ContinuumGrid continuum_for(const RunConfig& c, bool guard) {
    const double width = guard ? 4.0 * c.system.g * c.system.g / c.system.kappa_t : 0.0;
    return build_continuum(c.system.kappa_t, c.n_modes, c.bandwidth, width);
}

inline void run_eigens(const RunConfig& c, OutputSet& out, json& derived, json& metrics) {
    const std::size_t n = c.sweep.points;
    std::vector<double> r(n), w1(n), w2(n), w3(n), ft(n);
    double eig_dev = 0.0, frac_dev = 0.0;
    const double eta = c.system.eta;
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = c.sweep.min + (c.sweep.max - c.sweep.min) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double delta = r[i] * eta;
        const auto es = numeric_eigensystem(build_cavity_hamiltonian(c.system, delta));
        w1[i] = es.omegas[0].real() / eta;
        w2[i] = es.omegas[1].real() / eta;
        w3[i] = es.omegas[2].real() / eta;
        ft[i] = es.target_fractions[0];
        const auto ref = analytic_eigenvalues(eta, delta);
        for (std::size_t k = 0; k < 3; ++k) eig_dev = std::max(eig_dev, std::abs(es.omegas[k] - ref[k]) / eta);
        frac_dev = std::max(frac_dev, std::abs(ft[i] - ldos_ratio(eta, delta)));
    }
    out.csv("eigens.csv", {{"delta_over_eta", r}, {"w1", w1}, {"w2", w2}, {"w3", w3}, {"frac_t", ft}});
    derived["lossless"] = c.system.kappa_l == 0.0 && c.system.kappa_r == 0.0;
    metrics["max_eigenvalue_deviation_over_eta"] = eig_dev;
    metrics["max_frac_t_deviation"] = frac_dev;
    const auto zero = numeric_eigensystem(build_cavity_hamiltonian(c.system, 0.0));
    metrics["splitting_at_zero_over_eta"] = std::abs(zero.omegas[1].real() - zero.omegas[0].real()) / eta;
}

inline void run_ldos(const RunConfig& c, OutputSet& out, json&, json& metrics) {
    const std::size_t n = c.sweep.points;
    std::vector<double> r(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = c.sweep.min + (c.sweep.max - c.sweep.min) * static_cast<double>(i) / static_cast<double>(n - 1);
        d[i] = ldos_ratio(c.system.eta, r[i] * c.system.eta);
    }
    out.csv("ldos.csv", {{"delta_over_eta", r}, {"d_over_d0", d}});
    metrics["half_max_delta_over_eta"] = std::sqrt(2.0);
}

inline void run_dynamics(const RunConfig& c, OutputSet& out, json& derived, json& metrics) {
    const auto sched = resolve_schedule(c);
    const auto grid = continuum_for(c, false);
    const auto traj = integrate(c.system, sched.schedule, grid, c.integration,
                                AmplitudeState::excited_emitter(grid.n_modes));
    const auto pops = populations(traj);
    const auto pulse = emitted_pulse(traj, grid, c.analysis.pulse_samples);

    write_populations(out, pops);
    write_waveform(out, "pulse.csv", pulse);
    write_schedule(out, sched.schedule, pops.times);

    derived.update(grid_json(grid, traj));
    derived["beta_max"] = max_sweep_rate(sched.schedule);
    if (c.schedule.kind == ScheduleKind::constant) derived["constant_delta"] = c.schedule.value;
    if (sched.design) derived["design"] = design_json(*sched.design);

    metrics["final_populations"] = final_populations_json(pops);
    metrics["emitted_probability"] = traj.final_state.continuum_norm();
    const auto [lo, hi] = std::minmax_element(traj.step_norms.begin(), traj.step_norms.end());
    metrics["norm_min"] = *lo;
    metrics["norm_max"] = *hi;
    try {
        const auto fit = fit_exponential_decay(pops.times, pops.emitter, c.analysis.decay_fit_start,
                                               c.analysis.decay_fit_end);
        metrics["emitter_decay_rate"] = fit.rate;
    } catch (const Error&) {
        metrics["emitter_decay_rate"] = nullptr;
    }
    metrics["pulse"] = pulse_metrics(pulse, c.analysis.threshold_fraction);
}

inline void run_shape(const RunConfig& c, OutputSet& out, json& derived, json& metrics) {
    ShapingSetup s;
    s.params = c.system;
    s.target = c.target.target;
    s.n_modes = c.n_modes;
    s.bandwidth = c.bandwidth;
    s.integration = c.integration;
    s.design_samples = c.target.n_samples;
    s.design = c.target.design;
    s.pulse_samples = c.analysis.pulse_samples;
    s.threshold_fraction = c.analysis.threshold_fraction;
    s.adiabatic_margin = c.adiabaticity.margin_factor;
    const auto r = run_shaping(s);
    const auto pops = populations(r.trajectory);

    write_schedule(out, r.design.schedule, {});
    write_populations(out, pops);
    write_waveform(out, "pulse.csv", r.pulse);
    out.csv("phase.csv", {{"t", r.phase.times}, {"phase", r.phase.phase}});
    {
        const std::size_t n = r.analysed.amplitudes.size();
        std::vector<double> t(n), a2(n), g(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = r.analysed.grid.at(i);
            a2[i] = std::norm(r.analysed.amplitudes[i]);
            g[i] = r.fit(t[i]);
        }
        out.csv("fit.csv", {{"t", t}, {"abs2_f", a2}, {"gaussian", g}});
    }

    derived.update(grid_json(r.grid, r.trajectory));
    derived["beta_max"] = r.adiabaticity.beta_max;
    derived["design"] = design_json(r.design);
    derived["analysis_window"] = {{"start", r.analysed.grid.start}, {"end", r.analysed.grid.end()}};

    metrics["fidelity"] = r.fidelity.fidelity;
    metrics["phase_flatness"] = r.fidelity.phase_flatness;
    metrics["r_squared"] = r.fit.r_squared;
    metrics["fit"] = {{"amplitude", r.fit.amplitude}, {"center", r.fit.center}, {"width", r.fit.width}};
    metrics["emitted_probability"] = r.emitted_probability;
    metrics["final_populations"] = final_populations_json(pops);
    metrics["adiabaticity"] = adiabaticity_json(r.adiabaticity);
}

inline void run_adiabaticity(const RunConfig& c, OutputSet& out, json& derived, json& metrics) {
    const auto sched = resolve_schedule(c);
    const auto rep = check_adiabaticity(sched.schedule, c.system, c.adiabaticity.regime, c.adiabaticity.margin_factor);
    const json j = adiabaticity_json(rep);
    out.text("adiabaticity.json", j.dump(2) + "\n");
    derived["beta_max"] = rep.beta_max;
    if (sched.design) derived["design"] = design_json(*sched.design);
    metrics["adiabaticity"] = j;
}

}  // namespace detail

// Runs one scenario into c.output.dir. On any failure every file written by
// this run is removed and the error is rethrown.
inline RunManifest run_scenario(const RunConfig& c) {
    validate(c);
    const auto t_start = std::chrono::steady_clock::now();
    detail::OutputSet out(c.output.dir);
    json derived = json::object(), metrics = json::object();
    switch (c.scenario) {
        case Scenario::eigens: detail::run_eigens(c, out, derived, metrics); break;
        case Scenario::ldos: detail::run_ldos(c, out, derived, metrics); break;
        case Scenario::dynamics: detail::run_dynamics(c, out, derived, metrics); break;
        case Scenario::shape: detail::run_shape(c, out, derived, metrics); break;
        case Scenario::adiabaticity: detail::run_adiabaticity(c, out, derived, metrics); break;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    RunManifest m;
    m.files = out.files();
    m.doc["manifest_version"] = kManifestVersion;
    m.doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    m.doc["scenario"] = to_string(c.scenario);
    m.doc["config"] = to_json(c);
    m.doc["derived"] = derived;
    m.doc["metrics"] = metrics;
    m.doc["files"] = m.files;
    m.doc["wall_clock_seconds"] = seconds;
    out.text("manifest.json", m.doc.dump(2) + "\n");
    m.files.push_back("manifest.json");
    out.commit();
    return m;
}

struct SweepEntry {
    std::string out_dir;
    std::optional<RunManifest> manifest;
    std::string error;
};

// Runs independent configs on `jobs` worker threads; results keep input order.
// Each worker only touches its own config and output directory.
inline std::vector<SweepEntry> run_sweep(std::vector<RunConfig> configs, unsigned jobs) {
    std::vector<SweepEntry> results(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
            results[i].out_dir = configs[i].output.dir;
            try {
                results[i].manifest = run_scenario(configs[i]);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, configs.size()))));
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    return results;
}

inline json merge_manifests(const std::vector<SweepEntry>& entries) {
    json runs = json::array();
    for (const auto& e : entries) {
        json r;
        r["out_dir"] = e.out_dir;
        if (e.manifest) {
            r["status"] = "ok";
            r["scenario"] = e.manifest->doc["scenario"];
            r["metrics"] = e.manifest->doc["metrics"];
            r["derived"] = e.manifest->doc["derived"];
        } else {
            r["status"] = "error";
            r["error"] = e.error;
        }
        runs.push_back(r);
    }
    return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}}, {"runs", runs}};
}

}  // namespace ccqed::io
