// pipeline.hpp: end-to-end runs: emission, pulse reconstruction, shaping

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ccqed/dynamics.hpp"
#include "ccqed/model_core.hpp"
#include "ccqed/pulse_analysis.hpp"
#include "ccqed/schedule_design.hpp"

namespace ccqed {

// Emitted pulse on [0, T] with `samples` points, reconstructed from the final continuum.
inline Waveform emitted_pulse(const Trajectory& traj, const ContinuumGrid& grid, std::size_t samples) {
    return extract_output_pulse(traj.final_state.continuum(), grid, TimeGrid::spanning(0.0, traj.t_final, samples),
                                traj.t_final);
}

// Largest sub-window of `w` that is symmetric about its intensity centroid
// (snapped to the sample grid), so that time inversion maps the pulse onto itself
// when it is time-symmetric.
inline Waveform centroid_window(const Waveform& w) {
    const double c = w.centroid();
    const auto n = w.amplitudes.size();
    const auto ic = static_cast<std::size_t>(
        std::clamp(std::llround((c - w.grid.start) / w.grid.step), 0LL, static_cast<long long>(n - 1)));
    const std::size_t half = std::min(ic, n - 1 - ic);
    Waveform out;
    out.grid = {w.grid.at(ic - half), w.grid.step, 2 * half + 1};
    out.amplitudes.assign(w.amplitudes.begin() + static_cast<std::ptrdiff_t>(ic - half),
                          w.amplitudes.begin() + static_cast<std::ptrdiff_t>(ic + half + 1));
    return out;
}

struct ShapingSetup {
    SystemParams params;
    GaussianTarget target;
    std::size_t n_modes = 2001;
    double bandwidth = 40.0;
    IntegrationOptions integration;
    std::size_t design_samples = 1201;
    DesignOptions design;
    std::size_t pulse_samples = 2401;
    double threshold_fraction = 0.01;
    double adiabatic_margin = 5.0;
};

struct ShapingResult {
    DesignedSchedule design;
    AdiabaticityReport adiabaticity;
    ContinuumGrid grid;
    Trajectory trajectory;
    Waveform pulse;     // full [0, T] reconstruction
    Waveform analysed;  // centroid-symmetric window used for the metrics
    PhaseProfile phase;
    GaussianFit fit;
    FidelityReport fidelity;
    double emitted_probability = 0.0;
};

inline ShapingResult run_shaping(const ShapingSetup& s) {
    ShapingResult r;
    r.design = design_symmetric_schedule(s.params, s.target, s.integration.t_final, s.design_samples, s.design);
    r.adiabaticity = check_adiabaticity(r.design.schedule, s.params, AdiabaticRegime::shaping, s.adiabatic_margin);
    r.grid = build_continuum(s.params.kappa_t, s.n_modes, s.bandwidth, 4.0 * s.params.g * s.params.g / s.params.kappa_t);
    r.trajectory = integrate(s.params, r.design.schedule, r.grid, s.integration,
                             AmplitudeState::excited_emitter(r.grid.n_modes));
    r.emitted_probability = r.trajectory.final_state.continuum_norm();
    r.pulse = emitted_pulse(r.trajectory, r.grid, s.pulse_samples);
    r.analysed = centroid_window(r.pulse);
    r.phase = phase_profile(r.analysed, s.threshold_fraction);
    r.fit = fit_gaussian(r.analysed);
    r.fidelity = overlap_fidelity(r.analysed, time_invert(r.analysed), s.threshold_fraction);
    return r;
}

}  // namespace ccqed
