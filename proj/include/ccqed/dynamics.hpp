// dynamics.hpp: single-excitation amplitude dynamics with a discretised waveguide continuum

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ccqed/error.hpp"
#include "ccqed/model_core.hpp"
#include "ccqed/schedule.hpp"

namespace ccqed {

struct ContinuumGrid {
    std::size_t n_modes = 0;
    double bandwidth = 0.0;
    double spacing = 0.0;
    double kappa_prime = 0.0;  // sqrt(kappa_t * spacing / 2 pi)
    std::vector<double> mode_detunings;

    // Recurrence time of the discrete continuum; reconstructions longer than this alias.
    double recurrence_time() const { return 2.0 * std::numbers::pi / spacing; }
};

// Uniform grid symmetric about omega_t. `expected_spectral_width` (if > 0)
// enables the guard bandwidth >= 4 * width.
inline ContinuumGrid build_continuum(double kappa_t, std::size_t n_modes, double bandwidth,
                                     double expected_spectral_width = 0.0) {
    detail::require(kappa_t > 0.0, "kappa_t must be > 0");
    detail::require(n_modes >= 2, "continuum needs at least two modes");
    detail::require(bandwidth > 0.0 && std::isfinite(bandwidth), "bandwidth must be > 0");
    if (expected_spectral_width > 0.0 && bandwidth < 4.0 * expected_spectral_width)
        throw InvalidArgument("bandwidth " + std::to_string(bandwidth) +
                              " is below 4x the expected pulse spectral width " +
                              std::to_string(expected_spectral_width));
    ContinuumGrid grid;
    grid.n_modes = n_modes;
    grid.bandwidth = bandwidth;
    grid.spacing = bandwidth / static_cast<double>(n_modes - 1);
    grid.kappa_prime = std::sqrt(kappa_t * grid.spacing / (2.0 * std::numbers::pi));
    grid.mode_detunings.resize(n_modes);
    const double mid = 0.5 * static_cast<double>(n_modes - 1);
    for (std::size_t k = 0; k < n_modes; ++k)
        grid.mode_detunings[k] = (static_cast<double>(k) - mid) * grid.spacing;
    return grid;
}

// Flat storage: [c_e, c_t, c_l, c_r, c_k(0) ... c_k(N-1)].
class AmplitudeState {
public:
    static constexpr std::size_t kHeader = 4;

    AmplitudeState() = default;
    explicit AmplitudeState(std::size_t n_modes) : data_(kHeader + n_modes, cplx{}) {}

    static AmplitudeState excited_emitter(std::size_t n_modes) {
        AmplitudeState s(n_modes);
        s.e() = 1.0;
        return s;
    }

    cplx& e() { return data_[0]; }
    cplx& t() { return data_[1]; }
    cplx& l() { return data_[2]; }
    cplx& r() { return data_[3]; }
    cplx e() const { return data_[0]; }
    cplx t() const { return data_[1]; }
    cplx l() const { return data_[2]; }
    cplx r() const { return data_[3]; }

    std::span<cplx> continuum() { return std::span<cplx>(data_).subspan(kHeader); }
    std::span<const cplx> continuum() const { return std::span<const cplx>(data_).subspan(kHeader); }
    std::size_t n_modes() const { return data_.size() - kHeader; }

    std::span<cplx> data() { return data_; }
    std::span<const cplx> data() const { return data_; }

    double continuum_norm() const {
        double s = 0.0;
        for (const cplx& c : continuum()) s += std::norm(c);
        return s;
    }
    double total_norm() const {
        return std::norm(e()) + std::norm(t()) + std::norm(l()) + std::norm(r()) + continuum_norm();
    }

    AmplitudeState& operator+=(const AmplitudeState& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

private:
    std::vector<cplx> data_;
};

namespace detail {

inline void rhs_into(std::span<const cplx> y, double delta, const SystemParams& p, const ContinuumGrid& grid,
                     std::span<cplx> dy) {
    const cplx i{0.0, 1.0};
    const cplx ce = y[0], ct = y[1], cl = y[2], cr = y[3];
    const double kp = grid.kappa_prime;
    const double* wk = grid.mode_detunings.data();
    const std::size_t n = grid.n_modes;

    double sum_re = 0.0, sum_im = 0.0;
    const double kct_re = kp * ct.real(), kct_im = kp * ct.imag();
    for (std::size_t k = 0; k < n; ++k) {
        const double re = y[4 + k].real(), im = y[4 + k].imag();
        sum_re += re;
        sum_im += im;
        // -i w c - kappa' c_t
        dy[4 + k] = cplx(wk[k] * im - kct_re, -wk[k] * re - kct_im);
    }
    dy[0] = p.g * ct - p.gamma * ce - i * p.omega_e_offset * ce;
    dy[1] = -p.g * ce - p.eta * (cl + cr) + kp * cplx(sum_re, sum_im) - p.kappa_t_intrinsic * ct;
    dy[2] = p.eta * ct - i * delta * cl - p.kappa_l * cl;
    dy[3] = p.eta * ct + i * delta * cr - p.kappa_r * cr;
}

}  // namespace detail

inline AmplitudeState rhs(const AmplitudeState& state, double t, const SystemParams& params,
                          const DetuningSchedule& schedule, const ContinuumGrid& grid) {
    detail::require(state.n_modes() == grid.n_modes, "rhs: state size does not match continuum grid");
    AmplitudeState d(grid.n_modes);
    detail::rhs_into(state.data(), schedule(t), params, grid, d.data());
    return d;
}

struct IntegrationOptions {
    double t_final = 120.0;
    double dt = 0.01;
    std::size_t snapshot_stride = 10;
    // Each outer step is split into equal RK4 substeps so that
    // (spectral-radius bound) * substep <= this value.
    double max_stiffness_per_substep = 0.5;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<AmplitudeState> states;
    AmplitudeState final_state;
    double t_final = 0.0;
    double step = 0.0;
    std::size_t substeps = 1;
    std::vector<double> step_norms;  // total norm after every outer step, index 0 = initial
};

// Crude but safe upper bound on the spectral radius of the linear generator.
inline double generator_radius_bound(const SystemParams& p, const ContinuumGrid& grid, double max_abs_delta) {
    return std::max(0.5 * grid.bandwidth, max_abs_delta) + 2.0 * p.eta + p.g + std::abs(p.omega_e_offset) +
           grid.kappa_prime * std::sqrt(static_cast<double>(grid.n_modes)) +
           std::max({p.kappa_l, p.kappa_r, p.gamma, p.kappa_t_intrinsic});
}

inline Trajectory integrate(const SystemParams& params, const DetuningSchedule& schedule, const ContinuumGrid& grid,
                            const IntegrationOptions& opts, const AmplitudeState& initial) {
    params.validate();
    detail::require(opts.dt > 0.0 && std::isfinite(opts.dt), "dt must be > 0");
    detail::require(opts.t_final >= opts.dt, "t_final must be >= dt");
    detail::require(opts.snapshot_stride >= 1, "snapshot_stride must be >= 1");
    detail::require(opts.max_stiffness_per_substep > 0.0, "max_stiffness_per_substep must be > 0");
    detail::require(initial.n_modes() == grid.n_modes, "initial state size does not match continuum grid");

    const auto n_steps = static_cast<std::size_t>(std::llround(opts.t_final / opts.dt));
    const double h = opts.t_final / static_cast<double>(n_steps);
    const double radius = generator_radius_bound(params, grid, schedule.max_abs(0.0, opts.t_final));
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(radius * h / opts.max_stiffness_per_substep)));
    const double hs = h / static_cast<double>(m);

    Trajectory traj;
    traj.t_final = opts.t_final;
    traj.step = h;
    traj.substeps = m;
    traj.step_norms.reserve(n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(initial);
    traj.step_norms.push_back(initial.total_norm());

    const std::size_t dim = initial.data().size();
    std::vector<cplx> y(initial.data().begin(), initial.data().end());
    std::vector<cplx> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    auto axpy = [&](const std::vector<cplx>& k, double a) {
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + a * k[j];
    };

    for (std::size_t step = 0; step < n_steps; ++step) {
        for (std::size_t sub = 0; sub < m; ++sub) {
            const double t = (static_cast<double>(step) + static_cast<double>(sub) / static_cast<double>(m)) * h;
            const double d0 = schedule(t), dmid = schedule(t + 0.5 * hs), d1 = schedule(t + hs);
            detail::rhs_into(y, d0, params, grid, k1);
            axpy(k1, 0.5 * hs);
            detail::rhs_into(tmp, dmid, params, grid, k2);
            axpy(k2, 0.5 * hs);
            detail::rhs_into(tmp, dmid, params, grid, k3);
            axpy(k3, hs);
            detail::rhs_into(tmp, d1, params, grid, k4);
            for (std::size_t j = 0; j < dim; ++j) y[j] += hs / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        double norm = 0.0;
        for (const cplx& c : y) norm += std::norm(c);
        traj.step_norms.push_back(norm);
        if (!std::isfinite(norm) || norm > 1.0 + 1e-4)
            throw IntegrationInstability("integrate: total norm " + std::to_string(norm) + " at t=" +
                                         std::to_string(static_cast<double>(step + 1) * h));

        const bool last = step + 1 == n_steps;
        if ((step + 1) % opts.snapshot_stride == 0 || last) {
            AmplitudeState s(grid.n_modes);
            std::copy(y.begin(), y.end(), s.data().begin());
            traj.times.push_back(last ? opts.t_final : static_cast<double>(step + 1) * h);
            traj.states.push_back(std::move(s));
        }
    }
    traj.final_state = traj.states.back();
    return traj;
}

struct Populations {
    std::vector<double> times, emitter, target, left, right, continuum;
};

inline Populations populations(const Trajectory& traj) {
    detail::require(!traj.states.empty(), "populations: empty trajectory");
    Populations p;
    p.times = traj.times;
    for (const auto& s : traj.states) {
        p.emitter.push_back(std::norm(s.e()));
        p.target.push_back(std::norm(s.t()));
        p.left.push_back(std::norm(s.l()));
        p.right.push_back(std::norm(s.r()));
        p.continuum.push_back(s.continuum_norm());
    }
    return p;
}

}  // namespace ccqed
