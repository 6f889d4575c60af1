// pulse_analysis.hpp: emitted-photon waveform reconstruction and pulse metrics

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "ccqed/dynamics.hpp"
#include "ccqed/error.hpp"
#include "ccqed/time_grid.hpp"

namespace ccqed {

struct Waveform {
    TimeGrid grid;
    std::vector<cplx> amplitudes;

    double energy() const {
        double s = 0.0;
        for (const cplx& f : amplitudes) s += std::norm(f);
        return s * grid.step;
    }
    // Intensity-weighted mean time.
    double centroid() const {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < amplitudes.size(); ++i) {
            const double w = std::norm(amplitudes[i]);
            num += w * grid.at(i);
            den += w;
        }
        if (den <= 0.0) throw DegenerateError("centroid of a zero waveform");
        return num / den;
    }
};

// f(t) = sqrt(dw / 2 pi) * sum_k c_k exp(-i w_k (t - t_ref)), i.e. the free
// continuum evolution run backwards from t_ref to the cavity/waveguide interface.
inline Waveform extract_output_pulse(std::span<const cplx> amplitudes, const ContinuumGrid& grid,
                                     const TimeGrid& times, double t_ref) {
    detail::require(amplitudes.size() == grid.n_modes, "extract_output_pulse: amplitude count != n_modes");
    detail::require(times.count >= 1 && times.step > 0.0, "extract_output_pulse: empty time grid");
    if (grid.recurrence_time() < t_ref)
        throw AliasingError("continuum recurrence time 2pi/dw = " + std::to_string(grid.recurrence_time()) +
                            " is shorter than T = " + std::to_string(t_ref));
    const double slack = 1e-9 * std::max(1.0, t_ref);
    detail::require(times.start >= -slack && times.end() <= t_ref + slack,
                    "extract_output_pulse: time grid must lie inside [0, T]");

    const std::size_t n = grid.n_modes;
    const double norm = std::sqrt(grid.spacing / (2.0 * std::numbers::pi));
    std::vector<cplx> phasor(n), advance(n);
    for (std::size_t k = 0; k < n; ++k) advance[k] = std::polar(1.0, -grid.mode_detunings[k] * times.step);

    Waveform w;
    w.grid = times;
    w.amplitudes.resize(times.count);
    constexpr std::size_t kReanchor = 128;
    for (std::size_t m = 0; m < times.count; ++m) {
        if (m % kReanchor == 0) {
            const double dt = times.at(m) - t_ref;
            for (std::size_t k = 0; k < n; ++k) phasor[k] = std::polar(1.0, -grid.mode_detunings[k] * dt);
        }
        cplx acc{};
        for (std::size_t k = 0; k < n; ++k) {
            acc += amplitudes[k] * phasor[k];
            phasor[k] *= advance[k];
        }
        w.amplitudes[m] = norm * acc;
    }
    return w;
}

struct PhaseProfile {
    std::vector<double> times;
    std::vector<double> phase;  // unwrapped
    double flatness = 0.0;      // max - min of the unwrapped phase
    double threshold_fraction = 0.0;
};

inline PhaseProfile phase_profile(const Waveform& w, double threshold_fraction = 0.01) {
    detail::require(threshold_fraction > 0.0 && threshold_fraction < 1.0, "threshold_fraction must be in (0,1)");
    double peak = 0.0;
    for (const cplx& f : w.amplitudes) peak = std::max(peak, std::norm(f));
    if (peak <= 0.0) throw DegenerateError("phase_profile: waveform is identically zero");

    PhaseProfile p;
    p.threshold_fraction = threshold_fraction;
    double prev = 0.0, offset = 0.0;
    for (std::size_t i = 0; i < w.amplitudes.size(); ++i) {
        if (std::norm(w.amplitudes[i]) < threshold_fraction * peak) continue;
        const double raw = std::arg(w.amplitudes[i]);
        if (!p.phase.empty()) {
            double jump = raw + offset - prev;
            while (jump > std::numbers::pi) {
                offset -= 2.0 * std::numbers::pi;
                jump -= 2.0 * std::numbers::pi;
            }
            while (jump < -std::numbers::pi) {
                offset += 2.0 * std::numbers::pi;
                jump += 2.0 * std::numbers::pi;
            }
        }
        prev = raw + offset;
        p.times.push_back(w.grid.at(i));
        p.phase.push_back(prev);
    }
    const auto [lo, hi] = std::minmax_element(p.phase.begin(), p.phase.end());
    p.flatness = *hi - *lo;
    return p;
}

struct GaussianFit {
    double amplitude = 0.0;
    double center = 0.0;
    double width = 0.0;  // standard deviation of the intensity profile
    double r_squared = 0.0;

    double operator()(double t) const {
        const double z = (t - center) / width;
        return amplitude * std::exp(-0.5 * z * z);
    }
};

struct GaussianFitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-12;
};

// Least-squares fit of A exp(-(t - t0)^2 / (2 sigma^2)) to |f(t)|^2. Seeds from
// intensity moments, improves with an intensity-weighted log-domain quadratic
// fit, then runs damped Gauss-Newton on the linear-domain residuals.
inline GaussianFit fit_gaussian(const Waveform& w, const GaussianFitOptions& opts = {}) {
    const std::size_t n = w.amplitudes.size();
    std::vector<double> t(n), y(n);
    double peak = 0.0, sum = 0.0, first = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = w.grid.at(i);
        y[i] = std::norm(w.amplitudes[i]);
        peak = std::max(peak, y[i]);
        sum += y[i];
        first += y[i] * t[i];
    }
    if (!(sum > 0.0)) throw DegenerateError("fit_gaussian: waveform has zero energy");

    // moments
    GaussianFit fit;
    fit.center = first / sum;
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i) second += y[i] * (t[i] - fit.center) * (t[i] - fit.center);
    fit.width = std::sqrt(second / sum);
    fit.amplitude = peak;
    if (!(fit.width > 0.0)) fit.width = w.grid.step;

    // weighted log-domain quadratic in the scaled variable u = (t - center) / width
    {
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            if (y[i] <= 1e-8 * peak) continue;
            const double u = (t[i] - fit.center) / fit.width;
            const Eigen::Vector3d row(1.0, u, u * u);
            const double wt = y[i] * y[i];
            ata += wt * row * row.transpose();
            atb += wt * std::log(y[i]) * row;
        }
        const Eigen::Vector3d c = ata.ldlt().solve(atb);
        if (c.allFinite() && c[2] < 0.0) {
            const double s2 = -1.0 / (2.0 * c[2]);
            const double mu = -c[1] / (2.0 * c[2]);
            const double a = std::exp(c[0] - c[1] * c[1] / (4.0 * c[2]));
            if (std::isfinite(a) && s2 > 0.0) {
                fit.center += mu * fit.width;
                fit.width *= std::sqrt(s2);
                fit.amplitude = a;
            }
        }
    }

    auto residual_ss = [&](const GaussianFit& g) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - g(t[i]);
            ss += r * r;
        }
        return ss;
    };

    double ss = residual_ss(fit);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations && !converged; ++it) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (t[i] - fit.center) / fit.width;
            const double e = std::exp(-0.5 * z * z);
            const double model = fit.amplitude * e;
            const Eigen::Vector3d jac(e, model * z / fit.width, model * z * z / fit.width);
            jtj += jac * jac.transpose();
            jtr += jac * (y[i] - model);
        }
        const Eigen::Vector3d step = jtj.ldlt().solve(jtr);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
            GaussianFit trial = fit;
            trial.amplitude += lambda * step[0];
            trial.center += lambda * step[1];
            trial.width += lambda * step[2];
            if (!(trial.width > 0.0) || !(trial.amplitude > 0.0)) continue;
            const double ss_trial = residual_ss(trial);
            if (ss_trial <= ss) {
                const double rel = std::abs(lambda * step[0]) / fit.amplitude +
                                   std::abs(lambda * step[1]) / fit.width + std::abs(lambda * step[2]) / fit.width;
                fit = trial;
                converged = rel < opts.relative_tolerance || ss - ss_trial <= 1e-15 * ss;
                ss = ss_trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) converged = true;  // no descent direction left: at a minimum to working precision
    }
    if (!converged) throw ConvergenceError("fit_gaussian: Gauss-Newton did not converge");

    double mean = sum / static_cast<double>(n), ss_tot = 0.0;
    for (double v : y) ss_tot += (v - mean) * (v - mean);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss / ss_tot : 1.0;
    return fit;
}

// f(t) -> conj(f(a + b - t)) on the window [a, b]; for a = 0 this is f*(T_w - t).
inline Waveform time_invert(const Waveform& w) {
    Waveform out;
    out.grid = w.grid;
    out.amplitudes.assign(w.amplitudes.rbegin(), w.amplitudes.rend());
    for (cplx& f : out.amplitudes) f = std::conj(f);
    return out;
}

// Linear interpolation of w onto `grid`; zero outside w's window.
inline std::vector<cplx> resample(const Waveform& w, const TimeGrid& grid) {
    std::vector<cplx> out(grid.count, cplx{});
    const std::size_t n = w.amplitudes.size();
    if (n == 0) return out;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double u = (grid.at(i) - w.grid.start) / w.grid.step;
        if (u < -1e-9 || u > static_cast<double>(n - 1) + 1e-9) continue;
        const double uc = std::clamp(u, 0.0, static_cast<double>(n - 1));
        if (n == 1) {
            out[i] = w.amplitudes[0];
            continue;
        }
        const auto k = std::min(static_cast<std::size_t>(uc), n - 2);
        const double frac = uc - static_cast<double>(k);
        out[i] = (1.0 - frac) * w.amplitudes[k] + frac * w.amplitudes[k + 1];
    }
    return out;
}

struct FidelityReport {
    double fidelity = 0.0;
    double phase_flatness = 0.0;  // of the first argument
    double threshold_fraction = 0.0;
};

inline bool same_grid(const TimeGrid& a, const TimeGrid& b) {
    return a.count == b.count && std::abs(a.start - b.start) <= 1e-12 * std::max(1.0, std::abs(a.start)) &&
           std::abs(a.step - b.step) <= 1e-12 * a.step;
}

// F = |int f* h dt|^2 / (int |f|^2 dt * int |h|^2 dt); the coarser waveform is
// linearly resampled onto the finer grid.
inline FidelityReport overlap_fidelity(const Waveform& f, const Waveform& h, double threshold_fraction = 0.01) {
    std::vector<cplx> fa, ha;
    if (same_grid(f.grid, h.grid)) {
        fa = f.amplitudes;
        ha = h.amplitudes;
    } else if (f.grid.step <= h.grid.step) {
        fa = f.amplitudes;
        ha = resample(h, f.grid);
    } else {
        fa = resample(f, h.grid);
        ha = h.amplitudes;
    }
    cplx overlap{};
    double ef = 0.0, eh = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        overlap += std::conj(fa[i]) * ha[i];
        ef += std::norm(fa[i]);
        eh += std::norm(ha[i]);
    }
    if (!(ef > 0.0) || !(eh > 0.0)) throw DegenerateError("overlap_fidelity: zero-energy waveform");
    FidelityReport rep;
    rep.fidelity = std::min(1.0, std::norm(overlap) / (ef * eh));
    rep.threshold_fraction = threshold_fraction;
    rep.phase_flatness = phase_profile(f, threshold_fraction).flatness;
    return rep;
}

struct DecayFit {
    double rate = 0.0;  // values ~ exp(intercept - rate * t)
    double intercept = 0.0;
    std::size_t points = 0;
};

// Log-linear least squares over samples with t in [t_lo, t_hi] and value > 0.
inline DecayFit fit_exponential_decay(std::span<const double> times, std::span<const double> values, double t_lo,
                                      double t_hi) {
    detail::require(times.size() == values.size(), "fit_exponential_decay: size mismatch");
    double s = 0, st = 0, stt = 0, sy = 0, sty = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi || !(values[i] > 0.0)) continue;
        const double ly = std::log(values[i]);
        s += 1;
        st += times[i];
        stt += times[i] * times[i];
        sy += ly;
        sty += times[i] * ly;
        ++used;
    }
    if (used < 2) throw DegenerateError("fit_exponential_decay: fewer than two usable samples");
    const double denom = s * stt - st * st;
    const double slope = (s * sty - st * sy) / denom;
    return {-slope, (sy - slope * st) / s, used};
}

}  // namespace ccqed
