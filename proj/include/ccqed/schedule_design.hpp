// schedule_design.hpp: inverse design of detuning schedules and adiabaticity checks
//
// The designer works quasi-statically: at every instant the emitter sees only
// the dark mode, whose target-cavity fraction x = |alpha_t^(1)|^2 is set by
// Delta(t). Adiabatic elimination of that mode gives, per unit emitter
// population,
//
//     mode loss      k1(x) = x * k_target + (1 - x) * (kappa_l + kappa_r) / 2
//     emitter decay  R(x)  = 2 g^2 x k1 / (k1^2 + omega_e^2) + 2 gamma
//     extraction     E(x)  = x * (kappa_t / 2) / k1
//
// where k_target = kappa_t / 2 + kappa_t_intrinsic is the amplitude damping the
// waveguide continuum imposes on the target cavity (see dynamics.hpp). The
// schedule is obtained by marching the emitter population forward and solving
// n(t) R(x) E(x) = p(t) for x at each instant, with p the requested emission
// density, then inverting x -> Delta.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ccqed/error.hpp"
#include "ccqed/model_core.hpp"
#include "ccqed/schedule.hpp"
#include "ccqed/time_grid.hpp"

namespace ccqed {

struct GaussianTarget {
    double t0 = 50.0;
    double sigma = 25.0;
    double p_tot = 0.95;

    // Requested emission density into the waveguide.
    double density(double t) const {
        const double z = (t - t0) / sigma;
        return p_tot * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    void validate() const {
        detail::require(std::isfinite(t0), "target t0 must be finite");
        detail::require(sigma > 0.0 && std::isfinite(sigma), "target sigma must be > 0");
        detail::require(p_tot > 0.0 && p_tot < 1.0, "target p_tot must lie in (0, 1)");
    }
};

class EmissionModel {
public:
    explicit EmissionModel(const SystemParams& p) : p_(p) { p_.validate(); }

    double mode_loss(double x) const {
        return x * (0.5 * p_.kappa_t + p_.kappa_t_intrinsic) + (1.0 - x) * 0.5 * (p_.kappa_l + p_.kappa_r);
    }
    double emitter_decay_rate(double x) const {
        const double k1 = mode_loss(x);
        if (k1 <= 0.0) return 2.0 * p_.gamma;
        return 2.0 * p_.g * p_.g * x * k1 / (k1 * k1 + p_.omega_e_offset * p_.omega_e_offset) + 2.0 * p_.gamma;
    }
    double extraction(double x) const {
        const double k1 = mode_loss(x);
        return k1 > 0.0 ? x * 0.5 * p_.kappa_t / k1 : 0.0;
    }
    // Emission rate into the waveguide per unit emitter population.
    double emission_rate(double x) const {
        return (emitter_decay_rate(x) - 2.0 * p_.gamma) * extraction(x);
    }
    const SystemParams& params() const { return p_; }

private:
    SystemParams p_;
};

// Delta = eta sqrt(2x / (1 - x)), the nonnegative branch inverting ldos_ratio.
inline double fraction_to_detuning(double x, double eta) {
    detail::require(eta > 0.0, "eta must be > 0");
    if (!(x >= 0.0 && x < 1.0)) throw InvalidArgument("fraction_to_detuning: x must lie in [0, 1)");
    return eta * std::sqrt(2.0 * x / (1.0 - x));
}

struct FractionOptions {
    double delta_max_over_eta = 10.0;  // the largest reachable x is ldos_ratio(delta_max)
    std::size_t substeps = 4;          // population-march refinement per sample interval
    double loss_band = 0.2;            // kappa_l, kappa_r must lie within +-band of kappa_t
};

struct FractionProfile {
    TimeGrid grid;
    std::vector<double> fractions;
    std::vector<double> emitter_population;
};

namespace detail {

inline void check_loss_band(const SystemParams& p, double band) {
    const auto outside = [&](double k) { return std::abs(k - p.kappa_t) > band * p.kappa_t; };
    if (outside(p.kappa_l) || outside(p.kappa_r))
        throw InfeasibleTarget("control-cavity losses must lie within +-" + std::to_string(band * 100.0) +
                               "% of kappa_t for schedule inversion");
}

// Smallest x in [0, x_cap] with population * emission_rate(x) >= demand.
inline double solve_fraction(const EmissionModel& model, double population, double demand, double x_cap) {
    if (demand <= 0.0) return 0.0;
    double lo = 0.0, hi = x_cap;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (population * model.emission_rate(mid) < demand)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

}  // namespace detail

// Target-cavity fraction x(t) on `grid` that realises the requested emission
// density. Throws InfeasibleTarget when the density outruns what the system
// can emit with Delta <= delta_max.
inline FractionProfile required_fraction_profile(const GaussianTarget& target, const SystemParams& params,
                                                 const TimeGrid& grid, const FractionOptions& opts = {}) {
    target.validate();
    params.validate();
    detail::require(grid.count >= 2 && grid.step > 0.0, "required_fraction_profile: need at least two samples");
    detail::require(opts.substeps >= 1, "substeps must be >= 1");
    detail::check_loss_band(params, opts.loss_band);

    const EmissionModel model(params);
    const double x_cap = ldos_ratio(params.eta, opts.delta_max_over_eta * params.eta);
    const double ceiling = model.emission_rate(x_cap);

    FractionProfile prof;
    prof.grid = grid;
    prof.fractions.reserve(grid.count);
    prof.emitter_population.reserve(grid.count);

    const double hs = grid.step / static_cast<double>(opts.substeps);
    double population = 1.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        for (std::size_t s = 0; s < (i + 1 < grid.count ? opts.substeps : 1); ++s) {
            const double t = grid.at(i) + static_cast<double>(s) * hs;
            const double demand = target.density(t);
            if (demand > population * ceiling)
                throw InfeasibleTarget("emission density " + std::to_string(demand) + " at t=" + std::to_string(t) +
                                       " exceeds the reachable rate " + std::to_string(population * ceiling));
            const double x = detail::solve_fraction(model, population, demand, x_cap);
            if (s == 0) {
                prof.fractions.push_back(x);
                prof.emitter_population.push_back(population);
            }
            population *= std::exp(-model.emitter_decay_rate(x) * hs);
        }
    }
    return prof;
}

// x(t) at a single instant, marching from t = 0 with step `resolution`.
inline double required_fraction(const GaussianTarget& target, const SystemParams& params, double t,
                                double resolution = 0.1, const FractionOptions& opts = {}) {
    detail::require(t >= 0.0, "required_fraction: t must be >= 0");
    if (t == 0.0) return required_fraction_profile(target, params, {0.0, resolution, 2}, opts).fractions.front();
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t / resolution))) + 1;
    return required_fraction_profile(target, params, TimeGrid::spanning(0.0, t, n), opts).fractions.back();
}

// Largest p_tot (below 1) for which the target shape stays feasible on `grid`.
inline double max_feasible_p_tot(GaussianTarget target, const SystemParams& params, const TimeGrid& grid,
                                 const FractionOptions& opts = {}) {
    auto feasible = [&](double p) {
        target.p_tot = p;
        try {
            required_fraction_profile(target, params, grid, opts);
            return true;
        } catch (const InfeasibleTarget&) {
            return false;
        }
    };
    detail::check_loss_band(params, opts.loss_band);
    double lo = 0.0, hi = 1.0 - 1e-12;
    if (feasible(hi)) return hi;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

enum class InfeasiblePolicy { error, scale };

struct DesignOptions {
    FractionOptions fraction;
    InfeasiblePolicy on_infeasible = InfeasiblePolicy::scale;
    double feasibility_margin = 0.95;  // used p_tot = margin * max feasible when scaling
};

struct DesignedSchedule {
    DetuningSchedule schedule;
    FractionProfile profile;
    double requested_p_tot = 0.0;
    double p_tot = 0.0;  // what the schedule was designed for
    double max_feasible_p_tot = 0.0;
    bool scaled = false;
};

// Sampled schedule on [0, window] realising a Gaussian emission profile.
// With InfeasiblePolicy::scale an unreachable p_tot is lowered to
// feasibility_margin times the largest reachable value (shape kept).
inline DesignedSchedule design_symmetric_schedule(const SystemParams& params, const GaussianTarget& target,
                                                  double window, std::size_t n_samples,
                                                  const DesignOptions& opts = {}) {
    target.validate();
    detail::require(window > 0.0 && n_samples >= 2, "design_symmetric_schedule: need window > 0 and >= 2 samples");
    detail::require(opts.feasibility_margin > 0.0 && opts.feasibility_margin < 1.0,
                    "feasibility_margin must lie in (0, 1)");
    const TimeGrid grid = TimeGrid::spanning(0.0, window, n_samples);

    DesignedSchedule out;
    out.requested_p_tot = target.p_tot;
    out.max_feasible_p_tot = max_feasible_p_tot(target, params, grid, opts.fraction);

    GaussianTarget used = target;
    try {
        out.profile = required_fraction_profile(used, params, grid, opts.fraction);
    } catch (const InfeasibleTarget&) {
        if (opts.on_infeasible == InfeasiblePolicy::error) throw;
        used.p_tot = opts.feasibility_margin * out.max_feasible_p_tot;
        out.scaled = true;
        out.profile = required_fraction_profile(used, params, grid, opts.fraction);
    }
    out.p_tot = used.p_tot;

    const double delta_max = opts.fraction.delta_max_over_eta * params.eta;
    std::vector<SamplePoint> pts;
    pts.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double x = out.profile.fractions[i];
        const double d = x >= 1.0 ? delta_max : std::min(fraction_to_detuning(x, params.eta), delta_max);
        pts.push_back({grid.at(i), d});
    }
    out.schedule = make_sampled(pts, ScheduleKind::designed);
    return out;
}

enum class AdiabaticRegime { shaping, rabi };

struct AdiabaticityReport {
    AdiabaticRegime regime = AdiabaticRegime::shaping;
    double lhs = 0.0;       // 2 g^2 / kappa_t (shaping) or g (rabi)
    double beta_max = 0.0;  // max |dDelta/dt|
    double mid = 0.0;       // sqrt(beta_max)
    double rhs = 0.0;       // eta
    double lower_margin = 0.0;  // mid / lhs
    double upper_margin = 0.0;  // rhs / mid
    double margin_factor = 5.0;
    bool extra_rabi_check = true;  // kappa_t < g; always true in the shaping regime
    bool pass = false;
};

inline double max_sweep_rate(const DetuningSchedule& s) {
    switch (s.kind()) {
        case ScheduleKind::zero:
        case ScheduleKind::constant: return 0.0;
        case ScheduleKind::linear_ramp: return std::abs(s.rate());
        default: break;
    }
    const auto pts = s.samples();
    const std::size_t n = pts.size();
    double best = std::abs((pts[1].delta - pts[0].delta) / (pts[1].t - pts[0].t));
    best = std::max(best, std::abs((pts[n - 1].delta - pts[n - 2].delta) / (pts[n - 1].t - pts[n - 2].t)));
    for (std::size_t i = 1; i + 1 < n; ++i)
        best = std::max(best, std::abs((pts[i + 1].delta - pts[i - 1].delta) / (pts[i + 1].t - pts[i - 1].t)));
    return best;
}

inline AdiabaticityReport check_adiabaticity(const DetuningSchedule& schedule, const SystemParams& params,
                                             AdiabaticRegime regime, double margin_factor = 5.0) {
    params.validate();
    AdiabaticityReport r;
    r.regime = regime;
    r.margin_factor = margin_factor;
    r.lhs = regime == AdiabaticRegime::shaping ? 2.0 * params.g * params.g / params.kappa_t : params.g;
    r.beta_max = max_sweep_rate(schedule);
    r.mid = std::sqrt(r.beta_max);
    r.rhs = params.eta;
    constexpr double inf = std::numeric_limits<double>::infinity();
    r.lower_margin = r.lhs > 0.0 ? r.mid / r.lhs : inf;
    r.upper_margin = r.mid > 0.0 ? r.rhs / r.mid : inf;
    r.extra_rabi_check = regime == AdiabaticRegime::shaping || params.kappa_t < params.g;
    r.pass = r.lower_margin >= margin_factor && r.upper_margin >= margin_factor && r.extra_rabi_check;
    return r;
}

inline std::string_view to_string(AdiabaticRegime r) { return r == AdiabaticRegime::shaping ? "shaping" : "rabi"; }

}  // namespace ccqed
