// schedule.hpp: control-cavity detuning schedules Delta(t)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ccqed/error.hpp"

namespace ccqed {

enum class ScheduleKind { constant, zero, linear_ramp, sampled, designed };

inline std::string_view to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::constant: return "constant";
        case ScheduleKind::zero: return "zero";
        case ScheduleKind::linear_ramp: return "linear_ramp";
        case ScheduleKind::sampled: return "sampled";
        case ScheduleKind::designed: return "designed";
    }
    return "unknown";
}

struct SamplePoint {
    double t;
    double delta;
};

// Piecewise cubic through (t_i, y_i) with clamped end slopes. Slopes at the
// ends come from a three-point one-sided difference (two-point for n == 2).
// Outside [t_0, t_{n-1}] the end values are held.
class ClampedSpline {
public:
    ClampedSpline() = default;

    ClampedSpline(std::vector<double> t, std::vector<double> y) : t_(std::move(t)), y_(std::move(y)) {
        const std::size_t n = t_.size();
        detail::require(n >= 2 && y_.size() == n, "spline needs at least two samples");
        for (std::size_t i = 0; i < n; ++i) {
            detail::require(std::isfinite(t_[i]) && std::isfinite(y_[i]), "spline samples must be finite");
            if (i > 0 && !(t_[i] > t_[i - 1]))
                throw InvalidArgument("sample times must be strictly increasing");
        }
        double d0, dn;
        if (n == 2) {
            d0 = dn = (y_[1] - y_[0]) / (t_[1] - t_[0]);
        } else {
            d0 = one_sided(t_[0], t_[1], t_[2], y_[0], y_[1], y_[2]);
            dn = one_sided(t_[n - 1], t_[n - 2], t_[n - 3], y_[n - 1], y_[n - 2], y_[n - 3]);
        }
        solve_second_derivatives(d0, dn);
    }

    double operator()(double t) const {
        if (t <= t_.front()) return y_.front();
        if (t >= t_.back()) return y_.back();
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - t_.begin()) - 1;
        const double h = t_[k + 1] - t_[k];
        const double a = (t_[k + 1] - t) / h;
        const double b = (t - t_[k]) / h;
        return a * y_[k] + b * y_[k + 1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * h * h / 6.0;
    }

    std::span<const double> knots() const { return t_; }
    std::span<const double> values() const { return y_; }

private:
    // Derivative at x0 of the quadratic through (x0,y0),(x1,y1),(x2,y2).
    static double one_sided(double x0, double x1, double x2, double y0, double y1, double y2) {
        const double h1 = x1 - x0, h2 = x2 - x0;
        return (y1 - y0) * h2 / (h1 * (h2 - h1)) - (y2 - y0) * h1 / (h2 * (h2 - h1));
    }

    void solve_second_derivatives(double d0, double dn) {
        const std::size_t n = t_.size();
        std::vector<double> diag(n), rhs(n), upper(n, 0.0), lower(n, 0.0);
        const double h0 = t_[1] - t_[0];
        diag[0] = h0 / 3.0;
        upper[0] = h0 / 6.0;
        rhs[0] = (y_[1] - y_[0]) / h0 - d0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = t_[i] - t_[i - 1], hr = t_[i + 1] - t_[i];
            lower[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            upper[i] = hr / 6.0;
            rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
        }
        const double hn = t_[n - 1] - t_[n - 2];
        lower[n - 1] = hn / 6.0;
        diag[n - 1] = hn / 3.0;
        rhs[n - 1] = dn - (y_[n - 1] - y_[n - 2]) / hn;
        // Thomas algorithm
        for (std::size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_.assign(n, 0.0);
        m_[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }

    std::vector<double> t_, y_, m_;
};

class DetuningSchedule {
public:
    ScheduleKind kind() const { return kind_; }
    double value() const { return value_; }
    double rate() const { return rate_; }

    double operator()(double t) const {
        switch (kind_) {
            case ScheduleKind::zero: return 0.0;
            case ScheduleKind::constant: return value_;
            case ScheduleKind::linear_ramp: return rate_ * t;
            case ScheduleKind::sampled:
            case ScheduleKind::designed: return spline_(t);
        }
        return 0.0;
    }

    // Largest |Delta| on [t0, t1]; exact for analytic kinds, sample-based for splines.
    double max_abs(double t0, double t1) const {
        switch (kind_) {
            case ScheduleKind::zero: return 0.0;
            case ScheduleKind::constant: return std::abs(value_);
            case ScheduleKind::linear_ramp: return std::abs(rate_) * std::max(std::abs(t0), std::abs(t1));
            default: break;
        }
        double m = std::max(std::abs((*this)(t0)), std::abs((*this)(t1)));
        for (double v : spline_.values()) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<SamplePoint> samples() const {
        std::vector<SamplePoint> out;
        const auto t = spline_.knots();
        const auto y = spline_.values();
        for (std::size_t i = 0; i < t.size(); ++i) out.push_back({t[i], y[i]});
        return out;
    }

    friend DetuningSchedule make_zero();
    friend DetuningSchedule make_constant(double delta0);
    friend DetuningSchedule make_ramp(double beta);
    friend DetuningSchedule make_sampled(std::span<const SamplePoint> pairs, ScheduleKind kind);

private:
    ScheduleKind kind_ = ScheduleKind::zero;
    double value_ = 0.0;
    double rate_ = 0.0;
    ClampedSpline spline_;
};

inline DetuningSchedule make_zero() { return DetuningSchedule{}; }

inline DetuningSchedule make_constant(double delta0) {
    detail::require(std::isfinite(delta0), "constant detuning must be finite");
    DetuningSchedule s;
    s.kind_ = ScheduleKind::constant;
    s.value_ = delta0;
    return s;
}

// Delta(t) = beta * t
inline DetuningSchedule make_ramp(double beta) {
    detail::require(std::isfinite(beta), "ramp rate must be finite");
    DetuningSchedule s;
    s.kind_ = ScheduleKind::linear_ramp;
    s.rate_ = beta;
    return s;
}

inline DetuningSchedule make_sampled(std::span<const SamplePoint> pairs,
                                     ScheduleKind kind = ScheduleKind::sampled) {
    detail::require(kind == ScheduleKind::sampled || kind == ScheduleKind::designed,
                    "make_sampled: kind must be sampled or designed");
    std::vector<double> t, y;
    t.reserve(pairs.size());
    y.reserve(pairs.size());
    for (const auto& p : pairs) {
        t.push_back(p.t);
        y.push_back(p.delta);
    }
    DetuningSchedule s;
    s.kind_ = kind;
    s.spline_ = ClampedSpline(std::move(t), std::move(y));
    return s;
}

}  // namespace ccqed
