// model_core.hpp: static coupled-mode theory of the three-cavity emitter system
//
// Rotating frame at the target-cavity frequency (omega_t == 0); every rate is
// in units of kappa_t and every time in units of 1/kappa_t. Cavity vectors are
// ordered (left, target, right) throughout.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>

#include "ccqed/error.hpp"

namespace ccqed {

using cplx = std::complex<double>;
using ComplexMatrix3 = Eigen::Matrix3cd;
using ComplexMatrix4 = Eigen::Matrix4cd;
using ComplexVector3 = Eigen::Vector3cd;

inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kTarget = 1;
inline constexpr std::size_t kRight = 2;

struct SystemParams {
    double eta = 10.0;      // inter-cavity coupling
    double kappa_t = 1.0;   // target cavity loss (realised through the waveguide continuum)
    double kappa_l = 1.0;
    double kappa_r = 1.0;
    double g = 0.1;         // emitter / target-cavity coupling
    double gamma = 0.0;     // emitter decay into leaky modes
    double omega_e_offset = 0.0;
    // Extra target loss on top of the continuum coupling. Not part of the
    // reference model; zero unless a config asks for it.
    double kappa_t_intrinsic = 0.0;

    void validate() const {
        auto finite_nonneg = [](double v, const char* name) {
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidArgument(std::string(name) + " must be finite and >= 0");
        };
        finite_nonneg(eta, "eta");
        finite_nonneg(kappa_t, "kappa_t");
        finite_nonneg(kappa_l, "kappa_l");
        finite_nonneg(kappa_r, "kappa_r");
        finite_nonneg(g, "g");
        finite_nonneg(gamma, "gamma");
        finite_nonneg(kappa_t_intrinsic, "kappa_t_intrinsic");
        if (!std::isfinite(omega_e_offset)) throw InvalidArgument("omega_e_offset must be finite");
        if (eta <= 0.0) throw InvalidArgument("eta must be > 0");
        if (kappa_t <= 0.0) throw InvalidArgument("kappa_t must be > 0");
    }
};

// {g, eta, kappa_l, kappa_r} = {0.1, 10, 1, 1} kappa_t, gamma = 0.
inline SystemParams reference_shaping_params() { return SystemParams{}; }

struct EigenSystem {
    std::array<cplx, 3> omegas{};
    std::array<ComplexVector3, 3> vectors{};
    std::array<double, 3> target_fractions{};
    std::array<double, 3> effective_losses{};
    std::size_t dark_index = 0;
};

inline ComplexMatrix3 build_cavity_hamiltonian(const SystemParams& params, double delta) {
    params.validate();
    const cplx i{0.0, 1.0};
    ComplexMatrix3 h = ComplexMatrix3::Zero();
    h(kLeft, kLeft) = delta - i * params.kappa_l;
    h(kTarget, kTarget) = -i * params.kappa_t;
    h(kRight, kRight) = -delta - i * params.kappa_r;
    h(kLeft, kTarget) = h(kTarget, kLeft) = params.eta;
    h(kTarget, kRight) = h(kRight, kTarget) = params.eta;
    return h;
}

// Lossless eigenfrequencies, dark mode first: (0, +sqrt(2 eta^2 + delta^2), -sqrt(...)).
inline std::array<double, 3> analytic_eigenvalues(double eta, double delta) {
    detail::require(eta > 0.0, "eta must be > 0");
    const double split = std::sqrt(2.0 * eta * eta + delta * delta);
    return {0.0, split, -split};
}

inline Eigen::Vector3d dark_mode_vector(double eta, double delta) {
    detail::require(eta > 0.0, "eta must be > 0");
    const double r = delta / eta;
    return Eigen::Vector3d(-1.0, r, 1.0) / std::sqrt(2.0 + r * r);
}

// |alpha_t^(1)|^2 of the dark mode; also the coupled-oscillator LDOS ratio D_t / D_0.
inline double ldos_ratio(double eta, double delta) {
    detail::require(eta > 0.0, "eta must be > 0");
    return delta * delta / (2.0 * eta * eta + delta * delta);
}

inline double index_shift_to_detuning(double delta_n, double n, double omega) {
    detail::require(n > 0.0, "refractive index must be > 0");
    detail::require(omega > 0.0, "carrier frequency must be > 0");
    return -(delta_n / n) * omega;
}

// gamma_eff / gamma_0 for the dark mode.
inline double se_rate_ratio(const SystemParams& params, double delta) {
    params.validate();
    const Eigen::Vector3d a = dark_mode_vector(params.eta, delta);
    const double target = a[kTarget] * a[kTarget] * params.kappa_t;
    const double denom = target + a[kLeft] * a[kLeft] * params.kappa_l + a[kRight] * a[kRight] * params.kappa_r;
    if (denom <= 0.0) throw DegenerateError("se_rate_ratio: all cavity losses are zero");
    return target / denom;
}

struct EigenSolverOptions {
    int max_iterations = 16;
    double residual_tolerance = 1e-13;  // relative to the largest matrix entry
};

namespace detail {

// Roots of z^3 + a z^2 + b z + c by Cardano's formula in complex arithmetic.
inline std::array<cplx, 3> cubic_roots(cplx a, cplx b, cplx c) {
    const cplx p = b - a * a / 3.0;
    const cplx q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    cplx w = -q / 2.0 + disc;
    const cplx w_alt = -q / 2.0 - disc;
    if (std::abs(w_alt) > std::abs(w)) w = w_alt;

    std::array<cplx, 3> roots{};
    const cplx shift = -a / 3.0;
    if (std::abs(w) == 0.0) {
        roots.fill(shift);
        return roots;
    }
    const cplx u = std::pow(w, 1.0 / 3.0);
    const cplx rot{-0.5, std::sqrt(3.0) / 2.0};
    cplx uk = u;
    for (auto& r : roots) {
        r = uk - p / (3.0 * uk) + shift;
        uk *= rot;
    }
    return roots;
}

inline cplx polish_root(cplx z, cplx a, cplx b, cplx c, int iterations) {
    for (int it = 0; it < iterations; ++it) {
        const cplx f = ((z + a) * z + b) * z + c;
        const cplx df = (3.0 * z + 2.0 * a) * z + b;
        if (std::abs(df) == 0.0) break;
        const cplx step = f / df;
        z -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

// Bilinear null vector of (h - lambda I) from the best-conditioned pair of rows.
inline ComplexVector3 null_vector(const ComplexMatrix3& m) {
    ComplexVector3 best = ComplexVector3::Zero();
    double best_norm = 0.0;
    const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (auto [r1, r2] : pairs) {
        const ComplexVector3 a = m.row(r1).transpose();
        const ComplexVector3 b = m.row(r2).transpose();
        const ComplexVector3 v = a.cross(b);
        const double n = v.norm();
        if (n > best_norm) {
            best_norm = n;
            best = v;
        }
    }
    if (best_norm == 0.0) return ComplexVector3(1.0, 0.5, 0.25).normalized();
    return best / best_norm;
}

inline void fix_phase(ComplexVector3& v) {
    std::size_t anchor = kRight;
    if (std::abs(v[kRight]) < 1e-12) {
        v.cwiseAbs().maxCoeff(&anchor);
    }
    const cplx a = v[static_cast<Eigen::Index>(anchor)];
    if (std::abs(a) > 0.0) v *= std::conj(a) / std::abs(a);
}

}  // namespace detail

// Eigenpairs of a 3x3 complex (generally non-Hermitian) matrix. The dark mode
// (real part nearest zero) is placed first; the other two follow in order of
// decreasing real part. Effective losses use kappa_j = -Im h_jj.
inline EigenSystem numeric_eigensystem(const ComplexMatrix3& h, const EigenSolverOptions& opts = {}) {
    if (!h.allFinite()) throw InvalidArgument("numeric_eigensystem: matrix has non-finite entries");
    const double scale = std::max(h.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

    const cplx trace = h.trace();
    const cplx minors = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0) + h(0, 0) * h(2, 2) - h(0, 2) * h(2, 0) +
                        h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1);
    const cplx det = h.determinant();
    const cplx a = -trace, b = minors, c = -det;

    std::array<cplx, 3> roots = detail::cubic_roots(a, b, c);
    for (auto& r : roots) r = detail::polish_root(r, a, b, c, opts.max_iterations);

    std::array<ComplexVector3, 3> vecs;
    const double tol = opts.residual_tolerance * scale;
    for (std::size_t k = 0; k < 3; ++k) {
        const ComplexMatrix3 shifted = h - roots[k] * ComplexMatrix3::Identity();
        ComplexVector3 v = detail::null_vector(shifted);
        // inverse-iteration refinement; the tiny shift keeps the solve regular
        const cplx nudge = cplx(1.0, 1.0) * (1e-12 * scale);
        bool converged = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            const ComplexVector3 y = (shifted - nudge * ComplexMatrix3::Identity()).partialPivLu().solve(v);
            if (y.allFinite() && y.norm() > 0.0) v = y.normalized();
            if ((h * v - roots[k] * v).norm() <= tol) {
                converged = true;
                break;
            }
        }
        if (!converged) throw ConvergenceError("numeric_eigensystem: eigenvector refinement did not converge");
        detail::fix_phase(v);
        vecs[k] = v;
    }

    std::array<std::size_t, 3> order{0, 1, 2};
    const auto dark = static_cast<std::size_t>(
        std::min_element(roots.begin(), roots.end(),
                         [](cplx x, cplx y) { return std::abs(x.real()) < std::abs(y.real()); }) -
        roots.begin());
    std::swap(order[0], order[dark]);
    if (roots[order[1]].real() < roots[order[2]].real()) std::swap(order[1], order[2]);

    const std::array<double, 3> losses{-h(0, 0).imag(), -h(1, 1).imag(), -h(2, 2).imag()};
    EigenSystem es;
    es.dark_index = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        es.omegas[i] = roots[order[i]];
        es.vectors[i] = vecs[order[i]];
        es.target_fractions[i] = std::norm(es.vectors[i][kTarget]);
        double k = 0.0;
        for (Eigen::Index j = 0; j < 3; ++j) k += std::norm(es.vectors[i][j]) * losses[static_cast<std::size_t>(j)];
        es.effective_losses[i] = k;
    }
    return es;
}

// Emitter plus the three coupled modes; g_i = alpha_t^(i) g (complex once losses are on).
inline ComplexMatrix4 coupled_qe_hamiltonian(const SystemParams& params, double delta) {
    const EigenSystem es = numeric_eigensystem(build_cavity_hamiltonian(params, delta));
    const cplx i{0.0, 1.0};
    ComplexMatrix4 m = ComplexMatrix4::Zero();
    m(0, 0) = params.omega_e_offset - i * params.gamma;
    for (Eigen::Index k = 0; k < 3; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        m(k + 1, k + 1) = es.omegas[idx].real() - i * es.effective_losses[idx];
        const cplx gk = es.vectors[idx][kTarget] * params.g;
        m(0, k + 1) = gk;
        m(k + 1, 0) = gk;
    }
    return m;
}

}  // namespace ccqed
