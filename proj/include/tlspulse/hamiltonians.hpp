/**
 * @file hamiltonians.hpp
 * @brief Schrodinger-, interaction- and RWA-picture Hamiltonians of a driven
 *        two-level atom, the field-adapted picture transformation, and the
 *        closed-form eigensystem.
 *
 * Basis ordering is (|g>, |e>). The Schrodinger-picture coupling is
 * Omega_R cos(phi) on both off-diagonal entries.
 */
#pragma once

#include "tlspulse/core.hpp"

#include <cmath>
#include <vector>

namespace tlspulse {

/// Delta(t) = omega_0(t) - dphi/dt.
inline double detuning(const PulseSpec& pulse, double t) { return pulse.omega0(t) - pulse.phase_rate(t); }

/// Omega(t) = Omega_R (1 + e^{-2 i phi}).
inline cplx omega_complex(const PulseSpec& pulse, double t) {
    return pulse.rabi(t) * (1.0 + std::exp(-2.0 * kI * pulse.phase(t)));
}

/// dOmega/dt from the pulse's Rabi rate and phase rate.
inline cplx omega_complex_rate(const PulseSpec& pulse, double t) {
    const cplx rot = std::exp(-2.0 * kI * pulse.phase(t));
    return pulse.rabi_rate_at(t) * (1.0 + rot) - 2.0 * kI * pulse.phase_rate(t) * pulse.rabi(t) * rot;
}

/// (1/2) [[-delta, omega], [conj(omega), delta]]
inline Mat2 two_level_matrix(double delta, cplx omega) {
    Mat2 h;
    h << cplx(-0.5 * delta, 0.0), 0.5 * omega, 0.5 * std::conj(omega), cplx(0.5 * delta, 0.0);
    return h;
}

/// Exact Hamiltonian in the field-adapted interaction picture.
inline Hamiltonian2x2 h_interaction(PulseSpec pulse) {
    return {Picture::I, [p = std::move(pulse)](double t) {
                return two_level_matrix(detuning(p, t), omega_complex(p, t));
            }};
}

inline Hamiltonian2x2 h_schrodinger(PulseSpec pulse) {
    return {Picture::S, [p = std::move(pulse)](double t) {
                const double w0 = p.omega0(t);
                const double coupling = p.rabi(t) * std::cos(p.phase(t));
                Mat2 h;
                h << cplx(-0.5 * w0, 0.0), cplx(coupling, 0.0), cplx(coupling, 0.0), cplx(0.5 * w0, 0.0);
                return h;
            }};
}

/// Rotating-wave approximation: the phase drops out of the coupling.
inline Hamiltonian2x2 h_rwa(PulseSpec pulse) {
    return {Picture::RWA, [p = std::move(pulse)](double t) {
                return two_level_matrix(detuning(p, t), cplx(p.rabi(t), 0.0));
            }};
}

/// U_phi = diag(e^{i phi/2}, e^{-i phi/2}).
inline Mat2 u_phi(double phase_value) {
    Mat2 u = Mat2::Zero();
    u(0, 0) = std::exp(0.5 * kI * phase_value);
    u(1, 1) = std::exp(-0.5 * kI * phase_value);
    return u;
}

/// H_phi = (dphi/dt / 2)(|e><e| - |g><g|).
inline Mat2 h_phi(double phase_rate_value) {
    Mat2 h = Mat2::Zero();
    h(0, 0) = -0.5 * phase_rate_value;
    h(1, 1) = 0.5 * phase_rate_value;
    return h;
}

enum class PictureDirection { S_to_I, I_to_S };

/**
 * Field-adapted picture change. S_to_I applies H = U^dag (H_s - H_phi) U;
 * I_to_S inverts it. S maps to I and S'' maps to I' (and back).
 */
inline Hamiltonian2x2 transform_between_pictures(const Hamiltonian2x2& h, RealFn phase_fn, RealFn phase_rate_fn,
                                                 PictureDirection direction) {
    Picture target{};
    if (direction == PictureDirection::S_to_I) {
        if (h.picture == Picture::S) {
            target = Picture::I;
        } else if (h.picture == Picture::S_doubleprime) {
            target = Picture::I_prime;
        } else {
            throw ValidationError("transform S->I needs a Schrodinger-picture Hamiltonian, got "
                                  + std::string(to_string(h.picture)));
        }
        return {target, [src = h.element_fn, ph = std::move(phase_fn), rate = std::move(phase_rate_fn)](double t) {
                    const Mat2 u = u_phi(ph(t));
                    return Mat2(u.adjoint() * (src(t) - h_phi(rate(t))) * u);
                }};
    }
    if (h.picture == Picture::I) {
        target = Picture::S;
    } else if (h.picture == Picture::I_prime) {
        target = Picture::S_doubleprime;
    } else {
        throw ValidationError("transform I->S needs an interaction-picture Hamiltonian, got "
                              + std::string(to_string(h.picture)));
    }
    return {target, [src = h.element_fn, ph = std::move(phase_fn), rate = std::move(phase_rate_fn)](double t) {
                const Mat2 u = u_phi(ph(t));
                return Mat2(u * src(t) * u.adjoint() + h_phi(rate(t)));
            }};
}

// ---------------------------------------------------------------------------
// Eigensystem

struct EigenSystem {
    double epsilon0 = 0.0;  // eigenvalue splitting, >= 0
    double e_plus = 0.0;
    double e_minus = 0.0;
    StateVector v_plus;
    StateVector v_minus;
    bool degenerate = false;
};

inline constexpr double kBareLimitRatio = 1e-12;

/**
 * Closed-form eigensystem of a Hermitian 2x2 matrix written as
 * h0 + (1/2)[[-Delta, Omega], [Omega*, Delta]].
 *
 * Eigenvectors follow the |e>-component-real-positive phase convention,
 * |+> ~ (Omega, eps + Delta), |-> ~ (-Omega, eps - Delta); the small one of
 * eps +/- Delta is computed as |Omega|^2 / (eps -/+ Delta) to avoid
 * cancellation. For |Omega| < 1e-12 eps the bare states are returned, ordered
 * by sign(Delta). For eps == 0 the pair (|g>, |e>) is returned with
 * `degenerate` set.
 */
inline EigenSystem eigensystem(const Mat2& h) {
    EigenSystem es;
    const double h0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double delta = h(1, 1).real() - h(0, 0).real();
    const cplx omega = h(0, 1) + std::conj(h(1, 0));  // 2 h_ge, symmetrized
    const double abs_omega = std::abs(omega);
    const double eps = std::hypot(delta, abs_omega);
    es.epsilon0 = eps;
    es.e_plus = h0 + 0.5 * eps;
    es.e_minus = h0 - 0.5 * eps;

    if (eps == 0.0) {
        es.degenerate = true;
        es.v_plus = StateVector::ground();
        es.v_minus = StateVector::excited();
        return es;
    }
    if (abs_omega < kBareLimitRatio * eps) {
        if (delta > 0.0) {
            es.v_plus = StateVector::excited();
            es.v_minus = StateVector::ground();
        } else {
            es.v_plus = StateVector::ground();
            es.v_minus = StateVector::excited();
        }
        return es;
    }

    const double eps_plus_delta = delta >= 0.0 ? eps + delta : abs_omega * abs_omega / (eps - delta);
    const double eps_minus_delta = delta <= 0.0 ? eps - delta : abs_omega * abs_omega / (eps + delta);

    const double n_plus = std::sqrt(abs_omega * abs_omega + eps_plus_delta * eps_plus_delta);
    const double n_minus = std::sqrt(abs_omega * abs_omega + eps_minus_delta * eps_minus_delta);
    es.v_plus = {omega / n_plus, cplx(eps_plus_delta / n_plus, 0.0)};
    es.v_minus = {-omega / n_minus, cplx(eps_minus_delta / n_minus, 0.0)};
    return es;
}

inline EigenSystem eigensystem(const Hamiltonian2x2& h, double t) { return eigensystem(h(t)); }

/// Flip eigenvector signs so each overlaps non-negatively with `prev`.
inline void align_to(EigenSystem& es, const EigenSystem& prev) {
    if (inner(prev.v_plus, es.v_plus).real() < 0.0) {
        es.v_plus.cg = -es.v_plus.cg;
        es.v_plus.ce = -es.v_plus.ce;
    }
    if (inner(prev.v_minus, es.v_minus).real() < 0.0) {
        es.v_minus.cg = -es.v_minus.cg;
        es.v_minus.ce = -es.v_minus.ce;
    }
}

/// Eigensystems along a grid with sign continuity enforced sample to sample.
inline std::vector<EigenSystem> eigensystem_trajectory(const Hamiltonian2x2& h, const TimeGrid& grid) {
    std::vector<EigenSystem> out;
    out.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EigenSystem es = eigensystem(h, grid[k]);
        if (!out.empty()) align_to(es, out.back());
        out.push_back(es);
    }
    return out;
}

}  // namespace tlspulse
