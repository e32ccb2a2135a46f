/**
 * @file invariants.hpp
 * @brief Lewis-Riesenfeld invariants of the two-level Hamiltonian.
 *
 * The invariant is parametrized by Bloch angles theta (polar) and beta
 * (azimuthal). Provides the invariant and its eigenstates, the invariance
 * residual, the angle equations of motion with and without the RWA, the
 * inverse formulas that turn designed angles into a pulse, and the LR phases.
 *
 * With alpha = beta - phi the exact angle equations are
 *
 *     dtheta/dt = -2 Omega_R cos(phi) sin(alpha)
 *     dbeta/dt  = -Delta - 2 Omega_R cot(theta) cos(phi) cos(alpha)
 *
 * and under the RWA (phi dropped from the coupling)
 *
 *     dtheta/dt = -Omega_R sin(beta)
 *     dbeta/dt  = -Delta - Omega_R cot(theta) cos(beta).
 */
#pragma once

#include "tlspulse/core.hpp"
#include "tlspulse/hamiltonians.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace tlspulse {

struct InvariantParams {
    double i0 = 1.0;  // rad/ns, arbitrary
    RealFn theta;
    RealFn beta;
    RealFn theta_rate;  // optional
    RealFn beta_rate;   // optional
    double fd_step = 1e-5;

    double theta_rate_at(double t) const { return theta_rate ? theta_rate(t) : central_derivative(theta, t, fd_step); }
    double beta_rate_at(double t) const { return beta_rate ? beta_rate(t) : central_derivative(beta, t, fd_step); }
};

/// (I0/2)[[cos theta, sin theta e^{-i beta}], [sin theta e^{i beta}, -cos theta]]
inline Mat2 invariant_matrix(double i0, double theta, double beta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Mat2 m;
    m << cplx(c, 0.0), s * std::exp(-kI * beta), s * std::exp(kI * beta), cplx(-c, 0.0);
    return 0.5 * i0 * m;
}

inline Mat2 invariant_matrix(const InvariantParams& p, double t) { return invariant_matrix(p.i0, p.theta(t), p.beta(t)); }

/// Eigenstates for eigenvalues +I0/2 and -I0/2.
inline std::pair<StateVector, StateVector> invariant_eigenstates(double theta, double beta) {
    const cplx em = std::exp(-0.5 * kI * beta);
    const cplx ep = std::exp(0.5 * kI * beta);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return {StateVector{c * em, s * ep}, StateVector{s * em, -c * ep}};
}

inline std::pair<StateVector, StateVector> invariant_eigenstates(const InvariantParams& p, double t) {
    return invariant_eigenstates(p.theta(t), p.beta(t));
}

/// || dI/dt - i [I, H] ||_F / I0, with dI/dt by a fourth-order central difference.
inline double invariance_residual(const InvariantParams& p, const Hamiltonian2x2& h, double t) {
    const double k = p.fd_step;
    auto inv = [&](double s) { return invariant_matrix(p, s); };
    const Mat2 didt = (-inv(t + 2 * k) + 8.0 * inv(t + k) - 8.0 * inv(t - k) + inv(t - 2 * k)) / (12.0 * k);
    const Mat2 i_t = inv(t);
    const Mat2 ht = h(t);
    return (didt - kI * (i_t * ht - ht * i_t)).norm() / p.i0;
}

// ---------------------------------------------------------------------------
// Angle equations of motion

struct AngleTrajectory {
    TimeGrid grid{0.0, 1.0, 1};
    std::vector<double> t;
    std::vector<double> theta;
    std::vector<double> beta;
    std::vector<double> alpha;  // beta - phi
    double max_theta_rate_ratio = 0.0;  // max |dtheta/dt| / (2 |Omega_R|) on the exact system
};

struct AngleOdeOptions {
    /// theta0 values closer than this to 0 or pi are moved inward (cot theta pole).
    double pole_epsilon = 1e-6;
    bool regularize = true;
};

enum class AngleModel { Exact, Rwa };

namespace detail {

struct AngleRates {
    double theta;
    double beta;
};

inline AngleRates angle_rates(const PulseSpec& p, AngleModel model, double t, double theta, double beta) {
    const double rabi = p.rabi(t);
    const double delta = detuning(p, t);
    const double cot = std::cos(theta) / std::sin(theta);
    if (model == AngleModel::Exact) {
        const double ph = p.phase(t);
        const double c = std::cos(ph);
        const double a = beta - ph;
        return {-2.0 * rabi * c * std::sin(a), -delta - 2.0 * rabi * cot * c * std::cos(a)};
    }
    return {-rabi * std::sin(beta), -delta - rabi * cot * std::cos(beta)};
}

inline double regularized_theta0(double theta0, const AngleOdeOptions& o) {
    if (!std::isfinite(theta0)) throw ValidationError("angle ODE: non-finite theta0");
    const double s = std::sin(theta0);
    if (std::abs(s) >= o.pole_epsilon) return theta0;
    if (!o.regularize) throw ValidationError("angle ODE: theta0 sits on the cot(theta) pole");
    // Step off the pole towards the interior of [0, pi].
    return std::cos(theta0) > 0.0 ? theta0 + o.pole_epsilon : theta0 - o.pole_epsilon;
}

inline AngleTrajectory integrate_angles(const PulseSpec& p, AngleModel model, double theta0, double beta0,
                                        const TimeGrid& grid, const AngleOdeOptions& o) {
    AngleTrajectory tr;
    tr.grid = grid;
    const std::size_t n = grid.size();
    tr.t.reserve(n);
    tr.theta.reserve(n);
    tr.beta.reserve(n);
    tr.alpha.reserve(n);
    double th = regularized_theta0(theta0, o);
    double be = beta0;
    auto push = [&](double t) {
        tr.t.push_back(t);
        tr.theta.push_back(th);
        tr.beta.push_back(be);
        tr.alpha.push_back(be - p.phase(t));
    };
    auto bound = [&](double t, const AngleRates& r) {
        const double cap = 2.0 * std::abs(p.rabi(t));
        if (cap > 0.0) tr.max_theta_rate_ratio = std::max(tr.max_theta_rate_ratio, std::abs(r.theta) / cap);
    };
    push(grid[0]);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double t = grid[k];
        const double dt = grid[k + 1] - t;
        const AngleRates k1 = angle_rates(p, model, t, th, be);
        const AngleRates k2 = angle_rates(p, model, t + 0.5 * dt, th + 0.5 * dt * k1.theta, be + 0.5 * dt * k1.beta);
        const AngleRates k3 = angle_rates(p, model, t + 0.5 * dt, th + 0.5 * dt * k2.theta, be + 0.5 * dt * k2.beta);
        const AngleRates k4 = angle_rates(p, model, t + dt, th + dt * k3.theta, be + dt * k3.beta);
        if (model == AngleModel::Exact) bound(t, k1);
        th += dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
        be += dt / 6.0 * (k1.beta + 2.0 * k2.beta + 2.0 * k3.beta + k4.beta);
        if (!std::isfinite(th) || !std::isfinite(be)) {
            throw NumericalError("angle ODE: non-finite state at t = " + std::to_string(grid[k + 1])
                                 + " ns (cot theta overflow)");
        }
        push(grid[k + 1]);
    }
    return tr;
}

}  // namespace detail

inline AngleTrajectory auxiliary_odes_exact(const PulseSpec& pulse, double theta0, double beta0, const TimeGrid& grid,
                                            const AngleOdeOptions& opts = {}) {
    return detail::integrate_angles(pulse, AngleModel::Exact, theta0, beta0, grid, opts);
}

inline AngleTrajectory auxiliary_odes_rwa(const PulseSpec& pulse, double theta0, double beta0, const TimeGrid& grid,
                                          const AngleOdeOptions& opts = {}) {
    return detail::integrate_angles(pulse, AngleModel::Rwa, theta0, beta0, grid, opts);
}

/**
 * Invariance residual along a sampled trajectory: dI/dt from the fourth-order
 * sample stencil on the matrix entries. Returns the max over samples.
 */
inline double invariance_residual(const AngleTrajectory& tr, const Hamiltonian2x2& h, double i0 = 1.0) {
    const std::size_t n = tr.theta.size();
    std::vector<double> re01(n), im01(n), d00(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Mat2 m = invariant_matrix(i0, tr.theta[k], tr.beta[k]);
        re01[k] = m(0, 1).real();
        im01[k] = m(0, 1).imag();
        d00[k] = m(0, 0).real();
    }
    const double dt = tr.grid.dt();
    const auto dre = differentiate_samples(re01, dt);
    const auto dim = differentiate_samples(im01, dt);
    const auto dd = differentiate_samples(d00, dt);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        Mat2 didt;
        const cplx off(dre[k], dim[k]);
        didt << cplx(dd[k], 0.0), off, std::conj(off), cplx(-dd[k], 0.0);
        const Mat2 m = invariant_matrix(i0, tr.theta[k], tr.beta[k]);
        const Mat2 ht = h(tr.t[k]);
        worst = std::max(worst, (didt - kI * (m * ht - ht * m)).norm() / i0);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Inverse engineering

/// A function with its first two derivatives.
struct SmoothFn {
    RealFn f;
    RealFn df;
    RealFn d2f;
};

/// Pulse with the given Rabi frequency and detuning, phi = 0, for RWA use.
inline PulseSpec rwa_pulse(RealFn rabi, RealFn detuning_fn) {
    PulseSpec p;
    p.rabi = std::move(rabi);
    p.phase = [](double) { return 0.0; };
    p.phase_rate = [](double) { return 0.0; };
    p.phase_accel = [](double) { return 0.0; };
    p.omega0 = std::move(detuning_fn);
    return p;
}

inline constexpr double kSinBetaMin = 1e-12;

struct InverseRwa {
    RealFn rabi;
    RealFn detuning;
    std::vector<double> t;
    std::vector<double> rabi_samples;
    std::vector<double> detuning_samples;
};

/**
 * Omega_R = -theta' / sin(beta), Delta = -beta' + theta' cot(theta) cot(beta).
 * Throws NumericalError when sin(beta) vanishes on the grid.
 */
inline InverseRwa inverse_rwa(const SmoothFn& theta, const SmoothFn& beta, const TimeGrid& grid) {
    InverseRwa out;
    out.rabi = [theta, beta](double t) { return -theta.df(t) / std::sin(beta.f(t)); };
    out.detuning = [theta, beta](double t) {
        const double thd = theta.df(t);
        // cos(beta) at beta = -pi/2 rounds to ~6e-17; treat it as the exact zero it stands for.
        const double cb = std::cos(beta.f(t));
        if (thd == 0.0 || std::abs(cb) < 1e-15) return -beta.df(t);
        const double th = theta.f(t);
        return -beta.df(t) + thd * std::cos(th) / std::sin(th) * cb / std::sin(beta.f(t));
    };
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        if (std::abs(std::sin(beta.f(t))) < kSinBetaMin) {
            throw NumericalError("inverse_rwa: sin(beta) vanishes at t = " + std::to_string(t) + " ns");
        }
        out.t.push_back(t);
        out.rabi_samples.push_back(out.rabi(t));
        out.detuning_samples.push_back(out.detuning(t));
    }
    return out;
}

inline constexpr double kCancellationTolerance = 1e-9;  // rad/ns, |theta'| at zeros of cos(phi)

/// Zeros of cos(phi(t)) in the open interval (t0, tf), by sign scan and bisection.
inline std::vector<double> find_cos_zeros(const RealFn& phase, double t0, double tf, std::size_t n_scan = 20000) {
    std::vector<double> zeros;
    auto c = [&](double t) { return std::cos(phase(t)); };
    const double h = (tf - t0) / static_cast<double>(n_scan);
    double a = t0;
    double ca = c(a);
    for (std::size_t k = 1; k <= n_scan; ++k) {
        const double b = k == n_scan ? tf : t0 + static_cast<double>(k) * h;
        const double cb = c(b);
        if (ca == 0.0 && a > t0) zeros.push_back(a);
        if (ca * cb < 0.0) {
            double lo = a, hi = b, clo = ca;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double cm = c(mid);
                if ((cm < 0.0) == (clo < 0.0)) {
                    lo = mid;
                    clo = cm;
                } else {
                    hi = mid;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        a = b;
        ca = cb;
    }
    return zeros;
}

struct InverseExact {
    RealFn rabi;
    RealFn detuning;
    RealFn omega0;
    std::vector<double> cos_zeros;
    std::vector<double> t;
    std::vector<double> rabi_samples;
    std::vector<double> detuning_samples;
    std::vector<double> omega0_samples;

    /// PulseSpec driving the designed dynamics.
    PulseSpec pulse(const SmoothFn& phase) const {
        PulseSpec p;
        p.rabi = rabi;
        p.phase = phase.f;
        p.phase_rate = phase.df;
        if (phase.d2f) p.phase_accel = phase.d2f;
        p.omega0 = omega0;
        return p;
    }
};

/**
 * Rabi frequency at a zero z of cos(phi) by L'Hopital:
 * Omega_R(z) = theta''(z) / (2 phi'(z) sin(phi(z)) sin(alpha(z))).
 */
inline double lhopital_rabi(const SmoothFn& theta, const SmoothFn& alpha, const SmoothFn& phase, double z) {
    return theta.d2f(z) / (2.0 * phase.df(z) * std::sin(phase.f(z)) * std::sin(alpha.f(z)));
}

/**
 * Pulse from designed angles without the RWA:
 *
 *     Omega_R = -theta' / (2 cos(phi) sin(alpha))
 *     Delta   = -(phi' + alpha') + theta' cot(theta) cot(alpha)
 *     omega_0 = Delta + phi'
 *
 * theta' must vanish at each zero of cos(phi) (checked to 1e-9 rad/ns, else
 * NumericalError). Near such a zero the residual theta'(z) is subtracted so
 * the ratio stays smooth, and at the zero itself L'Hopital is used. Where
 * sin(theta) = 0 the product theta' cot(theta) cot(alpha) is replaced by its
 * limit, -2 alpha' for a double zero of sin(theta) and -alpha' for a simple
 * one; this needs alpha = pi/2 there. alpha must stay inside (0, pi).
 */
inline InverseExact inverse_exact(const SmoothFn& theta, const SmoothFn& alpha, const SmoothFn& phase,
                                  const TimeGrid& grid) {
    InverseExact out;
    out.cos_zeros = find_cos_zeros(phase.f, grid.t0(), grid.tf());
    for (double z : out.cos_zeros) {
        if (std::abs(theta.df(z)) > kCancellationTolerance) {
            throw NumericalError("design infeasible: dtheta/dt = " + std::to_string(theta.df(z))
                                 + " at the zero of cos(phi) at t = " + std::to_string(z) + " ns");
        }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double a = alpha.f(grid[k]);
        if (!(a > 0.0 && a < kPi)) {
            throw ValidationError("inverse_exact: alpha leaves (0, pi) at t = " + std::to_string(grid[k]) + " ns");
        }
    }

    const double tscale = grid.tf() - grid.t0();
    const auto zeros = out.cos_zeros;
    out.rabi = [theta, alpha, phase, zeros, tscale](double t) {
        const double c = std::cos(phase.f(t));
        double nearest = 0.0;
        double gap = std::numeric_limits<double>::infinity();
        for (double z : zeros) {
            if (std::abs(t - z) < gap) {
                gap = std::abs(t - z);
                nearest = z;
            }
        }
        if (gap <= 1e-12 * tscale) return lhopital_rabi(theta, alpha, phase, nearest);
        double num = theta.df(t);
        if (std::abs(c) < 1e-2 && !zeros.empty()) num -= theta.df(nearest);
        return -num / (2.0 * c * std::sin(alpha.f(t)));
    };
    out.detuning = [theta, alpha, phase](double t) {
        const double th = theta.f(t);
        const double thd = theta.df(t);
        const double ad = alpha.df(t);
        const double st = std::sin(th);
        double product;
        if (std::abs(st) < 1e-12) {
            if (std::abs(std::cos(alpha.f(t))) > 1e-9) {
                throw NumericalError("design infeasible: sin(theta) = 0 with alpha != pi/2 at t = "
                                     + std::to_string(t) + " ns");
            }
            product = std::abs(thd) < kCancellationTolerance ? -2.0 * ad : -ad;
        } else {
            const double a = alpha.f(t);
            product = thd * std::cos(th) / st * std::cos(a) / std::sin(a);
        }
        return -(phase.df(t) + ad) + product;
    };
    out.omega0 = [det = out.detuning, phase](double t) { return det(t) + phase.df(t); };

    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        out.t.push_back(t);
        out.rabi_samples.push_back(out.rabi(t));
        out.detuning_samples.push_back(out.detuning(t));
        out.omega0_samples.push_back(out.omega0(t));
        if (!std::isfinite(out.rabi_samples.back()) || !std::isfinite(out.detuning_samples.back())) {
            throw NumericalError("inverse_exact: non-finite pulse at t = " + std::to_string(t) + " ns");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lewis-Riesenfeld phases

struct LrPhase {
    std::vector<double> t;
    std::vector<double> gamma_plus;
    std::vector<double> gamma_minus;
    cplx c_plus;
    cplx c_minus;
};

/**
 * gamma_+-(t) = int_0^t <phi_+-| i d/dt - H |phi_+-> dt', with
 * <phi_+-| i d/dt |phi_+-> = +-(1/2) beta' cos(theta). Simpson's rule per grid
 * interval with a midpoint evaluation.
 */
inline LrPhase lr_phase(const InvariantParams& p, const Hamiltonian2x2& h, const TimeGrid& grid,
                        const StateVector& psi0) {
    auto integrand = [&](double t) {
        const double th = p.theta(t);
        const double be = p.beta(t);
        const double geo = 0.5 * p.beta_rate_at(t) * std::cos(th);
        const auto [fp, fm] = invariant_eigenstates(th, be);
        const Mat2 ht = h(t);
        const double ep = inner(fp, StateVector::from(ht * fp.vec())).real();
        const double em = inner(fm, StateVector::from(ht * fm.vec())).real();
        return std::pair<double, double>{geo - ep, -geo - em};
    };
    LrPhase out;
    const auto [f0p, f0m] = invariant_eigenstates(p, grid[0]);
    out.c_plus = inner(f0p, psi0);
    out.c_minus = inner(f0m, psi0);
    out.t.push_back(grid[0]);
    out.gamma_plus.push_back(0.0);
    out.gamma_minus.push_back(0.0);
    auto prev = integrand(grid[0]);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double a = grid[k];
        const double b = grid[k + 1];
        const auto mid = integrand(0.5 * (a + b));
        const auto end = integrand(b);
        const double w = (b - a) / 6.0;
        out.t.push_back(b);
        out.gamma_plus.push_back(out.gamma_plus.back() + w * (prev.first + 4.0 * mid.first + end.first));
        out.gamma_minus.push_back(out.gamma_minus.back() + w * (prev.second + 4.0 * mid.second + end.second));
        prev = end;
    }
    return out;
}

}  // namespace tlspulse
