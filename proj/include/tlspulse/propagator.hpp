/**
 * @file propagator.hpp
 * @brief Fixed-step RK4 integration of i d/dt psi = H(t) psi.
 */
#pragma once

#include "tlspulse/core.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace tlspulse {

inline constexpr double kNormTolerance = 1e-8;

struct PropagationOptions {
    /// Keep every k-th sample; the final sample is always kept.
    std::size_t record_every = 1;
    /// Scan the grid for resolution-rule violations before integrating.
    bool check_resolution = true;
};

struct PropagationResult {
    TimeGrid grid{0.0, 1.0, 1};
    Picture picture = Picture::I;
    std::vector<double> t;  // recorded sample times
    std::vector<StateVector> states;
    std::vector<double> p_g;
    std::vector<double> p_e;
    std::vector<double> norm_error;  // | ||psi|| - 1 |
    double min_steps_per_period = 0.0;

    const StateVector& final_state() const { return states.back(); }
    double max_norm_error() const {
        double m = 0.0;
        for (double e : norm_error) m = std::max(m, e);
        return m;
    }
    bool accepted() const { return max_norm_error() < kNormTolerance; }
};

/**
 * One classical RK4 step. `h` holds H at t, t + dt/2 and t + dt.
 */
inline StateVector propagate_step(const std::array<Mat2, 3>& h, const StateVector& psi, double dt) {
    const Eigen::Vector2cd y = psi.vec();
    const cplx mi(0.0, -1.0);
    const Eigen::Vector2cd k1 = mi * (h[0] * y);
    const Eigen::Vector2cd k2 = mi * (h[1] * (y + 0.5 * dt * k1));
    const Eigen::Vector2cd k3 = mi * (h[1] * (y + 0.5 * dt * k2));
    const Eigen::Vector2cd k4 = mi * (h[2] * (y + dt * k3));
    return StateVector::from(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

namespace detail {

inline void record(PropagationResult& r, double t, const StateVector& s) {
    r.t.push_back(t);
    r.states.push_back(s);
    r.p_g.push_back(s.p_g());
    r.p_e.push_back(s.p_e());
    r.norm_error.push_back(std::abs(s.norm() - 1.0));
}

inline Mat2 checked_sample(const Hamiltonian2x2& h, double t) {
    Mat2 m = h(t);
    if (!all_finite(m)) {
        throw NumericalError("non-finite Hamiltonian sample at t = " + std::to_string(t) + " ns");
    }
    return m;
}

}  // namespace detail

/**
 * Integrate from psi0 over the grid.
 *
 * Throws ValidationError when psi0 is not normalized, ResolutionError when
 * some step resolves the local eigenvalue splitting of H with fewer than four
 * steps per period, NumericalError on a non-finite Hamiltonian sample.
 */
inline PropagationResult propagate(const Hamiltonian2x2& h, const StateVector& psi0, const TimeGrid& grid,
                                   const PropagationOptions& opts = {}) {
    if (std::abs(psi0.norm() - 1.0) > kNormTolerance) {
        throw ValidationError("propagate: initial state is not normalized");
    }
    const std::size_t every = std::max<std::size_t>(1, opts.record_every);
    const double dt = grid.dt();

    PropagationResult r;
    r.grid = grid;
    r.picture = h.picture;
    const std::size_t n_rec = grid.n_steps() / every + 2;
    r.t.reserve(n_rec);
    r.states.reserve(n_rec);
    r.p_g.reserve(n_rec);
    r.p_e.reserve(n_rec);
    r.norm_error.reserve(n_rec);

    double max_split = 0.0;
    StateVector psi = psi0;
    detail::record(r, grid[0], psi);
    std::array<Mat2, 3> hs;
    hs[0] = detail::checked_sample(h, grid[0]);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double t = grid[k];
        const double t_next = grid[k + 1];
        hs[1] = detail::checked_sample(h, t + 0.5 * dt);
        hs[2] = detail::checked_sample(h, t_next);
        if (opts.check_resolution) {
            max_split = std::max({max_split, eigen_splitting(hs[0]), eigen_splitting(hs[1])});
            const ResolutionCheck rc = check_resolution(max_split, dt);
            if (rc.level == ResolutionLevel::Error) {
                throw ResolutionError("propagate: grid resolves the fastest frequency with "
                                      + std::to_string(rc.steps_per_period) + " steps per period (minimum "
                                      + std::to_string(kResolutionErrorStepsPerPeriod) + ")");
            }
        }
        psi = propagate_step(hs, psi, t_next - t);
        if (k + 1 == grid.n_steps() || (k + 1) % every == 0) detail::record(r, t_next, psi);
        hs[0] = hs[2];
    }
    r.min_steps_per_period = check_resolution(max_split, dt).steps_per_period;
    return r;
}

/// Propagation plus an a posteriori error estimate from step halving.
struct VerifiedPropagation {
    PropagationResult result;  // on the refined grid
    double final_state_error = 0.0;   // ||psi_h - psi_{h/2}|| / 15 at tf (Richardson estimate)
    double per_step_error = 0.0;      // final_state_error / n_steps of the coarse grid
};

inline VerifiedPropagation propagate_verified(const Hamiltonian2x2& h, const StateVector& psi0, const TimeGrid& grid,
                                              const PropagationOptions& opts = {}) {
    PropagationOptions coarse_opts = opts;
    coarse_opts.record_every = grid.n_steps();
    const PropagationResult coarse = propagate(h, psi0, grid, coarse_opts);
    PropagationOptions fine_opts = opts;
    fine_opts.record_every = 2 * std::max<std::size_t>(1, opts.record_every);
    VerifiedPropagation v{propagate(h, psi0, grid.refined(2), fine_opts)};
    const Eigen::Vector2cd diff = coarse.final_state().vec() - v.result.final_state().vec();
    v.final_state_error = diff.norm() / 15.0;
    v.per_step_error = v.final_state_error / static_cast<double>(grid.n_steps());
    return v;
}

/// P_e(t_f).
inline double fidelity_inversion(const PropagationResult& result) { return result.p_e.back(); }

}  // namespace tlspulse
