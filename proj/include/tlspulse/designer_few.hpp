/**
 * @file designer_few.hpp
 * @brief Few-oscillation inversion pulses from polynomial invariant angles.
 *
 * With the field phase fixed to phi = omega_L t, theta(t) is a polynomial that
 * climbs from 0 to pi and whose slope vanishes at every zero of cos(phi), and
 * alpha(t) is a polynomial equal to pi/2 with zero slope wherever sin(theta)
 * vanishes. The inverse formulas then give a finite Rabi frequency and a
 * transition frequency omega_0(t).
 */
#pragma once

#include "tlspulse/core.hpp"
#include "tlspulse/hamiltonians.hpp"
#include "tlspulse/invariants.hpp"
#include "tlspulse/polynomial.hpp"
#include "tlspulse/propagator.hpp"

#include <json.hpp>

#include <cmath>
#include <utility>
#include <vector>

namespace tlspulse {

/// All t in the open interval (0, tf) with cos(omega_l t) = 0.
inline std::vector<double> cos_phase_zeros(double omega_l, double tf) {
    if (!(omega_l > 0.0) || !(tf > 0.0)) throw ValidationError("cos_phase_zeros: omega_l and tf must be positive");
    std::vector<double> out;
    const double tol = 1e-12 * tf;
    for (long long k = 0;; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * kPi / omega_l;
        if (t >= tf - tol) break;
        out.push_back(t);
    }
    return out;
}

/// Default shaping values (time ns, theta rad) for the 5 ns, 0.5 GHz design.
inline std::vector<std::pair<double, double>> default_theta_shaping() {
    return {{1.0, 2.0}, {1.6, 2.4}, {2.5, 2.8}, {4.0, 2.8}, {4.5, 3.0}};
}

/**
 * theta(0) = 0, theta(tf) = pi, theta'(0) = theta'(tf) = 0, theta'(z) = 0 at
 * each zero, plus the shaping values. The total must equal degree + 1.
 */
inline ConstraintSet build_theta_constraints(double tf, const std::vector<double>& zeros,
                                             const std::vector<std::pair<double, double>>& shaping, int degree = 13) {
    ConstraintSet cs(tf);
    cs.value(0.0, 0.0).value(tf, kPi).derivative(0.0, 0.0).derivative(tf, 0.0);
    for (double z : zeros) cs.derivative(z, 0.0);
    for (const auto& [t, v] : shaping) {
        if (!(v > 0.0 && v < kPi)) {
            throw ValidationError("theta shaping value " + std::to_string(v) + " outside (0, pi)");
        }
        cs.value(t, v);
    }
    if (cs.size() != static_cast<std::size_t>(degree) + 1) {
        throw ValidationError("theta constraints: " + std::to_string(cs.size()) + " constraints for degree "
                              + std::to_string(degree));
    }
    return cs;
}

/**
 * Times in [0, tf] where sin(theta) vanishes to within `tol`: endpoints are
 * tested directly, interior zeros are located by a sign scan of sin(theta)
 * followed by bisection.
 */
inline std::vector<double> sin_theta_zeros(const PolynomialAnsatz& theta, double tol = 1e-9,
                                           std::size_t n_scan = 20000) {
    const double tf = theta.tf();
    auto st = [&](double t) { return std::sin(theta(t)); };
    std::vector<double> out;
    if (std::abs(st(0.0)) < tol) out.push_back(0.0);
    const double h = tf / static_cast<double>(n_scan);
    for (std::size_t k = 0; k < n_scan; ++k) {
        double a = static_cast<double>(k) * h;
        double b = k + 1 == n_scan ? tf : a + h;
        double fa = st(a);
        const double fb = st(b);
        if (k == 0 && std::abs(fa) < tol) continue;
        if (k + 1 == n_scan && std::abs(fb) < tol) break;
        if (fa * fb < 0.0) {
            for (int it = 0; it < 200 && b - a > 1e-15 * tf; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = st(m);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            out.push_back(0.5 * (a + b));
        }
    }
    if (std::abs(st(tf)) < tol) out.push_back(tf);
    return out;
}

/// alpha = pi/2 and alpha' = 0 at each singularity, alpha(tf/2) = midpoint.
inline ConstraintSet build_alpha_constraints(double tf, const std::vector<double>& singularities, double midpoint,
                                             int degree = 4) {
    ConstraintSet cs(tf);
    for (double s : singularities) cs.value(s, 0.5 * kPi).derivative(s, 0.0);
    cs.value(0.5 * tf, midpoint);
    if (cs.size() != static_cast<std::size_t>(degree) + 1) {
        throw ValidationError("alpha constraints: " + std::to_string(cs.size()) + " constraints for degree "
                              + std::to_string(degree));
    }
    return cs;
}

struct FewOscillationInputs {
    double omega_l = kTwoPi * 0.5;  // rad/ns
    double tf = 5.0;                // ns
    std::vector<std::pair<double, double>> shaping = default_theta_shaping();
    double alpha_mid = 2.0;
    int theta_degree = 13;
    int alpha_degree = 4;
    double steps_per_period = 200.0;  // verification propagation
};

struct FewOscillationDiagnostics {
    double theta_condition = 0.0;
    double alpha_condition = 0.0;
    double theta_max_residual = 0.0;
    double alpha_max_residual = 0.0;
    double max_cancellation = 0.0;  // max |theta'(z)| over zeros of cos(phi)
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    double rabi_max = 0.0;
    double omega0_min = 0.0;
    double omega0_max = 0.0;
    double omega0_start = 0.0;
    double omega0_end = 0.0;
    bool omega0_changes_sign = false;
    double max_frequency = 0.0;  // rad/ns, sets the verification grid
    std::size_t verification_steps = 0;
    double final_excited_population = 0.0;
    double max_norm_error = 0.0;
};

struct FewOscillationDesign {
    FewOscillationInputs inputs;
    std::vector<double> cos_zeros;
    std::vector<double> sin_theta_zeros;
    ConstraintSet theta_constraints;
    ConstraintSet alpha_constraints;
    PolynomialSolution theta;
    PolynomialSolution alpha;
    SmoothFn phase;
    InverseExact inverse;
    PulseSpec pulse;
    AngleTrajectory designed;  // theta, beta = alpha + phi on the verification grid
    PropagationResult verification;
    FewOscillationDiagnostics diagnostics;
};

inline SmoothFn linear_phase(double omega_l) {
    return {[omega_l](double t) { return omega_l * t; }, [omega_l](double) { return omega_l; },
            [](double) { return 0.0; }};
}

inline SmoothFn smooth_fn(const PolynomialAnsatz& p) { return {p.fn(0), p.fn(1), p.fn(2)}; }

/// Full pipeline: constraints, polynomial solves, inverse formulas, verification propagation.
inline FewOscillationDesign design_few_oscillation(const FewOscillationInputs& in) {
    if (!(in.omega_l > 0.0) || !(in.tf > 0.0) || !(in.steps_per_period >= 4.0)) {
        throw ValidationError("design_few_oscillation: omega_l, tf must be positive and steps_per_period >= 4");
    }
    const std::vector<double> zeros = cos_phase_zeros(in.omega_l, in.tf);
    ConstraintSet theta_cs = build_theta_constraints(in.tf, zeros, in.shaping, in.theta_degree);
    PolynomialSolution theta = solve_polynomial(theta_cs, in.theta_degree);
    const std::vector<double> sings = sin_theta_zeros(theta.ansatz);
    ConstraintSet alpha_cs = build_alpha_constraints(in.tf, sings, in.alpha_mid, in.alpha_degree);
    PolynomialSolution alpha = solve_polynomial(alpha_cs, in.alpha_degree);

    const SmoothFn phase = linear_phase(in.omega_l);
    const SmoothFn th = smooth_fn(theta.ansatz);
    const SmoothFn al = smooth_fn(alpha.ansatz);

    // Scan grid for the frequency bound, then the verification grid.
    const TimeGrid scan(0.0, in.tf, 20000);
    InverseExact coarse = inverse_exact(th, al, phase, scan);
    const PulseSpec coarse_pulse = coarse.pulse(phase);
    double fmax = 0.0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
        const double t = scan[k];
        const double eps = eigen_splitting(h_interaction(coarse_pulse)(t));
        fmax = std::max({fmax, std::abs(phase.df(t)), std::abs(coarse.omega0_samples[k]),
                         std::abs(coarse.rabi_samples[k]), eps});
    }
    const auto steps = static_cast<std::size_t>(std::ceil(in.steps_per_period * fmax * in.tf / kTwoPi));
    const TimeGrid grid(0.0, in.tf, std::max<std::size_t>(steps, 100));

    FewOscillationDesign d{in,
                           zeros,
                           sings,
                           std::move(theta_cs),
                           std::move(alpha_cs),
                           std::move(theta),
                           std::move(alpha),
                           phase,
                           inverse_exact(th, al, phase, grid),
                           {},
                           {},
                           {},
                           {}};
    d.pulse = d.inverse.pulse(phase);

    d.designed.grid = grid;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        d.designed.t.push_back(t);
        d.designed.theta.push_back(th.f(t));
        d.designed.alpha.push_back(al.f(t));
        d.designed.beta.push_back(al.f(t) + phase.f(t));
    }

    PropagationOptions po;
    po.record_every = std::max<std::size_t>(1, grid.n_steps() / 2000);
    d.verification = propagate(h_interaction(d.pulse), StateVector::ground(), grid, po);

    FewOscillationDiagnostics& g = d.diagnostics;
    g.theta_condition = d.theta.condition_number;
    g.alpha_condition = d.alpha.condition_number;
    g.theta_max_residual = d.theta.max_residual;
    g.alpha_max_residual = d.alpha.max_residual;
    for (double z : zeros) g.max_cancellation = std::max(g.max_cancellation, std::abs(th.df(z)));
    g.alpha_min = *std::min_element(d.designed.alpha.begin(), d.designed.alpha.end());
    g.alpha_max = *std::max_element(d.designed.alpha.begin(), d.designed.alpha.end());
    g.omega0_min = std::numeric_limits<double>::infinity();
    g.omega0_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        g.rabi_max = std::max(g.rabi_max, std::abs(d.inverse.rabi_samples[k]));
        g.omega0_min = std::min(g.omega0_min, d.inverse.omega0_samples[k]);
        g.omega0_max = std::max(g.omega0_max, d.inverse.omega0_samples[k]);
    }
    g.omega0_start = d.inverse.omega0_samples.front();
    g.omega0_end = d.inverse.omega0_samples.back();
    g.omega0_changes_sign = g.omega0_min < 0.0 && g.omega0_max > 0.0;
    g.max_frequency = fmax;
    g.verification_steps = grid.n_steps();
    g.final_excited_population = fidelity_inversion(d.verification);
    g.max_norm_error = d.verification.max_norm_error();
    return d;
}

/// Design document: inputs, coefficients in both bases, constraints, diagnostics.
inline nlohmann::json design_to_json(const FewOscillationDesign& d) {
    using nlohmann::json;
    auto constraints = [](const ConstraintSet& cs, const std::vector<double>& residuals) {
        json arr = json::array();
        for (std::size_t i = 0; i < cs.items().size(); ++i) {
            const Constraint& c = cs.items()[i];
            arr.push_back({{"kind", std::string(to_string(c.kind))},
                           {"t_ns", c.time},
                           {"target", c.target},
                           {"residual", residuals[i]}});
        }
        return arr;
    };
    json shaping = json::array();
    for (const auto& [t, v] : d.inputs.shaping) shaping.push_back({t, v});
    const FewOscillationDiagnostics& g = d.diagnostics;
    return {
        {"inputs",
         {{"omega_l_rad_per_ns", d.inputs.omega_l},
          {"tf_ns", d.inputs.tf},
          {"alpha_mid_rad", d.inputs.alpha_mid},
          {"theta_shaping", shaping}}},
        {"cos_phase_zeros_ns", d.cos_zeros},
        {"sin_theta_zeros_ns", d.sin_theta_zeros},
        {"theta",
         {{"degree", d.theta.ansatz.degree()},
          {"coefficients_scaled", d.theta.ansatz.scaled_coefficients()},
          {"coefficients_raw", d.theta.ansatz.raw_coefficients()},
          {"condition_number", d.theta.condition_number},
          {"constraints", constraints(d.theta_constraints, d.theta.residuals)}}},
        {"alpha",
         {{"degree", d.alpha.ansatz.degree()},
          {"coefficients_scaled", d.alpha.ansatz.scaled_coefficients()},
          {"coefficients_raw", d.alpha.ansatz.raw_coefficients()},
          {"condition_number", d.alpha.condition_number},
          {"constraints", constraints(d.alpha_constraints, d.alpha.residuals)}}},
        {"diagnostics",
         {{"max_cancellation_rad_per_ns", g.max_cancellation},
          {"alpha_min_rad", g.alpha_min},
          {"alpha_max_rad", g.alpha_max},
          {"rabi_max_rad_per_ns", g.rabi_max},
          {"omega0_min_rad_per_ns", g.omega0_min},
          {"omega0_max_rad_per_ns", g.omega0_max},
          {"omega0_start_rad_per_ns", g.omega0_start},
          {"omega0_end_rad_per_ns", g.omega0_end},
          {"omega0_changes_sign", g.omega0_changes_sign},
          {"max_frequency_rad_per_ns", g.max_frequency},
          {"verification_steps", g.verification_steps},
          {"final_excited_population", g.final_excited_population},
          {"max_norm_error", g.max_norm_error}}},
    };
}

}  // namespace tlspulse
