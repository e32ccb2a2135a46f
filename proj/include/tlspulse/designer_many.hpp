/**
 * @file designer_many.hpp
 * @brief Linear-chirp / Gaussian-envelope inversion pulses and a simplex
 *        search over (a, Omega_0) for exact-dynamics inversion.
 */
#pragma once

#include "tlspulse/hamiltonians.hpp"
#include "tlspulse/invariants.hpp"
#include "tlspulse/nelder_mead.hpp"
#include "tlspulse/propagator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace tlspulse {

struct ChirpGaussParams {
    double a = 0.0;             // detuning slope, rad/ns^2
    double omega_0_rabi = 0.0;  // peak Rabi frequency, rad/ns
    double big_a = 1.0;         // Gaussian width parameter, rad^2/ns^2
    double tf = 1.0;            // ns
    double omega_atom = 0.0;    // constant transition frequency, rad/ns
};

inline void validate(const ChirpGaussParams& p) {
    for (double v : {p.a, p.omega_0_rabi, p.big_a, p.tf, p.omega_atom}) {
        if (!std::isfinite(v)) throw ValidationError("chirp/gauss pulse: non-finite parameter");
    }
    if (p.big_a <= 0.0) throw ValidationError("chirp/gauss pulse: width parameter A must be positive");
    if (p.tf <= 0.0) throw ValidationError("chirp/gauss pulse: tf must be positive");
}

/// Delta = a (t - tf/2), Omega_R = Omega_0 exp(-A (t - tf/2)^2), phi(0) = pi/2.
inline PulseSpec chirp_gauss_pulse(const ChirpGaussParams& prm) {
    validate(prm);
    const double a = prm.a, w0 = prm.omega_atom, om = prm.omega_0_rabi, A = prm.big_a, tc = 0.5 * prm.tf;
    PulseSpec p;
    p.rabi = [=](double t) { return om * std::exp(-A * (t - tc) * (t - tc)); };
    p.rabi_rate = [=](double t) { return -2.0 * A * (t - tc) * om * std::exp(-A * (t - tc) * (t - tc)); };
    p.phase = [=](double t) { return -0.5 * a * t * t + (w0 + a * tc) * t + 0.5 * kPi; };
    p.phase_rate = [=](double t) { return w0 - a * (t - tc); };
    p.phase_accel = [=](double) { return -a; };
    p.omega0 = [=](double) { return w0; };
    p.omega0_rate = [](double) { return 0.0; };
    return p;
}

/// Fastest frequency the grid has to resolve: max(omega_0 + |a| tf / 2, |Omega_0|).
inline double chirp_gauss_max_frequency(const ChirpGaussParams& p) {
    return std::max(std::abs(p.omega_atom) + 0.5 * std::abs(p.a) * p.tf, std::abs(p.omega_0_rabi));
}

inline constexpr std::size_t kDefaultManySteps = 400000;

inline TimeGrid chirp_gauss_grid(const ChirpGaussParams& p, std::size_t n_steps = kDefaultManySteps) {
    return TimeGrid(0.0, p.tf, n_steps);
}

/// Objective for a given final angle: (theta_f - pi)^2.
inline double objective_from_theta(double theta_f) { return (theta_f - kPi) * (theta_f - kPi); }

/// theta = 2 arcsin(sqrt(P_e)), with P_e clamped to [0, 1].
inline double theta_from_population(double p_e) { return 2.0 * std::asin(std::sqrt(std::clamp(p_e, 0.0, 1.0))); }

struct InversionEvaluation {
    double p_e = 0.0;
    double theta_f = 0.0;
    double objective = 0.0;
    double norm_error = 0.0;
};

inline Hamiltonian2x2 model_hamiltonian(const PulseSpec& p, AngleModel model) {
    return model == AngleModel::Exact ? h_interaction(p) : h_rwa(p);
}

/// Propagates |g> under the chosen model and scores the final population.
inline InversionEvaluation evaluate_inversion(const ChirpGaussParams& prm, const TimeGrid& grid,
                                              AngleModel model = AngleModel::Exact) {
    const PulseSpec p = chirp_gauss_pulse(prm);
    const ResolutionCheck rc = check_resolution(chirp_gauss_max_frequency(prm), grid.dt());
    if (rc.level == ResolutionLevel::Error) {
        throw ResolutionError("inversion objective: " + std::to_string(rc.steps_per_period)
                              + " steps per period, need at least 4");
    }
    PropagationOptions opts;
    opts.record_every = grid.n_steps();
    const PropagationResult r = propagate(model_hamiltonian(p, model), StateVector::ground(), grid, opts);
    InversionEvaluation e;
    e.p_e = r.p_e.back();
    e.theta_f = theta_from_population(e.p_e);
    e.objective = objective_from_theta(e.theta_f);
    e.norm_error = r.max_norm_error();
    return e;
}

inline double inversion_objective(const ChirpGaussParams& prm, const TimeGrid& grid,
                                  AngleModel model = AngleModel::Exact) {
    return evaluate_inversion(prm, grid, model).objective;
}

inline constexpr double kObjectivePoleEpsilon = 1e-10;

/**
 * Same objective through the auxiliary angle equations, starting from
 * theta(0) = eps, beta(0) = 0. The final angle is folded into [0, pi] via
 * arccos(cos theta), which leaves sin^2(theta/2) unchanged.
 */
inline double objective_from_angles(const ChirpGaussParams& prm, const TimeGrid& grid,
                                    AngleModel model = AngleModel::Exact, double eps = kObjectivePoleEpsilon) {
    AngleOdeOptions o;
    o.pole_epsilon = eps;
    const PulseSpec p = chirp_gauss_pulse(prm);
    const AngleTrajectory tr = model == AngleModel::Exact ? auxiliary_odes_exact(p, 0.0, 0.0, grid, o)
                                                          : auxiliary_odes_rwa(p, 0.0, 0.0, grid, o);
    return objective_from_theta(std::acos(std::cos(tr.theta.back())));
}

struct TraceEntry {
    std::size_t evaluation = 0;  // 1-based
    double a = 0.0;
    double omega_0_rabi = 0.0;
    double objective = 0.0;
    double best_objective = 0.0;
};

struct OptimizationTrace {
    std::vector<TraceEntry> iterations;
    TraceEntry best;
    std::size_t evaluations = 0;
    bool converged = false;
};

inline OptimizationTrace to_optimization_trace(const SimplexTrace<2>& st) {
    OptimizationTrace out;
    for (std::size_t k = 0; k < st.evaluations.size(); ++k) {
        const auto& e = st.evaluations[k];
        out.iterations.push_back({k + 1, e.x[0], e.x[1], e.value, e.best_so_far});
        if (e.value == st.best_value && out.best.evaluation == 0) out.best = out.iterations.back();
    }
    out.evaluations = st.evaluations.size();
    out.converged = st.converged;
    return out;
}

/// CSV columns: evaluation, a/(2pi)^2 in GHz^2, Omega_0/(2pi) in GHz, objective, best-so-far.
inline void write_trace_csv(const OptimizationTrace& tr, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "evaluation,a_over_2pi_sq_GHz2,omega_0_over_2pi_GHz,objective,best_objective\n";
    char buf[160];
    for (const TraceEntry& e : tr.iterations) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", e.evaluation, e.a / (kTwoPi * kTwoPi),
                      e.omega_0_rabi / kTwoPi, e.objective, e.best_objective);
        f << buf;
    }
}

struct OptimizeOptions {
    double target = 1e-3;
    AngleModel model = AngleModel::Exact;
    double relative_step = 0.05;
    double spread_tolerance = 1e-10;
    std::optional<std::filesystem::path> checkpoint_csv;  // rewritten every 10 evaluations
};

struct OptimizationResult {
    ChirpGaussParams best;
    OptimizationTrace trace;
};

/**
 * Simplex search over (a, Omega_0) with A, tf and omega_0 held at the seed's
 * values. Evaluations that fail numerically score +inf; validation errors
 * propagate.
 */
inline OptimizationResult optimize_inversion(const ChirpGaussParams& seed, const TimeGrid& grid,
                                             std::size_t budget = 200, const OptimizeOptions& opt = {}) {
    validate(seed);
    if (budget < 1) throw ValidationError("optimize_inversion: budget must be at least 1");
    auto objective = [&](const std::array<double, 2>& x) {
        ChirpGaussParams p = seed;
        p.a = x[0];
        p.omega_0_rabi = x[1];
        try {
            return inversion_objective(p, grid, opt.model);
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    NelderMeadOptions<2> nm;
    nm.budget = budget;
    nm.relative_step = opt.relative_step;
    nm.spread_tolerance = opt.spread_tolerance;
    nm.target = opt.target;
    if (opt.checkpoint_csv) {
        nm.checkpoint_every = 10;
        nm.checkpoint = [path = *opt.checkpoint_csv](const SimplexTrace<2>& st) {
            write_trace_csv(to_optimization_trace(st), path);
        };
    }
    const SimplexTrace<2> st = nelder_mead(objective, std::array<double, 2>{seed.a, seed.omega_0_rabi}, nm);
    OptimizationResult out;
    out.best = seed;
    out.best.a = st.best_x[0];
    out.best.omega_0_rabi = st.best_x[1];
    out.trace = to_optimization_trace(st);
    if (opt.checkpoint_csv) write_trace_csv(out.trace, *opt.checkpoint_csv);
    return out;
}

/// Reference parameter sets: a non-inverting seed and a known inverting point sharing A, tf, omega_0.
inline ChirpGaussParams many_oscillation_seed() {
    ChirpGaussParams p;
    p.a = kTwoPi * kTwoPi * 254.648e-6;
    p.omega_0_rabi = kTwoPi * 2.0;
    p.big_a = kTwoPi * kTwoPi * 506.606e-6;
    p.tf = 100.0;
    p.omega_atom = kTwoPi * 5.0;
    return p;
}

inline ChirpGaussParams many_oscillation_reference_optimum() {
    ChirpGaussParams p = many_oscillation_seed();
    p.a = kTwoPi * kTwoPi * 272.824e-6;
    p.omega_0_rabi = kTwoPi * 2.202;
    return p;
}

}  // namespace tlspulse
