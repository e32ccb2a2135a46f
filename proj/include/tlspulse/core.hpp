/**
 * @file core.hpp
 * @brief Shared domain types: time grids, pulses, states and 2x2 Hamiltonians.
 *
 * Unit convention throughout the library: time in ns, angular frequencies in
 * rad/ns, hbar = 1. A frequency quoted as "2pi x 1 GHz" is 2pi rad/ns.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tlspulse {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using RealFn = std::function<double(double)>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Error hierarchy. ValidationError maps to CLI exit code 2, NumericalError to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// Grid too coarse for the fastest frequency it has to resolve.
class ResolutionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// ---------------------------------------------------------------------------
// Time grid

class TimeGrid {
public:
    TimeGrid(double t0, double tf, std::size_t n_steps)
        : t0_(t0), tf_(tf), n_steps_(n_steps) {
        if (!std::isfinite(t0) || !std::isfinite(tf)) {
            throw ValidationError("time grid: non-finite endpoint");
        }
        if (!(tf > t0)) {
            throw ValidationError("time grid: tf must be greater than t0");
        }
        if (n_steps < 1) {
            throw ValidationError("time grid: n_steps must be at least 1");
        }
        dt_ = (tf - t0) / static_cast<double>(n_steps);
    }

    double t0() const { return t0_; }
    double tf() const { return tf_; }
    double dt() const { return dt_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t size() const { return n_steps_ + 1; }

    /// Sample k; the last sample is exactly tf.
    double operator[](std::size_t k) const {
        return k >= n_steps_ ? tf_ : t0_ + static_cast<double>(k) * dt_;
    }

    std::vector<double> samples() const {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)[k];
        return out;
    }

    /// Same interval, n_steps multiplied by `factor`.
    TimeGrid refined(std::size_t factor) const { return TimeGrid(t0_, tf_, n_steps_ * factor); }

private:
    double t0_;
    double tf_;
    std::size_t n_steps_;
    double dt_ = 0.0;
};

inline TimeGrid make_uniform_grid(double t0, double tf, long long n_steps) {
    if (n_steps < 1) throw ValidationError("time grid: n_steps must be at least 1");
    return TimeGrid(t0, tf, static_cast<std::size_t>(n_steps));
}

// ---------------------------------------------------------------------------
// Resolution rule: >= 20 steps per period of the fastest frequency is fine,
// 4..20 is a warning, below 4 is an error.

inline constexpr double kResolutionWarnStepsPerPeriod = 20.0;
inline constexpr double kResolutionErrorStepsPerPeriod = 4.0;

enum class ResolutionLevel { Ok, Warning, Error };

struct ResolutionCheck {
    double max_frequency = 0.0;     // rad/ns
    double steps_per_period = 0.0;  // +inf when max_frequency == 0
    ResolutionLevel level = ResolutionLevel::Ok;
};

inline ResolutionCheck check_resolution(double max_frequency, double dt) {
    ResolutionCheck out;
    out.max_frequency = std::abs(max_frequency);
    if (out.max_frequency == 0.0) {
        out.steps_per_period = std::numeric_limits<double>::infinity();
        return out;
    }
    out.steps_per_period = kTwoPi / (out.max_frequency * dt);
    if (out.steps_per_period < kResolutionErrorStepsPerPeriod) {
        out.level = ResolutionLevel::Error;
    } else if (out.steps_per_period < kResolutionWarnStepsPerPeriod) {
        out.level = ResolutionLevel::Warning;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite differences

/// Fourth-order central difference.
inline double central_derivative(const RealFn& f, double t, double h) {
    return (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h);
}

/// Fourth-order second derivative.
inline double central_second_derivative(const RealFn& f, double t, double h) {
    return (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h))
           / (12.0 * h * h);
}

/**
 * Fourth-order derivative of a uniformly sampled series. Interior points use
 * the five-point central stencil, the two samples at each end use one-sided
 * five-point stencils. Needs at least five samples.
 */
inline std::vector<double> differentiate_samples(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    if (n < 5) throw ValidationError("differentiate_samples: need at least 5 samples");
    std::vector<double> d(n);
    const double inv = 1.0 / (12.0 * h);
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) * inv;
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) * inv;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        d[k] = (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]) * inv;
    }
    d[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] - y[n - 5]) * inv;
    d[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) * inv;
    return d;
}

// ---------------------------------------------------------------------------
// Pulse

/**
 * The physical control: Rabi envelope, field phase and its rate, and the atomic
 * transition frequency, all as closed-form functions of time.
 *
 * The optional analytic derivatives are used by the counterdiabatic
 * construction. When absent, fourth-order central differences with step
 * `fd_step` stand in.
 */
struct PulseSpec {
    RealFn rabi;        // Omega_R(t), rad/ns, real
    RealFn phase;       // phi(t), rad
    RealFn phase_rate;  // dphi/dt, rad/ns
    RealFn omega0;      // omega_0(t), rad/ns

    RealFn rabi_rate;    // optional dOmega_R/dt
    RealFn phase_accel;  // optional d^2phi/dt^2
    RealFn omega0_rate;  // optional domega_0/dt

    double fd_step = 1e-4;  // ns

    double rabi_rate_at(double t) const {
        return rabi_rate ? rabi_rate(t) : central_derivative(rabi, t, fd_step);
    }
    double phase_accel_at(double t) const {
        return phase_accel ? phase_accel(t) : central_derivative(phase_rate, t, fd_step);
    }
    double omega0_rate_at(double t) const {
        return omega0_rate ? omega0_rate(t) : central_derivative(omega0, t, fd_step);
    }
    double detuning_at(double t) const { return omega0(t) - phase_rate(t); }
    double detuning_rate_at(double t) const { return omega0_rate_at(t) - phase_accel_at(t); }

    bool complete() const { return rabi && phase && phase_rate && omega0; }
};

/**
 * Largest relative mismatch between phase_rate and a central difference of
 * phase over the grid, normalized by max |phase_rate|.
 */
inline double phase_rate_mismatch(const PulseSpec& pulse, const TimeGrid& grid, double h) {
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        const double fd = (pulse.phase(t + h) - pulse.phase(t - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - pulse.phase_rate(t)));
        scale = std::max(scale, std::abs(pulse.phase_rate(t)));
    }
    return scale > 0.0 ? worst / scale : worst;
}

// ---------------------------------------------------------------------------
// State

struct StateVector {
    cplx cg{1.0, 0.0};
    cplx ce{0.0, 0.0};

    static StateVector ground() { return {cplx{1.0, 0.0}, cplx{0.0, 0.0}}; }
    static StateVector excited() { return {cplx{0.0, 0.0}, cplx{1.0, 0.0}}; }
    static StateVector from(const Eigen::Vector2cd& v) { return {v(0), v(1)}; }

    Eigen::Vector2cd vec() const { return Eigen::Vector2cd(cg, ce); }
    double p_g() const { return std::norm(cg); }
    double p_e() const { return std::norm(ce); }
    double norm() const { return std::sqrt(p_g() + p_e()); }
};

/// <a|b>
inline cplx inner(const StateVector& a, const StateVector& b) {
    return std::conj(a.cg) * b.cg + std::conj(a.ce) * b.ce;
}

// ---------------------------------------------------------------------------
// Hamiltonians

enum class Picture { S, I, I_prime, S_doubleprime, RWA };

inline std::string_view to_string(Picture p) {
    switch (p) {
        case Picture::S: return "S";
        case Picture::I: return "I";
        case Picture::I_prime: return "I'";
        case Picture::S_doubleprime: return "S''";
        case Picture::RWA: return "RWA";
    }
    return "?";
}

/// Basis ordering is (|g>, |e>).
struct Hamiltonian2x2 {
    Picture picture = Picture::I;
    std::function<Mat2(double)> element_fn;

    Mat2 operator()(double t) const { return element_fn(t); }
};

inline bool is_hermitian(const Mat2& h, double rel_tol = 1e-12) {
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double tol = rel_tol * scale;
    return std::abs(h(0, 0).imag()) <= tol && std::abs(h(1, 1).imag()) <= tol
           && std::abs(h(0, 1) - std::conj(h(1, 0))) <= tol;
}

/// Difference of the two eigenvalues of a Hermitian 2x2 matrix.
inline double eigen_splitting(const Mat2& h) {
    const double half_diff = 0.5 * (h(1, 1).real() - h(0, 0).real());
    return 2.0 * std::sqrt(half_diff * half_diff + std::norm(h(0, 1)));
}

inline bool all_finite(const Mat2& h) {
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (!std::isfinite(h(i, j).real()) || !std::isfinite(h(i, j).imag())) return false;
        }
    }
    return true;
}

}  // namespace tlspulse
