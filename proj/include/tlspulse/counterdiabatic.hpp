/**
 * @file counterdiabatic.hpp
 * @brief Counterdiabatic driving beyond the RWA.
 *
 * Adds the CD term H1 to the interaction-picture Hamiltonian, reads the new
 * coupling Omega~ and detuning Delta~ off H + H1, recovers a continuous field
 * phase phi~ from Omega~ and the matching transition frequency omega0~, and
 * assembles the Schrodinger-picture Hamiltonian S'' that an experiment would
 * implement. Also provides the Allen-Eberly reference sweep.
 */
#pragma once

#include "tlspulse/core.hpp"
#include "tlspulse/hamiltonians.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace tlspulse {

// ---------------------------------------------------------------------------
// Allen-Eberly reference pulse

enum class Envelope { Sech, SinhLiteral };

inline std::string_view to_string(Envelope e) { return e == Envelope::Sech ? "sech" : "sinh_literal"; }

inline Envelope parse_envelope(std::string_view s) {
    if (s == "sech") return Envelope::Sech;
    if (s == "sinh_literal") return Envelope::SinhLiteral;
    throw ValidationError("unknown envelope '" + std::string(s) + "' (expected sech or sinh_literal)");
}

struct AllenEberlyParams {
    double omega_m = 0.0;      // peak Rabi frequency, rad/ns
    double delta_param = 0.0;  // chirp scale delta, rad/ns
    double t0_param = 0.0;     // sweep time scale, ns
    double tf = 0.0;           // ns
    double omega_l = 0.0;      // carrier, rad/ns
    Envelope envelope = Envelope::Sech;
};

/**
 * Delta(t) = (2 delta^2 t0 / pi) tanh(u), u = pi (t - tf/2) / (2 t0),
 * Omega_R = Omega_M sech(u) (or sinh(u) for SinhLiteral), phi = omega_L t,
 * omega_0 = Delta + omega_L. All derivatives are analytic.
 */
inline PulseSpec allen_eberly_pulse(const AllenEberlyParams& p) {
    const double vals[] = {p.omega_m, p.delta_param, p.t0_param, p.tf, p.omega_l};
    for (double v : vals) {
        if (!std::isfinite(v) || v <= 0.0) throw ValidationError("allen_eberly_pulse: parameters must be positive");
    }
    const double du = kPi / (2.0 * p.t0_param);
    const double mid = 0.5 * p.tf;
    const double amp = 2.0 * p.delta_param * p.delta_param * p.t0_param / kPi;
    const double om = p.omega_m;
    const double wl = p.omega_l;
    auto u = [=](double t) { return du * (t - mid); };

    PulseSpec s;
    auto delta = [=](double t) { return amp * std::tanh(u(t)); };
    auto delta_rate = [=](double t) {
        const double c = std::cosh(u(t));
        return amp * du / (c * c);
    };
    if (p.envelope == Envelope::Sech) {
        s.rabi = [=](double t) { return om / std::cosh(u(t)); };
        s.rabi_rate = [=](double t) { return -om * du * std::tanh(u(t)) / std::cosh(u(t)); };
    } else {
        s.rabi = [=](double t) { return om * std::sinh(u(t)); };
        s.rabi_rate = [=](double t) { return om * du * std::cosh(u(t)); };
    }
    s.phase = [=](double t) { return wl * t; };
    s.phase_rate = [=](double) { return wl; };
    s.phase_accel = [](double) { return 0.0; };
    s.omega0 = [=](double t) { return delta(t) + wl; };
    s.omega0_rate = delta_rate;
    return s;
}

// ---------------------------------------------------------------------------
// CD term

inline constexpr double kCdMinC1 = 1e-18;  // (rad/ns)^2

/// Everything needed for H1 at one instant.
struct CdCoefficients {
    double delta = 0.0;
    double delta_rate = 0.0;
    cplx omega;
    cplx omega_rate;
    cplx a1;         // Omega' Delta - Delta' Omega
    cplx b1;         // Omega'* Omega - Omega' Omega*, purely imaginary
    double c1 = 0.0; // Delta^2 + |Omega|^2

    cplx omega_tilde() const { return omega + kI * a1 / c1; }
    /// Delta + i B1 / (2 C1); real because B1 is imaginary.
    double delta_tilde() const { return delta - b1.imag() / (2.0 * c1); }
};

inline CdCoefficients cd_coefficients(const PulseSpec& pulse, double t) {
    CdCoefficients c;
    c.delta = detuning(pulse, t);
    c.delta_rate = pulse.detuning_rate_at(t);
    c.omega = omega_complex(pulse, t);
    c.omega_rate = omega_complex_rate(pulse, t);
    c.a1 = c.omega_rate * c.delta - c.delta_rate * c.omega;
    // B1 = 2i Im(Omega'* Omega); build it imaginary so round-off cannot leak a real part.
    c.b1 = cplx(0.0, 2.0 * (std::conj(c.omega_rate) * c.omega).imag());
    c.c1 = c.delta * c.delta + std::norm(c.omega);
    if (!(c.c1 >= kCdMinC1)) {
        throw NumericalError("CD undefined at crossing: C1 = " + std::to_string(c.c1) + " at t = "
                             + std::to_string(t) + " ns");
    }
    return c;
}

/// H1 = (i / 2C1) [[-B1/2, A1], [-A1*, B1/2]].
inline Mat2 cd_matrix(const CdCoefficients& c) {
    Mat2 m;
    m << -0.5 * c.b1, c.a1, -std::conj(c.a1), 0.5 * c.b1;
    return (kI / (2.0 * c.c1)) * m;
}

inline void require_picture(const Hamiltonian2x2& h, Picture p, const char* who) {
    if (h.picture != p) {
        throw ValidationError(std::string(who) + ": expected picture " + std::string(to_string(p)) + ", got "
                              + std::string(to_string(h.picture)));
    }
}

/// CD term for the interaction-picture Hamiltonian built from `pulse`.
inline Mat2 cd_term(const Hamiltonian2x2& h, const PulseSpec& pulse, double t) {
    require_picture(h, Picture::I, "cd_term");
    return cd_matrix(cd_coefficients(pulse, t));
}

/// CD quantities sampled on a grid.
struct CdDecomposition {
    std::vector<double> t;
    std::vector<double> delta;
    std::vector<cplx> omega;
    std::vector<cplx> a1;
    std::vector<cplx> b1;
    std::vector<double> c1;
    std::vector<cplx> omega_tilde;
    std::vector<double> delta_tilde;
};

inline CdDecomposition cd_decomposition(const PulseSpec& pulse, const TimeGrid& grid) {
    CdDecomposition d;
    const std::size_t n = grid.size();
    d.t.reserve(n);
    d.delta.reserve(n);
    d.omega.reserve(n);
    d.a1.reserve(n);
    d.b1.reserve(n);
    d.c1.reserve(n);
    d.omega_tilde.reserve(n);
    d.delta_tilde.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid[k];
        const CdCoefficients c = cd_coefficients(pulse, t);
        d.t.push_back(t);
        d.delta.push_back(c.delta);
        d.omega.push_back(c.omega);
        d.a1.push_back(c.a1);
        d.b1.push_back(c.b1);
        d.c1.push_back(c.c1);
        d.omega_tilde.push_back(c.omega_tilde());
        d.delta_tilde.push_back(c.delta_tilde());
    }
    return d;
}

struct TotalHamiltonian {
    Hamiltonian2x2 h;  // picture I'
    CdDecomposition decomposition;
};

/**
 * H + H1 in picture I', i.e. (1/2)[[-Delta~, Omega~], [Omega~*, Delta~]],
 * with its coefficients sampled on `grid`. Throws NumericalError if C1
 * degenerates anywhere on the grid.
 */
inline TotalHamiltonian total_hamiltonian(const Hamiltonian2x2& h, const PulseSpec& pulse, const TimeGrid& grid) {
    require_picture(h, Picture::I, "total_hamiltonian");
    TotalHamiltonian out;
    out.decomposition = cd_decomposition(pulse, grid);
    out.h = {Picture::I_prime, [p = pulse](double t) {
                 const CdCoefficients c = cd_coefficients(p, t);
                 return two_level_matrix(c.delta_tilde(), c.omega_tilde());
             }};
    return out;
}

// ---------------------------------------------------------------------------
// Phase extraction

inline constexpr double kPhaseZeroRatio = 1e-14;

struct PhaseTilde {
    std::vector<double> phase;
    std::vector<long long> branch;
};

/**
 * phi~_k = -arg Omega~_k + 2 pi n_k with n_k chosen so that successive
 * differences lie in (-pi, pi]; the first sample lies in (-pi, pi].
 */
inline PhaseTilde extract_phase_tilde(const std::vector<cplx>& omega_tilde, const TimeGrid& grid) {
    if (omega_tilde.size() != grid.size()) {
        throw ValidationError("extract_phase_tilde: series length does not match the grid");
    }
    double max_abs = 0.0;
    for (const cplx& z : omega_tilde) max_abs = std::max(max_abs, std::abs(z));
    PhaseTilde out;
    out.phase.resize(omega_tilde.size());
    out.branch.resize(omega_tilde.size());
    for (std::size_t k = 0; k < omega_tilde.size(); ++k) {
        if (!(std::abs(omega_tilde[k]) >= kPhaseZeroRatio * max_abs) || max_abs == 0.0) {
            throw NumericalError("phase undefined at zero of Omega~ (t = " + std::to_string(grid[k]) + " ns)");
        }
        const double raw = -std::arg(omega_tilde[k]);  // in [-pi, pi)
        long long n = 0;
        if (k == 0) {
            n = raw <= -kPi ? 1 : 0;
        } else {
            const double d0 = raw - out.phase[k - 1];
            n = static_cast<long long>(std::floor((kPi - d0) / kTwoPi));
        }
        out.branch[k] = n;
        out.phase[k] = raw + kTwoPi * static_cast<double>(n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Repaired physical pulse

inline constexpr double kSingularCos = 1e-6;

/**
 * The physically realizable pulse behind H + H1.
 *
 * Sampled series live on `grid`. `rabi_tilde` is NaN where |cos phi~| falls
 * below kSingularCos; `singular` also marks the sample nearest each sign
 * change of cos phi~, since a grid rarely lands within 1e-6 of a zero. The
 * field 2 Omega~_R cos phi~ equals |Omega~| and is finite everywhere.
 *
 * The continuous evaluators reproduce the sampled series at grid points and
 * are what h_s_doubleprime propagates.
 */
struct RepairedPulse {
    TimeGrid grid{0.0, 1.0, 1};
    std::vector<double> phase_tilde;
    std::vector<long long> branch_indices;
    std::vector<double> rabi_tilde;
    std::vector<bool> singular;
    std::vector<double> omega0_tilde;
    std::vector<double> field;

    RealFn phase_tilde_fn;
    RealFn phase_tilde_rate_fn;
    RealFn omega0_tilde_fn;
    RealFn field_fn;

    std::size_t singular_count() const {
        std::size_t n = 0;
        for (bool s : singular) n += s ? 1 : 0;
        return n;
    }
};

namespace detail {

/// Continuous phi~(t): the branch of -arg Omega~(t) nearest the sampled curve.
struct PhaseTildeEvaluator {
    PulseSpec pulse;
    TimeGrid grid;
    std::shared_ptr<const std::vector<double>> samples;

    double interpolated(double t) const {
        const double x = (t - grid.t0()) / grid.dt();
        const double n = static_cast<double>(grid.n_steps());
        const double xc = std::clamp(x, 0.0, n);
        const std::size_t k = std::min(static_cast<std::size_t>(xc), grid.n_steps() - 1);
        const double w = x - static_cast<double>(k);  // may extrapolate slightly past the ends
        return (1.0 - w) * (*samples)[k] + w * (*samples)[k + 1];
    }

    double operator()(double t) const {
        const double raw = -std::arg(cd_coefficients(pulse, t).omega_tilde());
        const double guess = interpolated(t);
        return raw + kTwoPi * std::round((guess - raw) / kTwoPi);
    }
};

inline constexpr double kPhaseRateStep = 1e-5;  // ns

/// dphi~/dt = -Im(Omega~' / Omega~), with Omega~' by a fourth-order difference.
inline double phase_tilde_rate(const PulseSpec& pulse, double t, double h = kPhaseRateStep) {
    auto w = [&](double s) { return cd_coefficients(pulse, s).omega_tilde(); };
    const cplx d = (-w(t + 2.0 * h) + 8.0 * w(t + h) - 8.0 * w(t - h) + w(t - 2.0 * h)) / (12.0 * h);
    return -(d / w(t)).imag();
}

}  // namespace detail

/**
 * Turns the CD decomposition into a physical pulse: continuous phi~, signed
 * Omega~_R = |Omega~| / (2 cos phi~), omega0~ = Delta~ + dphi~/dt and the
 * field |Omega~|.
 */
inline RepairedPulse repair_consistency(const CdDecomposition& decomp, const PulseSpec& pulse, const TimeGrid& grid) {
    if (decomp.omega_tilde.size() != grid.size()) {
        throw ValidationError("repair_consistency: decomposition does not match the grid");
    }
    RepairedPulse r;
    r.grid = grid;
    PhaseTilde pt = extract_phase_tilde(decomp.omega_tilde, grid);
    r.phase_tilde = std::move(pt.phase);
    r.branch_indices = std::move(pt.branch);

    const std::size_t n = grid.size();
    r.rabi_tilde.resize(n);
    r.singular.assign(n, false);
    r.field.resize(n);
    std::vector<double> cosines(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double mag = std::abs(decomp.omega_tilde[k]);
        const double c = std::cos(r.phase_tilde[k]);
        cosines[k] = c;
        r.field[k] = mag;
        if (std::abs(c) < kSingularCos) {
            r.singular[k] = true;
            r.rabi_tilde[k] = std::numeric_limits<double>::quiet_NaN();
        } else {
            r.rabi_tilde[k] = mag / (2.0 * c);
        }
    }
    for (std::size_t k = 1; k < n; ++k) {
        if ((cosines[k - 1] < 0.0) != (cosines[k] < 0.0)) {
            r.singular[std::abs(cosines[k - 1]) < std::abs(cosines[k]) ? k - 1 : k] = true;
        }
    }

    auto samples = std::make_shared<const std::vector<double>>(r.phase_tilde);
    r.phase_tilde_fn = detail::PhaseTildeEvaluator{pulse, grid, samples};
    r.phase_tilde_rate_fn = [pulse](double t) { return detail::phase_tilde_rate(pulse, t); };
    r.omega0_tilde_fn = [pulse](double t) {
        return cd_coefficients(pulse, t).delta_tilde() + detail::phase_tilde_rate(pulse, t);
    };
    r.field_fn = [pulse](double t) { return std::abs(cd_coefficients(pulse, t).omega_tilde()); };

    // Sampled omega0~ uses the same stencil family on the unwrapped samples.
    const std::vector<double> rate = differentiate_samples(r.phase_tilde, grid.dt());
    r.omega0_tilde.resize(n);
    for (std::size_t k = 0; k < n; ++k) r.omega0_tilde[k] = decomp.delta_tilde[k] + rate[k];
    return r;
}

/// (1/2)[[-omega0~, 2 Omega~_R cos phi~], [2 Omega~_R cos phi~, omega0~]] with the field in place of the product.
inline Hamiltonian2x2 h_s_doubleprime(const RepairedPulse& repaired) {
    return {Picture::S_doubleprime, [w0 = repaired.omega0_tilde_fn, f = repaired.field_fn](double t) {
                const double omega0 = w0(t);
                const double field = f(t);
                Mat2 h;
                h << cplx(-0.5 * omega0, 0.0), cplx(0.5 * field, 0.0), cplx(0.5 * field, 0.0),
                    cplx(0.5 * omega0, 0.0);
                return h;
            }};
}

}  // namespace tlspulse
