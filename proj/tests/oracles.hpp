// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library's closed forms.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

/// Resonant/off-resonant constant-drive excited population from |g>.
inline double rabi_pe(double omega_r, double delta, double t) {
    const double w2 = omega_r * omega_r + delta * delta;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(0.5 * std::sqrt(w2) * t);
    return omega_r * omega_r / w2 * s * s;
}

/// Fourth-order central difference of a matrix-valued function.
inline Mat2 matrix_derivative(const std::function<Mat2(double)>& h, double t, double step) {
    return (-h(t + 2 * step) + 8.0 * h(t + step) - 8.0 * h(t - step) + h(t - 2 * step)) / (12.0 * step);
}

/// i sum_{m != n} |m><m| dH |n><n| / (E_n - E_m) from a numerical eigensolver.
inline Mat2 spectral_cd_term(const Mat2& h, const Mat2& dh) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(h);
    const auto& e = es.eigenvalues();
    const Mat2& v = es.eigenvectors();
    Mat2 out = Mat2::Zero();
    for (int m = 0; m < 2; ++m) {
        for (int n = 0; n < 2; ++n) {
            if (m == n) continue;
            const cplx me = v.col(m).dot(dh * v.col(n));  // <m|dH|n>
            out += cplx(0.0, 1.0) * me / (e(n) - e(m)) * v.col(m) * v.col(n).adjoint();
        }
    }
    return out;
}

/// Allen-Eberly sweep written out directly (sech envelope, phi = wl t).
struct AllenEberly {
    double om, delta, t0, tf, wl;
    double u(double t) const { return std::numbers::pi * (t - tf / 2) / (2 * t0); }
    double det(double t) const { return 2 * delta * delta * t0 / std::numbers::pi * std::tanh(u(t)); }
    double rabi(double t) const { return om / std::cosh(u(t)); }
    /// Interaction-picture matrix, built from Omega = 2 Omega_R cos(phi) e^{-i phi}.
    Mat2 h(double t) const {
        const double ph = wl * t;
        const cplx o = 2.0 * rabi(t) * std::cos(ph) * std::exp(cplx(0.0, -ph));
        Mat2 m;
        m << -det(t) / 2, o / 2.0, std::conj(o) / 2.0, det(t) / 2;
        return m;
    }
};

}  // namespace oracle
