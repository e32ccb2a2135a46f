/**
 * @file polynomial.hpp
 * @brief Polynomials on [0, tf] fixed by value and derivative constraints.
 *
 * Coefficients are stored in the scaled variable s = t / tf, which keeps the
 * degree-13 constraint system solvable in double precision. Evaluation uses
 * long double Horner sums.
 */
#pragma once

#include "tlspulse/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace tlspulse {

enum class ConstraintKind { Value, Derivative };

inline std::string_view to_string(ConstraintKind k) { return k == ConstraintKind::Value ? "value" : "derivative"; }

struct Constraint {
    ConstraintKind kind = ConstraintKind::Value;
    double time = 0.0;    // ns
    double target = 0.0;  // rad, or rad/ns for derivatives
};

class ConstraintSet {
public:
    explicit ConstraintSet(double tf) : tf_(tf) {
        if (!std::isfinite(tf) || tf <= 0.0) throw ValidationError("constraint set: tf must be positive");
    }

    /// Adds a constraint; rejects times outside [0, tf] and duplicate (kind, time) pairs.
    ConstraintSet& add(ConstraintKind kind, double time, double target) {
        const double tol = 1e-12 * tf_;
        if (!std::isfinite(time) || !std::isfinite(target)) throw ValidationError("constraint: non-finite entry");
        if (time < -tol || time > tf_ + tol) {
            throw ValidationError("constraint at t = " + std::to_string(time) + " ns lies outside [0, tf]");
        }
        for (const auto& c : items_) {
            if (c.kind == kind && std::abs(c.time - time) <= tol) {
                throw ValidationError("duplicate " + std::string(to_string(kind)) + " constraint at t = "
                                      + std::to_string(time) + " ns");
            }
        }
        items_.push_back({kind, std::clamp(time, 0.0, tf_), target});
        return *this;
    }
    ConstraintSet& value(double time, double target) { return add(ConstraintKind::Value, time, target); }
    ConstraintSet& derivative(double time, double target) { return add(ConstraintKind::Derivative, time, target); }

    double tf() const { return tf_; }
    std::size_t size() const { return items_.size(); }
    const std::vector<Constraint>& items() const { return items_; }

private:
    double tf_;
    std::vector<Constraint> items_;
};

class PolynomialAnsatz {
public:
    PolynomialAnsatz(double tf, const std::vector<double>& scaled_coefficients)
        : PolynomialAnsatz(tf, std::vector<long double>(scaled_coefficients.begin(), scaled_coefficients.end())) {}

    // The degree-13 designs have coefficients near 1e8 with heavy cancellation,
    // so rounding them to double alone costs ~1e-8 in the constraint residuals.
    PolynomialAnsatz(double tf, std::vector<long double> scaled_coefficients)
        : tf_(tf), c_(std::move(scaled_coefficients)) {
        if (c_.empty()) throw ValidationError("polynomial: no coefficients");
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    double tf() const { return tf_; }
    /// Coefficients of s^n, s = t / tf, rounded to double.
    std::vector<double> scaled_coefficients() const { return {c_.begin(), c_.end()}; }

    /// Coefficients of t^n (a_n = c_n / tf^n).
    std::vector<double> raw_coefficients() const {
        std::vector<double> a(c_.size());
        long double scale = 1.0L;
        for (std::size_t n = 0; n < c_.size(); ++n) {
            a[n] = static_cast<double>(c_[n] / scale);
            scale *= tf_;
        }
        return a;
    }

    /// k-th time derivative at t (k = 0, 1, 2, ...).
    double derivative(double t, int k) const {
        const long double s = static_cast<long double>(t) / tf_;
        long double acc = 0.0L;
        for (int n = degree(); n >= k; --n) {
            long double falling = 1.0L;
            for (int j = 0; j < k; ++j) falling *= static_cast<long double>(n - j);
            acc = acc * s + falling * c_[static_cast<std::size_t>(n)];
        }
        long double inv = 1.0L;
        for (int j = 0; j < k; ++j) inv /= tf_;
        return static_cast<double>(acc * inv);
    }

    double operator()(double t) const { return derivative(t, 0); }
    double rate(double t) const { return derivative(t, 1); }
    double accel(double t) const { return derivative(t, 2); }

    RealFn fn(int k = 0) const {
        return [self = *this, k](double t) { return self.derivative(t, k); };
    }

private:
    double tf_;
    std::vector<long double> c_;
};

struct PolynomialSolution {
    PolynomialAnsatz ansatz;
    double condition_number = 0.0;
    double max_residual = 0.0;
    std::vector<double> residuals;  // one per constraint, in constraint order
};

inline constexpr double kMaxConditionNumber = 1e14;
inline constexpr double kMaxConstraintResidual = 1e-9;

/**
 * Solves the square value/derivative system for a polynomial of the given
 * degree. Derivative rows are scaled by tf so all rows are O(1) in s. LU
 * solve in long double followed by two rounds of iterative refinement.
 *
 * Throws ValidationError when the constraint count does not equal degree + 1,
 * NumericalError when the system is ill-conditioned (cond > 1e14) or a
 * residual exceeds 1e-9.
 */
inline PolynomialSolution solve_polynomial(const ConstraintSet& cs, int degree) {
    const std::size_t n = static_cast<std::size_t>(degree) + 1;
    if (degree < 0 || cs.size() != n) {
        throw ValidationError("solve_polynomial: " + std::to_string(cs.size()) + " constraints for degree "
                              + std::to_string(degree) + " (need " + std::to_string(n) + ")");
    }
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const long double tf = cs.tf();
    MatL m(n, n);
    VecL b(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Constraint& c = cs.items()[r];
        const long double s = c.time / tf;
        for (std::size_t j = 0; j < n; ++j) {
            if (c.kind == ConstraintKind::Value) {
                m(r, j) = std::pow(s, static_cast<long double>(j));
            } else {
                m(r, j) = j == 0 ? 0.0L : static_cast<long double>(j) * std::pow(s, static_cast<long double>(j - 1));
            }
        }
        b(r) = c.kind == ConstraintKind::Value ? c.target : c.target * tf;
    }

    const Eigen::MatrixXd md = m.cast<double>();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(md);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxConditionNumber)) {
        throw NumericalError("solve_polynomial: ill-conditioned constraint system (cond = " + std::to_string(cond)
                             + ")");
    }

    const Eigen::FullPivLU<MatL> lu(m);
    VecL x = lu.solve(b);
    for (int it = 0; it < 2; ++it) x += lu.solve(VecL(b - m * x));

    std::vector<long double> coeffs(x.data(), x.data() + n);
    PolynomialSolution sol{PolynomialAnsatz(cs.tf(), coeffs), cond, 0.0, {}};
    for (const Constraint& c : cs.items()) {
        const int k = c.kind == ConstraintKind::Value ? 0 : 1;
        const double r = std::abs(sol.ansatz.derivative(c.time, k) - c.target);
        sol.residuals.push_back(r);
        sol.max_residual = std::max(sol.max_residual, r);
    }
    if (!(sol.max_residual <= kMaxConstraintResidual)) {
        throw NumericalError("solve_polynomial: constraint residual " + std::to_string(sol.max_residual)
                             + " exceeds 1e-9");
    }
    return sol;
}

}  // namespace tlspulse
