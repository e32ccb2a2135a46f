/**
 * @file nelder_mead.hpp
 * @brief Derivative-free simplex minimizer over a fixed-size parameter vector.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tlspulse {

template <std::size_t N>
struct SimplexEvaluation {
    std::array<double, N> x{};
    double value = 0.0;
    double best_so_far = 0.0;
};

template <std::size_t N>
struct SimplexTrace {
    std::vector<SimplexEvaluation<N>> evaluations;  // in call order
    std::array<double, N> best_x{};
    double best_value = std::numeric_limits<double>::infinity();
    bool converged = false;  // target reached or simplex collapsed
    std::size_t iterations = 0;

    std::size_t evaluation_count() const { return evaluations.size(); }
};

template <std::size_t N>
struct NelderMeadOptions {
    double relative_step = 0.05;  // initial vertex i perturbs x_i by this fraction
    double absolute_step = 1e-3;  // used where x_i == 0
    std::size_t budget = 200;     // objective evaluations
    double spread_tolerance = 1e-10;
    double target = -std::numeric_limits<double>::infinity();
    // Called every `checkpoint_every` evaluations with the trace so far.
    std::size_t checkpoint_every = 0;
    std::function<void(const SimplexTrace<N>&)> checkpoint;
};

/**
 * Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink
 * 0.5). Stops when the best value reaches `target`, when the spread of
 * values over the simplex drops below `spread_tolerance`, or when the budget
 * is spent. Non-finite objective values are treated as +inf.
 */
template <std::size_t N, class F>
SimplexTrace<N> nelder_mead(F&& objective, const std::array<double, N>& x0, const NelderMeadOptions<N>& opt = {}) {
    static_assert(N >= 1);
    if (opt.budget < 1) throw std::invalid_argument("nelder_mead: budget must be at least 1");
    using Point = std::array<double, N>;
    SimplexTrace<N> tr;

    struct Budget {};
    struct Reached {};
    auto eval = [&](const Point& x) {
        if (tr.evaluations.size() >= opt.budget) throw Budget{};
        double v = objective(x);
        if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
        if (tr.evaluations.empty() || v < tr.best_value) {
            tr.best_value = v;
            tr.best_x = x;
        }
        tr.evaluations.push_back({x, v, tr.best_value});
        if (opt.checkpoint && opt.checkpoint_every > 0 && tr.evaluations.size() % opt.checkpoint_every == 0) {
            opt.checkpoint(tr);
        }
        if (v <= opt.target) throw Reached{};
        return v;
    };

    std::array<Point, N + 1> p{};
    std::array<double, N + 1> f{};
    try {
        p[0] = x0;
        f[0] = eval(x0);
        for (std::size_t i = 0; i < N; ++i) {
            p[i + 1] = x0;
            p[i + 1][i] = x0[i] != 0.0 ? x0[i] * (1.0 + opt.relative_step) : opt.absolute_step;
            f[i + 1] = eval(p[i + 1]);
        }

        auto affine = [](const Point& a, const Point& b, double s) {
            Point r;
            for (std::size_t k = 0; k < N; ++k) r[k] = a[k] + s * (b[k] - a[k]);
            return r;
        };

        for (;;) {
            std::array<std::size_t, N + 1> idx;
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
            std::array<Point, N + 1> ps;
            std::array<double, N + 1> fs;
            for (std::size_t i = 0; i <= N; ++i) {
                ps[i] = p[idx[i]];
                fs[i] = f[idx[i]];
            }
            p = ps;
            f = fs;

            if (f[N] - f[0] < opt.spread_tolerance) {
                tr.converged = true;
                break;
            }
            ++tr.iterations;

            Point c{};
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t k = 0; k < N; ++k) c[k] += p[i][k] / static_cast<double>(N);

            const Point xr = affine(c, p[N], -1.0);
            const double fr = eval(xr);
            if (fr < f[0]) {
                const Point xe = affine(c, p[N], -2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    p[N] = xe;
                    f[N] = fe;
                } else {
                    p[N] = xr;
                    f[N] = fr;
                }
            } else if (fr < f[N - 1]) {
                p[N] = xr;
                f[N] = fr;
            } else {
                const bool outside = fr < f[N];
                const Point xc = outside ? affine(c, xr, 0.5) : affine(c, p[N], 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : f[N])) {
                    p[N] = xc;
                    f[N] = fc;
                } else {
                    for (std::size_t i = 1; i <= N; ++i) {
                        p[i] = affine(p[0], p[i], 0.5);
                        f[i] = eval(p[i]);
                    }
                }
            }
        }
    } catch (Budget) {
    } catch (Reached) {
        tr.converged = true;
    }
    return tr;
}

}  // namespace tlspulse
