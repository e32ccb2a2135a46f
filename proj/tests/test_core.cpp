#include "tlspulse/core.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace tlspulse;
using Catch::Approx;

TEST_CASE("uniform grid samples", "[core][grid]") {
    const TimeGrid g = make_uniform_grid(0.0, 0.4, 4);
    REQUIRE(g.size() == 5);
    const double expected[] = {0.0, 0.1, 0.2, 0.3, 0.4};
    for (std::size_t k = 0; k < 5; ++k) CHECK(g[k] == Approx(expected[k]).margin(1e-16));
    CHECK(g[4] == 0.4);

    const TimeGrid one = make_uniform_grid(0.0, 5.0, 1);
    REQUIRE(one.samples() == std::vector<double>{0.0, 5.0});
}

TEST_CASE("grid spacing resolves a 10 rad-cycle/ns carrier", "[core][grid]") {
    const TimeGrid g = make_uniform_grid(0.0, 0.4, 80000);
    CHECK(g.dt() == Approx(5e-6).epsilon(1e-14));
    const ResolutionCheck rc = check_resolution(kTwoPi * 10.0, g.dt());
    CHECK(rc.steps_per_period == Approx(20000.0).epsilon(1e-12));
    CHECK(rc.level == ResolutionLevel::Ok);
}

TEST_CASE("grid rejects bad input", "[core][grid]") {
    CHECK_THROWS_AS(make_uniform_grid(0.0, 0.0, 4), ValidationError);
    CHECK_THROWS_AS(make_uniform_grid(1.0, 0.0, 4), ValidationError);
    CHECK_THROWS_AS(make_uniform_grid(0.0, 1.0, 0), ValidationError);
    CHECK_THROWS_AS(make_uniform_grid(0.0, 1.0, -3), ValidationError);
    CHECK_THROWS_AS(make_uniform_grid(std::nan(""), 1.0, 4), ValidationError);
    CHECK_THROWS_AS(make_uniform_grid(0.0, std::numeric_limits<double>::infinity(), 4), ValidationError);
}

TEST_CASE("grid is monotone and uniform to rounding", "[core][grid][property]") {
    for (double tf : {0.4, 5.0, 100.0, 1e-3}) {
        const TimeGrid g(0.0, tf, 12345);
        const auto s = g.samples();
        REQUIRE(s.front() == 0.0);
        REQUIRE(s.back() == tf);
        const double eps = std::numeric_limits<double>::epsilon();
        for (std::size_t k = 1; k < s.size(); ++k) {
            REQUIRE(s[k] > s[k - 1]);
            REQUIRE(std::abs((s[k] - s[k - 1]) - g.dt()) <= 4.0 * eps * tf);
        }
    }
}

TEST_CASE("resolution levels", "[core]") {
    CHECK(check_resolution(0.0, 1.0).level == ResolutionLevel::Ok);
    CHECK(check_resolution(kTwoPi, 1.0 / 25.0).level == ResolutionLevel::Ok);
    CHECK(check_resolution(kTwoPi, 1.0 / 10.0).level == ResolutionLevel::Warning);
    CHECK(check_resolution(kTwoPi, 1.0 / 3.0).level == ResolutionLevel::Error);
}

TEST_CASE("finite-difference stencils are fourth order", "[core][fd]") {
    const RealFn f = [](double t) { return std::sin(3.0 * t); };
    const double e1 = std::abs(central_derivative(f, 0.7, 0.02) - 3.0 * std::cos(2.1));
    const double e2 = std::abs(central_derivative(f, 0.7, 0.01) - 3.0 * std::cos(2.1));
    CHECK(std::log2(e1 / e2) == Approx(4.0).margin(0.2));
    CHECK(central_second_derivative(f, 0.7, 1e-3) == Approx(-9.0 * std::sin(2.1)).epsilon(1e-7));

    const TimeGrid g(0.0, 2.0, 400);
    std::vector<double> y;
    for (double t : g.samples()) y.push_back(std::sin(3.0 * t));
    const auto d = differentiate_samples(y, g.dt());
    double worst = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) worst = std::max(worst, std::abs(d[k] - 3.0 * std::cos(3.0 * g[k])));
    CHECK(worst < 1e-6);
    CHECK_THROWS_AS(differentiate_samples({1.0, 2.0, 3.0}, 0.1), ValidationError);
}

TEST_CASE("pulse phase and phase rate agree", "[core][pulse][property]") {
    PulseSpec p;
    p.rabi = [](double) { return 1.0; };
    p.phase = [](double t) { return 2.0 * t + 0.3 * t * t; };
    p.phase_rate = [](double t) { return 2.0 + 0.6 * t; };
    p.omega0 = [](double) { return 2.0; };
    REQUIRE(p.complete());
    const TimeGrid g(0.0, 5.0, 1000);
    CHECK(phase_rate_mismatch(p, g, 1e-4) < 1e-6);

    p.phase_rate = [](double t) { return 2.0 + 0.5 * t; };
    CHECK(phase_rate_mismatch(p, g, 1e-4) > 1e-3);

    CHECK(p.detuning_at(1.0) == Approx(-0.5));
    CHECK(p.phase_accel_at(1.0) == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("state vector populations", "[core][state]") {
    const StateVector s{cplx(0.6, 0.0), cplx(0.0, 0.8)};
    CHECK(s.p_g() == Approx(0.36));
    CHECK(s.p_e() == Approx(0.64));
    CHECK(s.norm() == Approx(1.0));
    CHECK(std::abs(inner(StateVector::ground(), StateVector::excited())) == 0.0);
}

TEST_CASE("hermiticity predicate", "[core]") {
    Mat2 h;
    h << 1.0, cplx(0.5, 0.2), cplx(0.5, -0.2), -1.0;
    CHECK(is_hermitian(h));
    CHECK(eigen_splitting(h) == Approx(2.0 * std::sqrt(1.0 + 0.29)));
    h(1, 0) = cplx(0.5, 0.2);
    CHECK_FALSE(is_hermitian(h));
}
