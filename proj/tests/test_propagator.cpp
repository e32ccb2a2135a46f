#include "tlspulse/counterdiabatic.hpp"
#include "tlspulse/hamiltonians.hpp"
#include "tlspulse/propagator.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace tlspulse;
using Catch::Approx;

namespace {

PulseSpec resonant(double rabi) {
    PulseSpec p;
    p.rabi = [=](double) { return rabi; };
    p.phase = [](double t) { return 3.0 * t; };
    p.phase_rate = [](double) { return 3.0; };
    p.omega0 = [](double) { return 3.0; };
    return p;
}

PulseSpec chirped_drive() {
    PulseSpec p;
    p.rabi = [](double t) { return 0.9 * std::exp(-0.3 * (t - 2.5) * (t - 2.5)); };
    p.phase = [](double t) { return 4.0 * t + 0.1 * t * t; };
    p.phase_rate = [](double t) { return 4.0 + 0.2 * t; };
    p.omega0 = [](double) { return 4.5; };
    return p;
}

double rabi_max_error(std::size_t n) {
    const double om = kTwoPi * 0.1;
    const TimeGrid g(0.0, 5.0, n);
    const auto r = propagate(h_rwa(resonant(om)), StateVector::ground(), g);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        worst = std::max(worst, std::abs(r.p_e[k] - oracle::rabi_pe(om, 0.0, r.t[k])));
    }
    return worst;
}

double rabi_final_amplitude_error(std::size_t n) {
    const double om = 2.0;
    const double delta = 1.0;
    PulseSpec p = resonant(om);
    p.omega0 = [=](double) { return 3.0 + delta; };
    const TimeGrid g(0.0, 5.0, n);
    const auto r = propagate(h_rwa(p), StateVector::ground(), g);
    // Exact amplitude for constant H = (1/2)[[-d, w], [w, d]].
    const double w = std::hypot(om, delta);
    const double x = 0.5 * w * 5.0;
    const cplx cg(std::cos(x), delta / w * std::sin(x));
    const cplx ce(0.0, -om / w * std::sin(x));
    return std::hypot(std::abs(r.final_state().cg - cg), std::abs(r.final_state().ce - ce));
}

}  // namespace

TEST_CASE("zero Hamiltonian leaves the state unchanged", "[propagator]") {
    const Hamiltonian2x2 zero{Picture::I, [](double) { return Mat2::Zero().eval(); }};
    const StateVector psi{cplx(0.6, 0.0), cplx(0.0, 0.8)};
    const auto r = propagate(zero, psi, TimeGrid(0.0, 3.0, 50));
    CHECK(r.final_state().cg == psi.cg);
    CHECK(r.final_state().ce == psi.ce);
}

TEST_CASE("resonant Rabi oscillation matches the analytic formula", "[propagator]") {
    CHECK(rabi_max_error(2000) < 1e-8);
}

TEST_CASE("RK4 global error converges at fourth order", "[propagator][property]") {
    const double e1 = rabi_final_amplitude_error(100);
    const double e2 = rabi_final_amplitude_error(200);
    const double e3 = rabi_final_amplitude_error(400);
    const double p1 = std::log2(e1 / e2);
    const double p2 = std::log2(e2 / e3);
    INFO("orders " << p1 << " " << p2);
    CHECK(p1 >= 3.7);
    CHECK(p1 <= 4.3);
    CHECK(p2 >= 3.7);
    CHECK(p2 <= 4.3);
}

TEST_CASE("single step of a diagonal Hamiltonian", "[propagator]") {
    const double w = 2.0;
    Mat2 h = Mat2::Zero();
    h(0, 0) = -0.5 * w;
    h(1, 1) = 0.5 * w;
    const StateVector psi{cplx(1.0 / std::sqrt(2.0), 0.0), cplx(1.0 / std::sqrt(2.0), 0.0)};
    for (double dt : {0.1, 0.05}) {
        const StateVector out = propagate_step({h, h, h}, psi, dt);
        const double err = std::abs(out.cg - psi.cg * std::exp(0.5 * kI * w * dt))
                           + std::abs(out.ce - psi.ce * std::exp(-0.5 * kI * w * dt));
        CHECK(err < std::pow(w * dt, 5));
    }
    const StateVector same = propagate_step({h, h, h}, psi, 0.0);
    CHECK(same.cg == psi.cg);
    CHECK(same.ce == psi.ce);
}

TEST_CASE("per-step norm drift on a resolved grid", "[propagator][property]") {
    const Mat2 h = two_level_matrix(0.7, cplx(1.1, -0.4));
    StateVector psi = StateVector::ground();
    for (int k = 0; k < 100; ++k) {
        const StateVector next = propagate_step({h, h, h}, psi, 1e-3);
        REQUIRE(std::abs(next.norm() - psi.norm()) < 1e-12);
        psi = next;
    }
}

TEST_CASE("norm is conserved over accepted runs", "[propagator][property]") {
    const auto r = propagate(h_interaction(chirped_drive()), StateVector::ground(), TimeGrid(0.0, 5.0, 20000));
    CHECK(r.max_norm_error() < 1e-8);
    CHECK(r.accepted());
    for (std::size_t k = 0; k < r.t.size(); ++k) REQUIRE(r.p_g[k] + r.p_e[k] == Approx(r.states[k].norm() * r.states[k].norm()));
}

TEST_CASE("forward then backward returns to the initial state", "[propagator][property]") {
    const PulseSpec p = chirped_drive();
    const Hamiltonian2x2 h = h_interaction(p);
    const TimeGrid g(0.0, 5.0, 20000);
    const StateVector psi0{cplx(0.8, 0.0), cplx(0.0, 0.6)};
    const auto fwd = propagate(h, psi0, g);
    // Backward in time: s = tf - t, d/ds psi = +i H(tf - s) psi.
    const Hamiltonian2x2 rev{Picture::I, [h](double s) { return Mat2(-h(5.0 - s)); }};
    const auto back = propagate(rev, fwd.final_state(), g);
    const double err = (back.final_state().vec() - psi0.vec()).norm();
    CHECK(err < 1e-7);
}

TEST_CASE("S and I pictures give the same bare populations", "[propagator][property]") {
    const PulseSpec p = chirped_drive();
    const TimeGrid g(0.0, 5.0, 40000);
    const auto rs = propagate(h_schrodinger(p), StateVector::ground(), g);
    const auto ri = propagate(h_interaction(p), StateVector::ground(), g);
    double worst = 0.0;
    for (std::size_t k = 0; k < rs.t.size(); ++k) worst = std::max(worst, std::abs(rs.p_g[k] - ri.p_g[k]));
    CHECK(worst < 2e-8);
}

TEST_CASE("input validation", "[propagator]") {
    const Hamiltonian2x2 h = h_interaction(chirped_drive());
    CHECK_THROWS_AS(propagate(h, StateVector{cplx(1.0, 0.0), cplx(1.0, 0.0)}, TimeGrid(0.0, 1.0, 100)),
                    ValidationError);
    CHECK_THROWS_AS(propagate(h, StateVector::ground(), TimeGrid(0.0, 5.0, 5)), ResolutionError);
    const Hamiltonian2x2 bad{Picture::I, [](double t) {
                                 Mat2 m = Mat2::Zero();
                                 if (t > 0.5) m(0, 0) = std::numeric_limits<double>::infinity();
                                 return m;
                             }};
    CHECK_THROWS_AS(propagate(bad, StateVector::ground(), TimeGrid(0.0, 1.0, 100)), NumericalError);
}

TEST_CASE("recording stride keeps the final sample", "[propagator]") {
    PropagationOptions o;
    o.record_every = 7;
    const auto r = propagate(h_interaction(chirped_drive()), StateVector::ground(), TimeGrid(0.0, 5.0, 1000), o);
    CHECK(r.t.back() == 5.0);
    CHECK(r.t.size() == 1000 / 7 + 2);
}

TEST_CASE("step halving estimates the local error", "[propagator]") {
    const auto v = propagate_verified(h_interaction(chirped_drive()), StateVector::ground(), TimeGrid(0.0, 5.0, 4000));
    CHECK(v.per_step_error < 1e-10);
    CHECK(v.result.grid.n_steps() == 8000);
}

TEST_CASE("fidelity is the final excited population", "[propagator]") {
    const double om = 1.0;
    const auto r = propagate(h_rwa(resonant(om)), StateVector::ground(), TimeGrid(0.0, kPi / om, 2000));
    CHECK(fidelity_inversion(r) == Approx(1.0).margin(1e-10));
    const Hamiltonian2x2 zero{Picture::I, [](double) { return Mat2::Zero().eval(); }};
    CHECK(fidelity_inversion(propagate(zero, StateVector::ground(), TimeGrid(0.0, 1.0, 10))) == 0.0);
}

TEST_CASE("Allen-Eberly sweep alone does not invert beyond the RWA", "[propagator]") {
    const PulseSpec p = allen_eberly_pulse({kTwoPi * 3e-3, kTwoPi * 0.2, 0.05, 0.4, kTwoPi * 10.0, Envelope::Sech});
    const auto r = propagate(h_interaction(p), StateVector::ground(), TimeGrid(0.0, 0.4, 20000));
    CHECK(r.p_g.back() >= 0.9);
}

TEST_CASE("propagation is deterministic", "[propagator]") {
    const Hamiltonian2x2 h = h_interaction(chirped_drive());
    const auto a = propagate(h, StateVector::ground(), TimeGrid(0.0, 5.0, 3000));
    const auto b = propagate(h, StateVector::ground(), TimeGrid(0.0, 5.0, 3000));
    CHECK(a.final_state().cg == b.final_state().cg);
    CHECK(a.final_state().ce == b.final_state().ce);
}
