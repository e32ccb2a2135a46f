#include "tlspulse/designer_many.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace tlspulse;
using Catch::Approx;

TEST_CASE("chirped Gaussian pulse", "[many]") {
    const ChirpGaussParams prm = many_oscillation_seed();
    const PulseSpec p = chirp_gauss_pulse(prm);
    const double tc = 0.5 * prm.tf;
    CHECK(p.phase(0.0) == Approx(kPi / 2));
    CHECK(p.phase_rate(tc) == Approx(prm.omega_atom));
    CHECK(p.detuning_at(tc) == Approx(0.0).margin(1e-12));
    CHECK(p.rabi(tc) == Approx(prm.omega_0_rabi));
    for (double t : {0.0, 13.7, 50.0, 88.1, 100.0}) {
        CHECK(p.detuning_at(t) == Approx(prm.a * (t - tc)).margin(1e-12));
        CHECK(p.rabi_rate(t) == Approx(central_derivative(p.rabi, t, 1e-3)).margin(1e-9));
    }
    const TimeGrid g(0.0, prm.tf, 1000);
    CHECK(phase_rate_mismatch(p, g, 1e-3) < 1e-8);

    ChirpGaussParams bad = prm;
    bad.big_a = 0.0;
    CHECK_THROWS_AS(chirp_gauss_pulse(bad), ValidationError);
    bad = prm;
    bad.tf = -1.0;
    CHECK_THROWS_AS(chirp_gauss_pulse(bad), ValidationError);
}

TEST_CASE("objective and fidelity identity", "[many][property]") {
    CHECK(objective_from_theta(kPi) == 0.0);
    CHECK(theta_from_population(1.0) == Approx(kPi));
    CHECK(theta_from_population(1.0 + 1e-12) == Approx(kPi));
    for (double pe = 0.0; pe <= 1.0; pe += 0.01) {
        const double obj = objective_from_theta(theta_from_population(pe));
        const double back = std::pow(std::sin(0.5 * (kPi - std::sqrt(obj))), 2);
        REQUIRE(back == Approx(pe).margin(1e-12));
    }
    // objective < 1e-3 exactly when P_e exceeds sin^2((pi - sqrt(1e-3)) / 2).
    const double threshold = std::pow(std::sin(0.5 * (kPi - std::sqrt(1e-3))), 2);
    CHECK(threshold == Approx(0.99975).margin(1e-5));
    CHECK(objective_from_theta(theta_from_population(threshold + 1e-9)) < 1e-3);
    CHECK(objective_from_theta(theta_from_population(threshold - 1e-9)) > 1e-3);
}

TEST_CASE("resonant constant drive inverts", "[many]") {
    // A very wide Gaussian is flat on [0, tf]; with a = 0 and Omega_0 tf = pi under RWA it is a pi pulse.
    ChirpGaussParams prm;
    prm.a = 0.0;
    prm.big_a = 1e-14;
    prm.tf = 2.0;
    prm.omega_0_rabi = kPi / 2.0;
    prm.omega_atom = 40.0;
    const TimeGrid g(0.0, prm.tf, 4000);
    const InversionEvaluation e = evaluate_inversion(prm, g, AngleModel::Rwa);
    CHECK(e.p_e == Approx(1.0).margin(1e-9));
    CHECK(e.objective < 1e-8);
}

TEST_CASE("resolution guard", "[many]") {
    const ChirpGaussParams prm = many_oscillation_seed();
    CHECK_THROWS_AS(inversion_objective(prm, TimeGrid(0.0, prm.tf, 1000)), ResolutionError);
}

TEST_CASE("objective paths agree", "[many][property]") {
    const ChirpGaussParams seed = many_oscillation_seed();
    const TimeGrid g = chirp_gauss_grid(seed);
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> u(0.8, 1.2);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        ChirpGaussParams p = seed;
        p.a *= u(rng);
        p.omega_0_rabi *= u(rng);
        const AngleModel m = k % 2 == 0 ? AngleModel::Exact : AngleModel::Rwa;
        worst = std::max(worst, std::abs(inversion_objective(p, g, m) - objective_from_angles(p, g, m)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("objective insensitive to the pole offset", "[many][property]") {
    const ChirpGaussParams p = many_oscillation_reference_optimum();
    const TimeGrid g = chirp_gauss_grid(p);
    const double full = objective_from_angles(p, g, AngleModel::Exact, kObjectivePoleEpsilon);
    const double half = objective_from_angles(p, g, AngleModel::Exact, 0.5 * kObjectivePoleEpsilon);
    CHECK(std::abs(full - half) < 1e-9);
}

TEST_CASE("optimizer budget and trivial seeds", "[many][opt]") {
    const ChirpGaussParams seed = many_oscillation_seed();
    const TimeGrid g = chirp_gauss_grid(seed, 100000);
    const OptimizationResult one = optimize_inversion(seed, g, 1);
    CHECK(one.trace.evaluations == 1);
    CHECK_FALSE(one.trace.converged);
    CHECK(one.best.a == seed.a);
    CHECK(one.best.omega_0_rabi == seed.omega_0_rabi);
    CHECK_THROWS_AS(optimize_inversion(seed, g, 0), ValidationError);

    // A seed already below target stops at once.
    OptimizeOptions loose;
    loose.target = 10.0;
    const OptimizationResult done = optimize_inversion(seed, g, 50, loose);
    CHECK(done.trace.converged);
    CHECK(done.trace.evaluations == 1);
}

TEST_CASE("optimizer finds an inverting pulse from the seed", "[many][opt]") {
    const ChirpGaussParams seed = many_oscillation_seed();
    const TimeGrid g = chirp_gauss_grid(seed);
    const auto csv = std::filesystem::temp_directory_path() / "tlspulse_trace_test.csv";
    OptimizeOptions o;
    o.checkpoint_csv = csv;
    const OptimizationResult r = optimize_inversion(seed, g, 200, o);
    CHECK(r.trace.converged);
    CHECK(r.trace.evaluations <= 200);
    CHECK(r.trace.best.objective < 1e-3);
    CHECK(evaluate_inversion(r.best, g).p_e >= 0.99);
    CHECK(r.best.big_a == seed.big_a);
    CHECK(r.best.omega_atom == seed.omega_atom);
    for (std::size_t k = 1; k < r.trace.iterations.size(); ++k) {
        REQUIRE(r.trace.iterations[k].best_objective <= r.trace.iterations[k - 1].best_objective);
    }

    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    CHECK(header == "evaluation,a_over_2pi_sq_GHz2,omega_0_over_2pi_GHz,objective,best_objective");
    std::size_t rows = 0;
    for (std::string line; std::getline(f, line);) ++rows;
    CHECK(rows == r.trace.evaluations);
    std::filesystem::remove(csv);
}
