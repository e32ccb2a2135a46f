#include "tlspulse/nelder_mead.hpp"

#include <catch_amalgamated.hpp>

using namespace tlspulse;
using Catch::Approx;

namespace {

double rosenbrock(const std::array<double, 2>& x) {
    return 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1.0 - x[0]) * (1.0 - x[0]);
}

}  // namespace

TEST_CASE("quadratic bowl", "[nm]") {
    auto f = [](const std::array<double, 3>& x) {
        return (x[0] - 1) * (x[0] - 1) + 2 * (x[1] + 2) * (x[1] + 2) + 0.5 * (x[2] - 0.3) * (x[2] - 0.3);
    };
    NelderMeadOptions<3> o;
    o.budget = 2000;
    o.spread_tolerance = 1e-20;
    const auto tr = nelder_mead(f, {0.5, 0.5, 0.5}, o);
    CHECK(tr.converged);
    CHECK(tr.best_x[0] == Approx(1.0).margin(1e-5));
    CHECK(tr.best_x[1] == Approx(-2.0).margin(1e-5));
    CHECK(tr.best_x[2] == Approx(0.3).margin(1e-5));
}

TEST_CASE("rosenbrock valley", "[nm]") {
    NelderMeadOptions<2> o;
    o.budget = 5000;
    o.spread_tolerance = 1e-24;
    const auto tr = nelder_mead(rosenbrock, {-1.2, 1.0}, o);
    CHECK(tr.best_value < 1e-10);
    CHECK(tr.best_x[0] == Approx(1.0).margin(1e-4));
    CHECK(tr.best_x[1] == Approx(1.0).margin(1e-4));
}

TEST_CASE("initial simplex and budget", "[nm]") {
    NelderMeadOptions<2> o;
    o.budget = 1;
    const auto one = nelder_mead(rosenbrock, {2.0, 0.0}, o);
    REQUIRE(one.evaluation_count() == 1);
    CHECK_FALSE(one.converged);
    CHECK(one.best_x == std::array<double, 2>{2.0, 0.0});

    o.budget = 3;
    const auto three = nelder_mead(rosenbrock, {2.0, 0.0}, o);
    REQUIRE(three.evaluation_count() == 3);
    CHECK(three.evaluations[1].x[0] == Approx(2.1));
    CHECK(three.evaluations[1].x[1] == 0.0);
    CHECK(three.evaluations[2].x[0] == 2.0);
    CHECK(three.evaluations[2].x[1] == Approx(1e-3));

    o.budget = 0;
    CHECK_THROWS_AS(nelder_mead(rosenbrock, {2.0, 0.0}, o), std::invalid_argument);
}

TEST_CASE("target stops the search", "[nm]") {
    NelderMeadOptions<2> o;
    o.target = 1e-2;
    const auto tr = nelder_mead(rosenbrock, {-1.2, 1.0}, o);
    CHECK(tr.converged);
    CHECK(tr.best_value <= 1e-2);
    CHECK(tr.evaluations.back().best_so_far <= 1e-2);
    // Only the final evaluation can be the first one at or below target.
    for (std::size_t k = 0; k + 1 < tr.evaluations.size(); ++k) CHECK(tr.evaluations[k].best_so_far > 1e-2);

    NelderMeadOptions<1> zero;
    zero.target = 0.0;
    const auto at_seed = nelder_mead([](const std::array<double, 1>&) { return 0.0; }, std::array<double, 1>{1.0}, zero);
    CHECK(at_seed.converged);
    CHECK(at_seed.evaluation_count() == 1);
}

TEST_CASE("trace properties", "[nm][property]") {
    NelderMeadOptions<2> o;
    o.budget = 150;
    const auto a = nelder_mead(rosenbrock, {-1.2, 1.0}, o);
    const auto b = nelder_mead(rosenbrock, {-1.2, 1.0}, o);
    REQUIRE(a.evaluation_count() == b.evaluation_count());
    CHECK(a.evaluation_count() <= 150);
    for (std::size_t k = 0; k < a.evaluations.size(); ++k) {
        REQUIRE(a.evaluations[k].x == b.evaluations[k].x);
        REQUIRE(a.evaluations[k].value == b.evaluations[k].value);
        if (k > 0) REQUIRE(a.evaluations[k].best_so_far <= a.evaluations[k - 1].best_so_far);
        REQUIRE(a.evaluations[k].best_so_far <= a.evaluations[k].value);
    }
}

TEST_CASE("non-finite values and checkpoints", "[nm]") {
    std::size_t calls = 0, last = 0;
    NelderMeadOptions<1> o;
    o.budget = 45;
    o.spread_tolerance = 0.0;
    o.checkpoint_every = 10;
    o.checkpoint = [&](const SimplexTrace<1>& tr) {
        ++calls;
        last = tr.evaluation_count();
    };
    // Minimum sits inside a region where the objective is undefined.
    auto f = [](const std::array<double, 1>& x) { return x[0] < 0.1 ? std::nan("") : x[0] * x[0]; };
    const auto tr = nelder_mead(f, {1.0}, o);
    CHECK(calls == 4);
    CHECK(last == 40);
    CHECK(tr.best_x[0] >= 0.1);
    CHECK(tr.best_x[0] < 0.11);
    bool saw_inf = false;
    for (const auto& e : tr.evaluations) saw_inf = saw_inf || std::isinf(e.value);
    CHECK(saw_inf);
}
