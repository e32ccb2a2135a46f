#include "tlspulse/scenario.hpp"

#include <catch_amalgamated.hpp>

using namespace tlspulse;
using Catch::Approx;
using nlohmann::json;

namespace {

json cd_doc() {
    return json::parse(R"({
      "scenario": "cd_allen_eberly",
      "parameters": {"omega_m": "2pi*3MHz", "delta": "2pi*200MHz", "t0": "0.05ns", "omega_l": "2pi*10GHz"},
      "grid": {"tf": "0.4ns", "n_steps": 80000}
    })");
}

bool mentions(const std::vector<std::string>& v, const std::string& s) {
    for (const auto& x : v)
        if (x.find(s) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("catalog", "[scenario]") {
    REQUIRE(scenario_catalog().size() == 4);
    for (const char* n : {"cd_allen_eberly", "invariant_few", "invariant_many", "propagate_custom"}) {
        REQUIRE(find_scenario(n) != nullptr);
    }
    CHECK(find_scenario("nope") == nullptr);
}

TEST_CASE("complete config resolves to base units", "[scenario]") {
    const auto [rep, r] = resolve_scenario(parse_scenario(cd_doc()));
    REQUIRE(rep.ok());
    CHECK(rep.warnings.empty());
    REQUIRE(r);
    CHECK((*r)["omega_m"] == Approx(kTwoPi * 3e-3));
    CHECK((*r)["delta"] == Approx(kTwoPi * 0.2));
    CHECK((*r)["t0"] == 0.05);
    CHECK((*r)["omega_l"] == Approx(kTwoPi * 10.0));
    CHECK(r->options.at("envelope") == "sech");
    CHECK(r->tf == 0.4);
    CHECK(r->n_steps == 80000);
    CHECK(r->record_every == 20);
    CHECK(r->grid().dt() == Approx(5e-6));
    CHECK(r->outputs == find_scenario("cd_allen_eberly")->outputs);
}

TEST_CASE("missing key is reported by name", "[scenario]") {
    json d = cd_doc();
    d["parameters"].erase("t0");
    const ValidationReport rep = validate_scenario(parse_scenario(d));
    CHECK_FALSE(rep.ok());
    CHECK(rep.missing_keys == std::vector<std::string>{"t0"});
}

TEST_CASE("unit violations", "[scenario]") {
    json d = cd_doc();
    d["parameters"]["t0"] = "2pi*3MHz";
    d["parameters"]["delta"] = "fast";
    const ValidationReport rep = validate_scenario(parse_scenario(d));
    CHECK_FALSE(rep.ok());
    CHECK(rep.unit_violations.size() == 2);
    CHECK(mentions(rep.unit_violations, "t0"));
    CHECK(mentions(rep.unit_violations, "delta"));

    // Plain numbers are base units and always accepted.
    d = cd_doc();
    d["parameters"]["t0"] = 0.05;
    CHECK(validate_scenario(parse_scenario(d)).ok());
}

TEST_CASE("resolution rule", "[scenario]") {
    json d = cd_doc();
    d["grid"]["n_steps"] = 10;
    ValidationReport rep = validate_scenario(parse_scenario(d));
    CHECK_FALSE(rep.ok());
    CHECK(mentions(rep.errors, "resolution"));

    // 2pi*10 GHz over 0.4 ns is ~4 periods; 60 steps gives ~15 per period.
    d["grid"]["n_steps"] = 60;
    rep = validate_scenario(parse_scenario(d));
    CHECK(rep.ok());
    CHECK(mentions(rep.warnings, "resolution"));
}

TEST_CASE("options, outputs and unknown keys", "[scenario]") {
    json d = cd_doc();
    d["parameters"]["envelope"] = "gauss";
    CHECK(mentions(validate_scenario(parse_scenario(d)).errors, "envelope"));

    d = cd_doc();
    d["parameters"]["envelope"] = "sinh_literal";
    const auto [rep, r] = resolve_scenario(parse_scenario(d));
    REQUIRE(r);
    CHECK(r->options.at("envelope") == "sinh_literal");

    d = cd_doc();
    d["parameters"]["colour"] = 1;
    CHECK(mentions(validate_scenario(parse_scenario(d)).errors, "colour"));

    d = cd_doc();
    d["outputs"] = {"populations", "angles"};
    CHECK(mentions(validate_scenario(parse_scenario(d)).errors, "angles"));

    d = cd_doc();
    d["shaping"] = json::array({json::array({1.0, 2.0})});
    CHECK(mentions(validate_scenario(parse_scenario(d)).errors, "shaping"));
}

TEST_CASE("structural errors throw", "[scenario]") {
    CHECK_THROWS_AS(parse_scenario(json::array()), ValidationError);
    CHECK_THROWS_WITH(parse_scenario(json{{"scenario", "x"}, {"grid", {{"tf", 1}, {"n_steps", 1}}}}),
                      Catch::Matchers::ContainsSubstring("invariant_many"));
    json d = cd_doc();
    d["grid"].erase("n_steps");
    CHECK_THROWS_AS(parse_scenario(d), ValidationError);
    d = cd_doc();
    d["parameters"]["t0"] = json::array();
    CHECK_THROWS_AS(parse_scenario(d), ValidationError);
    d = cd_doc();
    d["shaping"] = {{1.0}};
    CHECK_THROWS_AS(parse_scenario(d), ValidationError);
}

TEST_CASE("grid checks", "[scenario]") {
    json d = cd_doc();
    d["grid"]["tf"] = "0ns";
    CHECK(mentions(validate_scenario(parse_scenario(d)).errors, "tf"));
    d = cd_doc();
    d["grid"]["t_start"] = "0.1ns";
    CHECK(mentions(validate_scenario(parse_scenario(d)).errors, "t_start"));
    d = cd_doc();
    d["grid"]["n_steps"] = 0;
    CHECK_FALSE(validate_scenario(parse_scenario(d)).ok());
}

TEST_CASE("defaults for the other scenarios", "[scenario]") {
    const json few = json::parse(R"({"scenario": "invariant_few", "parameters": {"omega_l": "2pi*500MHz"},
                                     "grid": {"tf": "5ns", "n_steps": 5000}})");
    const auto [rep, r] = resolve_scenario(parse_scenario(few));
    REQUIRE(r);
    CHECK((*r)["alpha_mid"] == 2.0);
    CHECK((*r)["steps_per_period"] == 200.0);
    CHECK_FALSE(r->shaping.has_value());
    CHECK(r->record_every == 1);

    const json many = json::parse(R"({"scenario": "invariant_many",
        "parameters": {"a": "(2pi)^2*254.648MHz^2", "omega_0": "2pi*2GHz", "big_a": "(2pi)^2*506.606MHz^2",
                       "omega_atom": "2pi*5GHz"},
        "grid": {"tf": "0.1us", "n_steps": 400000}})");
    const auto [rep2, r2] = resolve_scenario(parse_scenario(many));
    REQUIRE(r2);
    CHECK(r2->tf == Approx(100.0));
    CHECK((*r2)["a"] == Approx(kTwoPi * kTwoPi * 254.648e-6));
    CHECK(r2->options.at("mode") == "evaluate");
    CHECK((*r2)["budget"] == 200.0);
    CHECK(scenario_max_frequency(*r2) == Approx(kTwoPi * 5.0 + 0.5 * kTwoPi * kTwoPi * 254.648e-6 * 100.0));
}
