/**
 * @file scenario.hpp
 * @brief Declarative run descriptions read from JSON, and their validation.
 *
 * Document layout:
 *
 *     {
 *       "scenario":   "cd_allen_eberly" | "invariant_few" | "invariant_many" | "propagate_custom",
 *       "parameters": { "<key>": <number in base units> | "<quantity string>" | "<option word>", ... },
 *       "shaping":    [[t, theta], ...],            // invariant_few only, optional
 *       "grid":       { "t_start": 0, "tf": "0.4ns", "n_steps": 80000, "record_every": 20 },
 *       "outputs":    ["populations", ...],         // optional, defaults to all
 *       "comment":    "free text"                   // ignored
 *     }
 *
 * Quantity strings follow units.hpp. Option words (e.g. "envelope": "sech")
 * are plain strings checked against the option's allowed values.
 */
#pragma once

#include "tlspulse/core.hpp"
#include "tlspulse/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tlspulse {

enum class ScenarioKind { CdAllenEberly, InvariantFew, InvariantMany, PropagateCustom };

struct ParameterSpec {
    std::string key;
    Dimension dimension = Dimension::Plain;
    std::optional<double> default_value;  // nullopt: required
    std::string description;
};

struct OptionSpec {
    std::string key;
    std::vector<std::string> allowed;  // first entry is the default
    std::string description;
};

struct ScenarioInfo {
    ScenarioKind kind;
    std::string name;
    std::string summary;
    std::string example_config;
    std::vector<ParameterSpec> parameters;
    std::vector<OptionSpec> options;
    std::vector<std::string> outputs;  // accepted series names, in default order
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<ScenarioInfo> catalog = {
        {ScenarioKind::CdAllenEberly,
         "cd_allen_eberly",
         "Allen-Eberly sweep with counterdiabatic correction and phase-consistent repaired field",
         "configs/sweep_cd.json",
         {{"omega_m", Dimension::Frequency, std::nullopt, "peak Rabi frequency"},
          {"delta", Dimension::Frequency, std::nullopt, "chirp scale delta"},
          {"t0", Dimension::Time, std::nullopt, "sweep time scale"},
          {"omega_l", Dimension::Frequency, std::nullopt, "carrier frequency"}},
         {{"envelope", {"sech", "sinh_literal"}, "Rabi envelope shape"}},
         {"populations", "phase_tilde", "omega0_tilde", "field", "rabi_tilde"}},
        {ScenarioKind::InvariantFew,
         "invariant_few",
         "few-oscillation inversion designed from polynomial invariant angles",
         "configs/few_inversion.json",
         {{"omega_l", Dimension::Frequency, std::nullopt, "carrier frequency (phase = omega_l t)"},
          {"alpha_mid", Dimension::Angle, 2.0, "alpha at tf/2"},
          {"steps_per_period", Dimension::Plain, 200.0, "verification propagation resolution"}},
         {},
         {"angles", "field", "omega0", "populations"}},
        {ScenarioKind::InvariantMany,
         "invariant_many",
         "linear chirp with Gaussian Rabi envelope, exact vs rotating-wave dynamics, optional simplex search",
         "configs/many_seed.json",
         {{"a", Dimension::FrequencySquared, std::nullopt, "detuning slope"},
          {"omega_0", Dimension::Frequency, std::nullopt, "peak Rabi frequency"},
          {"big_a", Dimension::FrequencySquared, std::nullopt, "Gaussian width parameter A"},
          {"omega_atom", Dimension::Frequency, std::nullopt, "transition frequency"},
          {"budget", Dimension::Plain, 200.0, "objective evaluations (optimize mode)"},
          {"target", Dimension::Plain, 1e-3, "objective target (optimize mode)"}},
         {{"mode", {"evaluate", "optimize"}, "evaluate the given point or optimize from it"}},
         {"populations", "trace"}},
        {ScenarioKind::PropagateCustom,
         "propagate_custom",
         "constant Rabi frequency, linear phase, constant transition frequency",
         "",
         {{"rabi", Dimension::Frequency, std::nullopt, "Rabi frequency"},
          {"omega_l", Dimension::Frequency, std::nullopt, "field frequency"},
          {"omega0", Dimension::Frequency, std::nullopt, "transition frequency"},
          {"phase0", Dimension::Angle, 0.0, "phase at t = 0"}},
         {{"model", {"exact", "rwa"}, "interaction-picture Hamiltonian"}},
         {"populations"}},
    };
    return catalog;
}

inline std::string scenario_names() {
    std::string s;
    for (const auto& info : scenario_catalog()) s += (s.empty() ? "" : ", ") + info.name;
    return s;
}

inline const ScenarioInfo* find_scenario(std::string_view name) {
    for (const auto& info : scenario_catalog())
        if (info.name == name) return &info;
    return nullptr;
}

inline const ScenarioInfo& scenario_info(ScenarioKind kind) {
    for (const auto& info : scenario_catalog())
        if (info.kind == kind) return info;
    throw Error("unknown scenario kind");
}

struct ParameterValue {
    std::string text;                 // as written in the document
    std::optional<Quantity> quantity;  // nullopt when text is not a quantity
};

struct GridConfig {
    ParameterValue t_start{"0", Quantity{0.0, Dimension::Plain}};
    ParameterValue tf;
    long long n_steps = 0;
    long long record_every = 0;  // 0: choose so at most ~4000 rows are written
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::PropagateCustom;
    std::map<std::string, ParameterValue> parameters;
    std::optional<std::vector<std::pair<double, double>>> shaping;
    GridConfig grid;
    std::vector<std::string> outputs;
    std::string comment;
};

namespace detail {

inline ParameterValue parameter_value(const nlohmann::json& v, const std::string& where) {
    if (v.is_number()) {
        const double x = v.get<double>();
        return {v.dump(), Quantity{x, Dimension::Plain}};
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        return {s, try_parse_quantity(s)};
    }
    throw ValidationError(where + ": expected a number or a string");
}

}  // namespace detail

/// Structural parse; value-level problems are left for validate_scenario.
inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    if (!j.contains("scenario") || !j["scenario"].is_string()) {
        throw ValidationError("config: missing \"scenario\" (one of " + scenario_names() + ")");
    }
    const std::string name = j["scenario"].get<std::string>();
    const ScenarioInfo* info = find_scenario(name);
    if (!info) throw ValidationError("unknown scenario \"" + name + "\" (known: " + scenario_names() + ")");

    ScenarioConfig c;
    c.scenario = info->kind;
    if (j.contains("parameters")) {
        if (!j["parameters"].is_object()) throw ValidationError("config: \"parameters\" must be an object");
        for (const auto& [k, v] : j["parameters"].items()) c.parameters[k] = detail::parameter_value(v, k);
    }
    if (j.contains("shaping")) {
        const auto& s = j["shaping"];
        if (!s.is_array()) throw ValidationError("config: \"shaping\" must be an array of [t, theta] pairs");
        std::vector<std::pair<double, double>> pts;
        for (const auto& e : s) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                throw ValidationError("config: shaping entries must be [t_ns, theta_rad]");
            }
            pts.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        c.shaping = std::move(pts);
    }
    if (!j.contains("grid") || !j["grid"].is_object()) throw ValidationError("config: missing \"grid\" object");
    const auto& g = j["grid"];
    if (g.contains("t_start")) c.grid.t_start = detail::parameter_value(g["t_start"], "grid.t_start");
    if (!g.contains("tf")) throw ValidationError("config: grid.tf is required");
    c.grid.tf = detail::parameter_value(g["tf"], "grid.tf");
    if (!g.contains("n_steps") || !g["n_steps"].is_number_integer()) {
        throw ValidationError("config: grid.n_steps must be an integer");
    }
    c.grid.n_steps = g["n_steps"].get<long long>();
    if (g.contains("record_every")) {
        if (!g["record_every"].is_number_integer()) throw ValidationError("config: grid.record_every must be an integer");
        c.grid.record_every = g["record_every"].get<long long>();
    }
    if (j.contains("outputs")) {
        if (!j["outputs"].is_array()) throw ValidationError("config: \"outputs\" must be an array of names");
        for (const auto& o : j["outputs"]) {
            if (!o.is_string()) throw ValidationError("config: output names must be strings");
            c.outputs.push_back(o.get<std::string>());
        }
    } else {
        c.outputs = info->outputs;
    }
    if (j.contains("comment") && j["comment"].is_string()) c.comment = j["comment"].get<std::string>();
    return c;
}

struct ValidationReport {
    std::vector<std::string> missing_keys;
    std::vector<std::string> unit_violations;
    std::vector<std::string> errors;    // bad values, unknown keys, unresolvable grids
    std::vector<std::string> warnings;  // marginal resolution; do not clear `ok`

    bool ok() const { return missing_keys.empty() && unit_violations.empty() && errors.empty(); }
    std::string summary() const {
        std::string s;
        auto add = [&s](const std::string& label, const std::vector<std::string>& v) {
            for (const auto& m : v) s += label + ": " + m + "\n";
        };
        add("missing", missing_keys);
        add("unit", unit_violations);
        add("error", errors);
        add("warning", warnings);
        return s;
    }
};

/// Parameters after unit conversion, with defaults filled in. Base units: ns, rad/ns, rad.
struct ResolvedScenario {
    ScenarioKind scenario = ScenarioKind::PropagateCustom;
    std::map<std::string, double> values;
    std::map<std::string, std::string> options;
    std::optional<std::vector<std::pair<double, double>>> shaping;  // nullopt: designer default
    double t_start = 0.0;
    double tf = 0.0;
    std::size_t n_steps = 0;
    std::size_t record_every = 1;
    std::vector<std::string> outputs;

    double operator[](const std::string& k) const { return values.at(k); }
    TimeGrid grid() const { return TimeGrid(t_start, tf, n_steps); }
};

/// Fastest frequency the run has to resolve, from the resolved parameters.
inline double scenario_max_frequency(const ResolvedScenario& r);

namespace detail {

inline std::optional<double> resolve_value(const ParameterValue& v, Dimension dim, const std::string& key,
                                           ValidationReport& rep) {
    if (!v.quantity) {
        rep.unit_violations.push_back(key + ": \"" + v.text + "\" is not a quantity");
        return std::nullopt;
    }
    if (!v.quantity->compatible_with(dim)) {
        rep.unit_violations.push_back(key + ": \"" + v.text + "\" has dimension "
                                      + std::string(to_string(v.quantity->dimension)) + ", expected "
                                      + std::string(to_string(dim)));
        return std::nullopt;
    }
    if (!std::isfinite(v.quantity->value)) {
        rep.errors.push_back(key + ": non-finite value");
        return std::nullopt;
    }
    return v.quantity->value;
}

inline std::size_t default_record_every(std::size_t n_steps) { return std::max<std::size_t>(1, n_steps / 4000); }

}  // namespace detail

/**
 * Checks keys, units and the resolution rule. Returns the report and, when it
 * is ok, the resolved scenario.
 */
inline std::pair<ValidationReport, std::optional<ResolvedScenario>> resolve_scenario(const ScenarioConfig& c) {
    ValidationReport rep;
    const ScenarioInfo& info = scenario_info(c.scenario);
    ResolvedScenario r;
    r.scenario = c.scenario;

    for (const auto& [k, v] : c.parameters) {
        const bool known = std::any_of(info.parameters.begin(), info.parameters.end(),
                                       [&](const ParameterSpec& p) { return p.key == k; })
                           || std::any_of(info.options.begin(), info.options.end(),
                                          [&](const OptionSpec& o) { return o.key == k; });
        if (!known) rep.errors.push_back("unknown parameter \"" + k + "\" for " + info.name);
    }
    for (const ParameterSpec& p : info.parameters) {
        const auto it = c.parameters.find(p.key);
        if (it == c.parameters.end()) {
            if (p.default_value) {
                r.values[p.key] = *p.default_value;
            } else {
                rep.missing_keys.push_back(p.key);
            }
            continue;
        }
        if (auto v = detail::resolve_value(it->second, p.dimension, p.key, rep)) r.values[p.key] = *v;
    }
    for (const OptionSpec& o : info.options) {
        const auto it = c.parameters.find(o.key);
        if (it == c.parameters.end()) {
            r.options[o.key] = o.allowed.front();
            continue;
        }
        if (std::find(o.allowed.begin(), o.allowed.end(), it->second.text) == o.allowed.end()) {
            std::string allowed;
            for (const auto& a : o.allowed) allowed += (allowed.empty() ? "" : "|") + a;
            rep.errors.push_back(o.key + ": \"" + it->second.text + "\" is not one of " + allowed);
        } else {
            r.options[o.key] = it->second.text;
        }
    }

    if (c.shaping && c.scenario != ScenarioKind::InvariantFew) {
        rep.errors.push_back("\"shaping\" only applies to invariant_few");
    }
    r.shaping = c.shaping;

    for (const auto& o : c.outputs) {
        if (std::find(info.outputs.begin(), info.outputs.end(), o) == info.outputs.end()) {
            std::string allowed;
            for (const auto& a : info.outputs) allowed += (allowed.empty() ? "" : ", ") + a;
            rep.errors.push_back("output \"" + o + "\" not available for " + info.name + " (available: " + allowed
                                 + ")");
        }
    }
    r.outputs = c.outputs;

    const auto t_start = detail::resolve_value(c.grid.t_start, Dimension::Time, "grid.t_start", rep);
    const auto tf = detail::resolve_value(c.grid.tf, Dimension::Time, "grid.tf", rep);
    if (c.grid.n_steps < 1) rep.errors.push_back("grid.n_steps must be at least 1");
    if (c.grid.record_every < 0) rep.errors.push_back("grid.record_every must be non-negative");
    if (t_start && tf) {
        if (!(*tf > *t_start)) rep.errors.push_back("grid.tf must exceed grid.t_start");
        if (c.scenario != ScenarioKind::PropagateCustom && *t_start != 0.0) {
            rep.errors.push_back("grid.t_start must be 0 for " + info.name);
        }
        r.t_start = *t_start;
        r.tf = *tf;
    }
    r.n_steps = c.grid.n_steps > 0 ? static_cast<std::size_t>(c.grid.n_steps) : 0;
    r.record_every = c.grid.record_every > 0 ? static_cast<std::size_t>(c.grid.record_every)
                                             : detail::default_record_every(r.n_steps);

    if (rep.ok()) {
        const ResolutionCheck rc = check_resolution(scenario_max_frequency(r), (r.tf - r.t_start) / r.n_steps);
        char buf[200];
        std::snprintf(buf, sizeof buf, "%.3g steps per period of the fastest frequency (%.6g rad/ns)",
                      rc.steps_per_period, rc.max_frequency);
        if (rc.level == ResolutionLevel::Error) {
            rep.errors.push_back(std::string("resolution: ") + buf + ", need at least 4");
        } else if (rc.level == ResolutionLevel::Warning) {
            rep.warnings.push_back(std::string("resolution: ") + buf + ", 20 or more recommended");
        }
    }
    if (!rep.ok()) return {rep, std::nullopt};
    return {rep, r};
}

inline ValidationReport validate_scenario(const ScenarioConfig& c) { return resolve_scenario(c).first; }

inline double scenario_max_frequency(const ResolvedScenario& r) {
    auto v = [&r](const char* k) { return std::abs(r.values.at(k)); };
    switch (r.scenario) {
        case ScenarioKind::CdAllenEberly:
            // omega_0 = Delta + omega_L with |Delta| <= 2 delta^2 t0 / pi.
            return std::max(v("omega_l") + 2.0 * v("delta") * v("delta") * v("t0") / kPi, v("omega_m"));
        case ScenarioKind::InvariantFew: return v("omega_l");
        case ScenarioKind::InvariantMany:
            return std::max(v("omega_atom") + 0.5 * v("a") * (r.tf - r.t_start), v("omega_0"));
        case ScenarioKind::PropagateCustom: {
            const double delta = r.values.at("omega0") - r.values.at("omega_l");
            return std::max({v("omega_l"), v("omega0"), std::hypot(delta, 2.0 * v("rabi"))});
        }
    }
    return 0.0;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return parse_scenario(j);
}

}  // namespace tlspulse
