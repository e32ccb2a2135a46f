/**
 * @file cli.hpp
 * @brief Scenario runners behind the command-line tool.
 *
 * Every run writes CSV series plus manifest.json into one output directory.
 * CSV files start with a header row; the first column is `t_ns`, angular
 * frequencies are divided by 2 pi and carry the suffix `_over_2pi_GHz`,
 * angles end in `_rad`. Numbers use printf "%.12g".
 *
 * Exit codes: 0 success, 1 I/O or unexpected failure, 2 invalid config,
 * 3 numerical failure.
 */
#pragma once

#include "tlspulse/counterdiabatic.hpp"
#include "tlspulse/designer_few.hpp"
#include "tlspulse/designer_many.hpp"
#include "tlspulse/propagator.hpp"
#include "tlspulse/scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef TLSPULSE_VERSION
#define TLSPULSE_VERSION "unknown"
#endif

namespace tlspulse {

inline constexpr const char* kToolVersion = TLSPULSE_VERSION;

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInvalid = 2, kExitNumerical = 3 };

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size()) throw Error("csv: row width does not match header");
        rows_.push_back(row);
    }
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    void write(const std::filesystem::path& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        for (std::size_t j = 0; j < columns_.size(); ++j) f << (j ? "," : "") << columns_[j];
        f << '\n';
        char buf[32];
        for (const auto& row : rows_) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.12g", row[j]);
                f << (j ? "," : "") << buf;
            }
            f << '\n';
        }
        if (!f) throw Error("write failed: " + path.string());
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // e.g. ">= 0.999"
    bool pass = false;
};

/// Collects files, checks and results for one run.
class RunContext {
public:
    explicit RunContext(std::filesystem::path out_dir) : out_(std::move(out_dir)) {}

    const std::filesystem::path& out_dir() const { return out_; }

    void write_csv(const std::string& name, const CsvTable& t) {
        t.write(out_ / name);
        files_.push_back({{"file", name}, {"rows", t.rows()}, {"columns", t.columns()}});
    }
    void write_json(const std::string& name, const nlohmann::json& j) {
        std::ofstream f(out_ / name);
        if (!f) throw Error("cannot write " + (out_ / name).string());
        f << j.dump(2) << '\n';
        files_.push_back({{"file", name}});
    }
    void note_file(const std::string& name, std::size_t rows) { files_.push_back({{"file", name}, {"rows", rows}}); }

    void check(const std::string& name, double value, const std::string& relation, bool pass) {
        checks_.push_back({name, value, relation, pass});
    }
    void at_least(const std::string& name, double value, double bound) {
        check(name, value, ">= " + fmt(bound), value >= bound);
    }
    void below(const std::string& name, double value, double bound) {
        check(name, value, "< " + fmt(bound), value < bound);
    }

    nlohmann::json& results() { return results_; }
    const nlohmann::json& files() const { return files_; }
    const std::vector<Check>& checks() const { return checks_; }

private:
    static std::string fmt(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", x);
        return buf;
    }

    std::filesystem::path out_;
    nlohmann::json files_ = nlohmann::json::array();
    std::vector<Check> checks_;
    nlohmann::json results_ = nlohmann::json::object();
};

namespace detail {

inline bool wants(const ResolvedScenario& r, const std::string& output) {
    return std::find(r.outputs.begin(), r.outputs.end(), output) != r.outputs.end();
}

/// Grid indices 0, k, 2k, ... plus the last index (matches PropagationOptions::record_every).
inline std::vector<std::size_t> sample_indices(std::size_t n_steps, std::size_t every) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k <= n_steps; k += every) idx.push_back(k);
    if (idx.back() != n_steps) idx.push_back(n_steps);
    return idx;
}

inline double over_2pi(double w) { return w / kTwoPi; }

inline void run_cd(const ResolvedScenario& r, RunContext& ctx) {
    const AllenEberlyParams ap{r["omega_m"], r["delta"],   r["t0"], r.tf,
                               r["omega_l"], parse_envelope(r.options.at("envelope"))};
    const PulseSpec p = allen_eberly_pulse(ap);
    const TimeGrid g = r.grid();
    PropagationOptions po;
    po.record_every = r.record_every;

    const Hamiltonian2x2 h0 = h_interaction(p);
    const PropagationResult ref = propagate(h0, StateVector::ground(), g, po);
    const TotalHamiltonian tot = total_hamiltonian(h0, p, g);
    const PropagationResult cd = propagate(tot.h, StateVector::ground(), g, po);
    const RepairedPulse rp = repair_consistency(tot.decomposition, p, g);
    const PropagationResult repaired = propagate(h_s_doubleprime(rp), StateVector::ground(), g, po);

    const auto idx = sample_indices(g.n_steps(), r.record_every);
    if (wants(r, "populations")) {
        CsvTable t({"t_ns", "P_g_H", "P_e_H", "P_g_H_plus_H1", "P_e_H_plus_H1", "P_g_repaired", "P_e_repaired"});
        for (std::size_t i = 0; i < ref.t.size(); ++i) {
            t.add_row({ref.t[i], ref.p_g[i], ref.p_e[i], cd.p_g[i], cd.p_e[i], repaired.p_g[i], repaired.p_e[i]});
        }
        ctx.write_csv("populations.csv", t);
    }
    if (wants(r, "phase_tilde")) {
        CsvTable t({"t_ns", "phi_rad", "phi_tilde_rad"});
        for (std::size_t k : idx) t.add_row({g[k], p.phase(g[k]), rp.phase_tilde[k]});
        ctx.write_csv("phases.csv", t);
    }
    if (wants(r, "omega0_tilde")) {
        CsvTable t({"t_ns", "omega0_over_2pi_GHz", "omega0_tilde_over_2pi_GHz"});
        for (std::size_t k : idx) t.add_row({g[k], over_2pi(p.omega0(g[k])), over_2pi(rp.omega0_tilde[k])});
        ctx.write_csv("omega0_tilde.csv", t);
    }
    if (wants(r, "field")) {
        CsvTable t({"t_ns", "field_over_2pi_GHz", "field_tilde_over_2pi_GHz"});
        for (std::size_t k : idx) {
            t.add_row({g[k], over_2pi(2.0 * p.rabi(g[k]) * std::cos(p.phase(g[k]))), over_2pi(rp.field[k])});
        }
        ctx.write_csv("field.csv", t);
    }
    if (wants(r, "rabi_tilde")) {
        // Singular samples (cos(phi~) ~ 0) carry nan in the Rabi column.
        CsvTable t({"t_ns", "rabi_tilde_over_2pi_GHz", "singular"});
        for (std::size_t k : idx) t.add_row({g[k], over_2pi(rp.rabi_tilde[k]), rp.singular[k] ? 1.0 : 0.0});
        ctx.write_csv("rabi_tilde.csv", t);
    }

    double dev = 0.0, jump = 0.0, max_field = 0.0, max_omega = 0.0;
    bool finite = true;
    for (std::size_t k = 0; k < g.size(); ++k) {
        dev = std::max(dev, std::abs(rp.phase_tilde[k] - p.phase(g[k])));
        if (k > 0) jump = std::max(jump, std::abs(rp.phase_tilde[k] - rp.phase_tilde[k - 1]));
        finite = finite && std::isfinite(rp.field[k]);
        max_field = std::max(max_field, std::abs(rp.field[k]));
        max_omega = std::max(max_omega, std::abs(tot.decomposition.omega_tilde[k]));
    }
    ctx.at_least("P_g(tf) under H", ref.p_g.back(), 0.9);
    ctx.at_least("P_e(tf) under H + H1", cd.p_e.back(), 0.999);
    ctx.at_least("P_e(tf) under repaired field", repaired.p_e.back(), 0.999);
    ctx.check("max |phi~ - phi| (rad)", dev, "> 0.5", dev > 0.5);
    ctx.below("max jump of phi~ between samples (rad)", jump, kPi);
    const double rel = std::abs(max_field - max_omega) / max_omega;
    ctx.check("relative gap between max field and max |Omega~|", rel, "<= 1e-09", finite && rel <= 1e-9);
    ctx.check("singular Rabi samples", static_cast<double>(rp.singular_count()), ">= 1", rp.singular_count() >= 1);
    ctx.below("max norm error", std::max({ref.max_norm_error(), cd.max_norm_error(), repaired.max_norm_error()}),
              kNormTolerance);

    ctx.results() = {{"P_g_final_H", ref.p_g.back()},
                     {"P_e_final_H_plus_H1", cd.p_e.back()},
                     {"P_e_final_repaired", repaired.p_e.back()},
                     {"max_phase_deviation_rad", dev},
                     {"singular_samples", rp.singular_count()}};
}

inline void run_few(const ResolvedScenario& r, RunContext& ctx) {
    FewOscillationInputs in;
    in.omega_l = r["omega_l"];
    in.tf = r.tf;
    if (r.shaping) in.shaping = *r.shaping;
    in.alpha_mid = r["alpha_mid"];
    in.steps_per_period = r["steps_per_period"];
    if (!(in.steps_per_period >= kResolutionWarnStepsPerPeriod)) {
        throw ValidationError("steps_per_period must be at least 20");
    }
    const auto zeros = cos_phase_zeros(in.omega_l, in.tf);
    in.theta_degree = static_cast<int>(4 + zeros.size() + in.shaping.size()) - 1;
    const FewOscillationDesign d = design_few_oscillation(in);

    const TimeGrid g = r.grid();
    const auto idx = sample_indices(g.n_steps(), r.record_every);
    if (wants(r, "angles")) {
        CsvTable t({"t_ns", "theta_rad", "alpha_rad", "beta_rad"});
        for (std::size_t k : idx) {
            const double th = d.theta.ansatz(g[k]), al = d.alpha.ansatz(g[k]);
            t.add_row({g[k], th, al, al + d.phase.f(g[k])});
        }
        ctx.write_csv("theta_alpha.csv", t);
    }
    if (wants(r, "field")) {
        CsvTable t({"t_ns", "rabi_over_2pi_GHz", "detuning_over_2pi_GHz", "field_over_2pi_GHz"});
        for (std::size_t k : idx) {
            const double rabi = d.inverse.rabi(g[k]);
            t.add_row({g[k], over_2pi(rabi), over_2pi(d.inverse.detuning(g[k])),
                       over_2pi(2.0 * rabi * std::cos(d.phase.f(g[k])))});
        }
        ctx.write_csv("rabi_detuning.csv", t);
    }
    if (wants(r, "omega0")) {
        CsvTable t({"t_ns", "omega0_over_2pi_GHz"});
        for (std::size_t k : idx) t.add_row({g[k], over_2pi(d.inverse.omega0(g[k]))});
        ctx.write_csv("omega0.csv", t);
    }
    if (wants(r, "populations")) {
        // Sampled on the design's own verification grid.
        CsvTable t({"t_ns", "P_g", "P_e", "P_e_from_theta"});
        const PropagationResult& v = d.verification;
        for (std::size_t i = 0; i < v.t.size(); ++i) {
            const double s = std::sin(0.5 * d.theta.ansatz(v.t[i]));
            t.add_row({v.t[i], v.p_g[i], v.p_e[i], s * s});
        }
        ctx.write_csv("populations.csv", t);
    }
    ctx.write_json("design.json", design_to_json(d));

    const auto& dg = d.diagnostics;
    ctx.below("theta constraint residual", dg.theta_max_residual, 1e-9);
    ctx.below("alpha constraint residual", dg.alpha_max_residual, 1e-9);
    bool finite = true;
    for (double x : d.inverse.rabi_samples) finite = finite && std::isfinite(x);
    ctx.check("Rabi frequency finite on the grid", finite ? 1.0 : 0.0, "== 1", finite);
    ctx.at_least("P_e(tf)", dg.final_excited_population, 0.999);
    ctx.below("|omega0(0)| (rad/ns)", std::abs(dg.omega0_start), 1e-6);
    ctx.below("|omega0(tf)| (rad/ns)", std::abs(dg.omega0_end), 1e-6);
    ctx.check("omega0 changes sign", dg.omega0_changes_sign ? 1.0 : 0.0, "== 1", dg.omega0_changes_sign);
    ctx.results() = {{"theta_constraints", d.theta_constraints.size()},
                     {"alpha_constraints", d.alpha_constraints.size()},
                     {"P_e_final", dg.final_excited_population},
                     {"rabi_max_over_2pi_GHz", over_2pi(dg.rabi_max)},
                     {"verification_steps", dg.verification_steps}};
}

inline CsvTable many_populations(const ChirpGaussParams& prm, const TimeGrid& g, std::size_t every,
                                 InversionEvaluation& exact, InversionEvaluation& rwa) {
    const PulseSpec p = chirp_gauss_pulse(prm);
    PropagationOptions po;
    po.record_every = every;
    const PropagationResult re = propagate(h_interaction(p), StateVector::ground(), g, po);
    const PropagationResult rr = propagate(h_rwa(p), StateVector::ground(), g, po);
    CsvTable t({"t_ns", "P_g_exact", "P_e_exact", "P_g_rwa", "P_e_rwa"});
    for (std::size_t i = 0; i < re.t.size(); ++i) t.add_row({re.t[i], re.p_g[i], re.p_e[i], rr.p_g[i], rr.p_e[i]});
    auto score = [](const PropagationResult& res) {
        InversionEvaluation e;
        e.p_e = res.p_e.back();
        e.theta_f = theta_from_population(e.p_e);
        e.objective = objective_from_theta(e.theta_f);
        e.norm_error = res.max_norm_error();
        return e;
    };
    exact = score(re);
    rwa = score(rr);
    return t;
}

inline nlohmann::json chirp_json(const ChirpGaussParams& p) {
    return {{"a_rad_per_ns2", p.a},
            {"a_over_2pi_sq_GHz2", p.a / (kTwoPi * kTwoPi)},
            {"omega_0_rad_per_ns", p.omega_0_rabi},
            {"omega_0_over_2pi_GHz", over_2pi(p.omega_0_rabi)},
            {"big_a_rad2_per_ns2", p.big_a},
            {"tf_ns", p.tf},
            {"omega_atom_rad_per_ns", p.omega_atom}};
}

inline nlohmann::json evaluation_json(const InversionEvaluation& e) {
    return {{"P_e_final", e.p_e}, {"theta_final_rad", e.theta_f}, {"objective", e.objective}};
}

inline void run_many(const ResolvedScenario& r, RunContext& ctx) {
    ChirpGaussParams prm;
    prm.a = r["a"];
    prm.omega_0_rabi = r["omega_0"];
    prm.big_a = r["big_a"];
    prm.tf = r.tf;
    prm.omega_atom = r["omega_atom"];
    validate(prm);
    const TimeGrid g = r.grid();
    InversionEvaluation ex, rw;

    if (r.options.at("mode") == "evaluate") {
        const CsvTable t = many_populations(prm, g, r.record_every, ex, rw);
        if (wants(r, "populations")) ctx.write_csv("populations.csv", t);
        ctx.results() = {{"parameters", chirp_json(prm)}, {"exact", evaluation_json(ex)}, {"rwa", evaluation_json(rw)}};
        ctx.below("max norm error", std::max(ex.norm_error, rw.norm_error), kNormTolerance);
        return;
    }

    const double budget = r["budget"];
    if (!(budget >= 1.0) || budget != std::floor(budget)) throw ValidationError("budget must be a positive integer");
    OptimizeOptions oo;
    oo.target = r["target"];
    if (wants(r, "trace")) oo.checkpoint_csv = ctx.out_dir() / "trace.csv";
    const OptimizationResult opt = optimize_inversion(prm, g, static_cast<std::size_t>(budget), oo);
    if (wants(r, "trace")) ctx.note_file("trace.csv", opt.trace.evaluations);

    InversionEvaluation ex_opt, rw_opt;
    const CsvTable seed_t = many_populations(prm, g, r.record_every, ex, rw);
    const CsvTable opt_t = many_populations(opt.best, g, r.record_every, ex_opt, rw_opt);
    if (wants(r, "populations")) {
        ctx.write_csv("populations_seed.csv", seed_t);
        ctx.write_csv("populations_opt.csv", opt_t);
    }
    const nlohmann::json summary = {{"seed", chirp_json(prm)},
                                    {"best", chirp_json(opt.best)},
                                    {"evaluations", opt.trace.evaluations},
                                    {"converged", opt.trace.converged},
                                    {"best_objective", opt.trace.best.objective},
                                    {"target", oo.target},
                                    {"seed_exact", evaluation_json(ex)},
                                    {"seed_rwa", evaluation_json(rw)},
                                    {"best_exact", evaluation_json(ex_opt)},
                                    {"best_rwa", evaluation_json(rw_opt)}};
    ctx.write_json("optimization.json", summary);
    ctx.results() = summary;
    ctx.below("best objective", opt.trace.best.objective, oo.target);
}

inline void run_custom(const ResolvedScenario& r, RunContext& ctx) {
    const double rabi = r["rabi"], wl = r["omega_l"], w0 = r["omega0"], ph0 = r["phase0"];
    PulseSpec p;
    p.rabi = [rabi](double) { return rabi; };
    p.rabi_rate = [](double) { return 0.0; };
    p.phase = [wl, ph0](double t) { return wl * t + ph0; };
    p.phase_rate = [wl](double) { return wl; };
    p.phase_accel = [](double) { return 0.0; };
    p.omega0 = [w0](double) { return w0; };
    p.omega0_rate = [](double) { return 0.0; };
    PropagationOptions po;
    po.record_every = r.record_every;
    const Hamiltonian2x2 h = r.options.at("model") == "rwa" ? h_rwa(p) : h_interaction(p);
    const PropagationResult res = propagate(h, StateVector::ground(), r.grid(), po);
    if (wants(r, "populations")) {
        CsvTable t({"t_ns", "P_g", "P_e"});
        for (std::size_t i = 0; i < res.t.size(); ++i) t.add_row({res.t[i], res.p_g[i], res.p_e[i]});
        ctx.write_csv("populations.csv", t);
    }
    ctx.results() = {{"P_e_final", res.p_e.back()}};
    ctx.below("max norm error", res.max_norm_error(), kNormTolerance);
}

inline nlohmann::json resolved_json(const ResolvedScenario& r) {
    nlohmann::json j = {{"values", r.values}, {"options", r.options}};
    if (r.shaping) {
        nlohmann::json s = nlohmann::json::array();
        for (const auto& [t, v] : *r.shaping) s.push_back({t, v});
        j["shaping"] = s;
    }
    return j;
}

}  // namespace detail

struct RunRequest {
    std::string config_path;
    std::optional<std::filesystem::path> out_dir;  // default: $PULSE_OUT_DIR/<stem>, else out/<stem>
    std::optional<long long> steps;                // overrides grid.n_steps
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;  // names the failing stage on error
    std::filesystem::path out_dir;
    nlohmann::json manifest;
};

inline std::filesystem::path default_out_dir(const std::string& config_path) {
    const std::string stem = std::filesystem::path(config_path).stem().string();
    if (const char* env = std::getenv("PULSE_OUT_DIR"); env && *env) return std::filesystem::path(env) / stem;
    return std::filesystem::path("out") / stem;
}

/// Loads, validates and executes one scenario. Never throws.
inline RunOutcome run(const RunRequest& req) {
    RunOutcome out;
    std::string stage = "config";
    try {
        ScenarioConfig cfg = load_scenario_file(req.config_path);
        if (req.steps) cfg.grid.n_steps = *req.steps;
        stage = "validation";
        const auto [report, resolved] = resolve_scenario(cfg);
        if (!resolved) {
            out.exit_code = kExitInvalid;
            out.message = "validation failed:\n" + report.summary();
            return out;
        }
        const ResolvedScenario& r = *resolved;

        stage = "output";
        out.out_dir = req.out_dir ? *req.out_dir : default_out_dir(req.config_path);
        std::filesystem::create_directories(out.out_dir);
        RunContext ctx(out.out_dir);

        const auto& info = scenario_info(r.scenario);
        stage = info.name;
        const auto start = std::chrono::steady_clock::now();
        switch (r.scenario) {
            case ScenarioKind::CdAllenEberly: detail::run_cd(r, ctx); break;
            case ScenarioKind::InvariantFew: detail::run_few(r, ctx); break;
            case ScenarioKind::InvariantMany: detail::run_many(r, ctx); break;
            case ScenarioKind::PropagateCustom: detail::run_custom(r, ctx); break;
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        nlohmann::json checks = nlohmann::json::array();
        bool all_pass = true;
        for (const Check& c : ctx.checks()) {
            checks.push_back({{"name", c.name}, {"value", c.value}, {"require", c.relation}, {"pass", c.pass}});
            all_pass = all_pass && c.pass;
        }
        out.manifest = {{"tool", "tlspulse"},
                        {"version", kToolVersion},
                        {"scenario", info.name},
                        {"config", req.config_path},
                        {"comment", cfg.comment},
                        {"parameters", detail::resolved_json(r)},
                        {"grid",
                         {{"t_start_ns", r.t_start},
                          {"tf_ns", r.tf},
                          {"n_steps", r.n_steps},
                          {"dt_ns", (r.tf - r.t_start) / static_cast<double>(r.n_steps)},
                          {"record_every", r.record_every}}},
                        {"warnings", report.warnings},
                        {"wall_time_s", wall},
                        {"outputs", ctx.files()},
                        {"results", ctx.results()},
                        {"checks", checks},
                        {"all_checks_pass", all_pass}};
        stage = "manifest";
        std::ofstream f(out.out_dir / "manifest.json");
        f << out.manifest.dump(2) << '\n';
        if (!f) throw Error("cannot write manifest.json");
        out.message = all_pass ? "ok" : "completed; some checks failed";
    } catch (const NumericalError& e) {
        out.exit_code = kExitNumerical;
        out.message = stage + ": numerical failure: " + e.what();
    } catch (const ValidationError& e) {
        out.exit_code = kExitInvalid;
        out.message = stage + ": invalid input: " + e.what();
    } catch (const std::exception& e) {
        out.exit_code = kExitFailure;
        out.message = stage + ": " + e.what();
    }
    return out;
}

/// Human-readable table of scenarios, their parameters and defaults.
inline std::string list_scenarios() {
    std::ostringstream os;
    for (const auto& s : scenario_catalog()) {
        os << s.name << "\n  " << s.summary << "\n";
        if (!s.example_config.empty()) os << "  example: " << s.example_config << "\n";
        for (const auto& p : s.parameters) {
            os << "  " << p.key << " [" << to_string(p.dimension) << "] " << p.description;
            if (p.default_value) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%g", *p.default_value);
                os << " (default " << buf << ")";
            } else {
                os << " (required)";
            }
            os << "\n";
        }
        for (const auto& o : s.options) {
            os << "  " << o.key << " {";
            for (std::size_t i = 0; i < o.allowed.size(); ++i) os << (i ? "|" : "") << o.allowed[i];
            os << "} " << o.description << " (default " << o.allowed.front() << ")\n";
        }
        os << "  outputs:";
        for (const auto& o : s.outputs) os << " " << o;
        os << "\n";
    }
    return os.str();
}

}  // namespace tlspulse
