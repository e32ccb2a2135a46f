#include "tlspulse/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Two-level pulse design and propagation"};
    app.set_version_flag("--version", std::string(tlspulse::kToolVersion));
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    long long steps = 0;
    auto* run = app.add_subcommand("run", "run the scenario described by a JSON config");
    run->add_option("config", config, "scenario config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (default: $PULSE_OUT_DIR/<config stem> or out/<config stem>)");
    run->add_option("--steps", steps, "override grid.n_steps")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config, "scenario config (JSON)")->required();

    app.add_subcommand("list", "list scenarios, parameters and defaults");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand("list")) {
        std::cout << tlspulse::list_scenarios();
        return tlspulse::kExitOk;
    }

    if (app.got_subcommand("validate")) {
        try {
            const auto report = tlspulse::validate_scenario(tlspulse::load_scenario_file(config));
            std::cout << report.summary() << (report.ok() ? "ok\n" : "invalid\n");
            return report.ok() ? tlspulse::kExitOk : tlspulse::kExitInvalid;
        } catch (const tlspulse::ValidationError& e) {
            std::cerr << e.what() << "\n";
            if (std::string_view(e.what()).find("unknown scenario") != std::string_view::npos) {
                std::cerr << tlspulse::list_scenarios();
            }
            return tlspulse::kExitInvalid;
        }
    }

    tlspulse::RunRequest req;
    req.config_path = config;
    if (!out_dir.empty()) req.out_dir = out_dir;
    if (steps > 0) req.steps = steps;
    const tlspulse::RunOutcome res = tlspulse::run(req);
    if (res.exit_code != tlspulse::kExitOk) {
        std::cerr << res.message << "\n";
        if (res.message.find("unknown scenario") != std::string::npos) std::cerr << tlspulse::list_scenarios();
        return res.exit_code;
    }
    for (const auto& c : res.manifest["checks"]) {
        std::cout << (c["pass"].get<bool>() ? "pass  " : "FAIL  ") << c["name"].get<std::string>() << " = "
                  << c["value"].get<double>() << " (" << c["require"].get<std::string>() << ")\n";
    }
    std::cout << "wrote " << (res.out_dir / "manifest.json").string() << "\n";
    return tlspulse::kExitOk;
}
