// horizon-calc: verify | simulate | optimize | gallery

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> periods;
    std::string out = ".";
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--paths", f.paths, "Monte Carlo paths (verify: scenarios)")->check(CLI::PositiveNumber);
    cmd->add_option("--steps", f.steps, "Grid steps per unit time (verify: grid steps)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--periods", f.periods, "Keep only the first n periods")->check(CLI::PositiveNumber);
}

hcalc::cli::RunConfig resolve(const Flags& f, const std::string& sub) {
    using namespace hcalc::cli;
    RunConfig rc = f.config.empty() ? RunConfig{} : parse_config(f.config);
    if (f.seed) rc.simulation.seed = rc.verify.seed = *f.seed;
    if (sub == "verify") {
        if (f.paths) rc.verify.n_scenarios = *f.paths;
        if (f.steps) rc.verify.n_steps = *f.steps;
    } else {
        if (f.paths) rc.simulation.paths = *f.paths;
        if (f.steps) rc.simulation.steps = *f.steps;
    }
    if (f.periods) {
        if (*f.periods > rc.a.size())
            throw ConfigError({"--periods " + std::to_string(*f.periods) + " exceeds the " +
                               std::to_string(rc.a.size()) + " configured periods"});
        rc.a.resize(*f.periods);
        rc.sigma.resize(std::min(rc.sigma.size(), *f.periods));
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace hcalc::cli;
    CLI::App app{"Calculus on random-horizon sets and the sudden-stop market"};
    app.require_subcommand(1);
    Flags flags;
    const char* names[] = {"verify", "simulate", "optimize", "gallery"};
    const char* help[] = {"Run the identity suite and the gallery", "Simulate stock, wealth and strategy paths",
                          "Compare the closed-form fraction with a grid-search oracle",
                          "Run the counterexample gallery"};
    for (int i = 0; i < 4; ++i) add_flags(app.add_subcommand(names[i], help[i]), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    RunContext ctx;
    ctx.subcommand = sub;
    ctx.out_dir = flags.out;
    try {
        ctx.config = resolve(flags, sub);
        std::filesystem::create_directories(ctx.out_dir);
        if (sub == "verify") return run_verify(ctx, std::cout);
        if (sub == "simulate") return run_simulate(ctx, std::cout);
        if (sub == "optimize") return run_optimize(ctx, std::cout);
        return run_gallery(ctx, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const hcalc::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}
