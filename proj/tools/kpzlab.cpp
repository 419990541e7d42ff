#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "kpz/config.hpp"
#include "kpz/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"kpzlab: renormalized coupled KPZ experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;

    const std::map<std::string, std::string> help{
        {"renorm", "renormalization constants m1, m2, m3"},
        {"simulate", "one trajectory of the regularized equation"},
        {"convergence", "cutoff sweep on one coupled noise family"},
        {"rg-flow", "effective potentials and reconstruction"},
        {"verify", "numerical check batteries"},
    };
    for (const auto& name : kpz::subcommand_names()) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config_path, "INI run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (must not exist)");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "seed override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kpz::kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommand(name);
    kpz::RunOptions opt;
    if (sub->count("--out")) opt.out_dir = out_dir;
    if (sub->count("--jobs")) opt.jobs = jobs;
    if (sub->count("--seed")) opt.seed = seed;

    kpz::RunConfig cfg;
    try {
        cfg = kpz::load_config(config_path);
    } catch (const kpz::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kpz::kExitConfig;
    }
    if (!cfg.subcommand.empty() && cfg.subcommand != name) {
        std::cerr << "config error: run.subcommand is '" << cfg.subcommand << "' but '" << name
                  << "' was requested\n";
        return kpz::kExitConfig;
    }
    cfg.subcommand = name;
    return kpz::run(cfg, opt, std::cerr);
}
