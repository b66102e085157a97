// chaoscomm <subcommand> [--config <file>] [--out <dir>] [--seed <int>] [--set key=value]... [--defaults]
//
// Exit status: 0 all verdicts pass, 1 a verdict failed, 2 usage or config
// error, 3 runtime failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chaoscomm/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char **argv) {
    using namespace chaoscomm;

    CLI::App app{"Chaos-based secure communication simulator and attack bench"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    std::vector<std::string> sets;
    bool show_defaults = false;
    for (const auto &name : experiment_names()) {
        auto *sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed override")->check(CLI::NonNegativeNumber);
        sub->add_option("--set", sets, "override one key (key=value)");
        sub->add_flag("--defaults", show_defaults, "print the accepted keys with their defaults and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();
    if (show_defaults) {
        for (const auto &[key, value] : experiment_defaults(experiment)) std::cout << key << " = " << value << '\n';
        return kExitPass;
    }

    ExperimentConfig cfg;
    try {
        std::string text = "experiment = " + experiment + "\n";
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            text = buf.str();
        }
        cfg = parse_config(text);
        if (cfg.experiment != experiment) {
            std::cerr << "config experiment '" << cfg.experiment << "' does not match subcommand '" << experiment
                      << "'\n";
            return kExitUsage;
        }
        std::vector<std::string> overrides = sets;
        if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
        if (!out_dir.empty()) overrides.push_back("output_dir=" + out_dir);
        apply_overrides(cfg, overrides);
    } catch (const ConfigError &e) {
        for (const auto &p : e.problems()) std::cerr << "config error: " << p << '\n';
        return kExitUsage;
    }

    try {
        const RunReport report = run_experiment(cfg);
        write_summary(std::cout, report);
        std::cout << "wall_seconds = " << report.wall_seconds << '\n';
        return report.all_pass() ? kExitPass : kExitFail;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
