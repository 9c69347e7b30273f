#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "sconcave/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::int64_t seed = -1;
    std::string out_dir;
};

void attach_options(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "experiment configuration (JSON)")
        ->required();
    sub->add_option("--seed", args.seed, "replace the configured seed list with one seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", args.out_dir, "directory for report.csv and summary.json");
}

int run_subcommand(const char* name, sconcave::harness::Command command,
                   const CommonArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) {
        std::fprintf(stderr, "cannot open config file \"%s\"\n",
                     args.config_path.c_str());
        return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();

    auto loaded = sconcave::harness::load_config(text.str());
    if (loaded.ok() && loaded.config.command != command)
        loaded.violations.push_back(std::string("config is for another command; run it "
                                                "through the subcommand named in its "
                                                "\"command\" key, not \"") +
                                    name + "\"");
    if (!loaded.ok()) {
        for (const std::string& v : loaded.violations)
            std::fprintf(stderr, "%s\n", v.c_str());
        return 2;
    }

    if (args.seed >= 0)
        loaded.config.seeds = {static_cast<std::uint64_t>(args.seed)};
    if (!args.out_dir.empty()) loaded.config.out_dir = args.out_dir;

    try {
        return sconcave::harness::run(loaded.config).exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"s-concave distribution geometry: verification and learning runs"};
    app.require_subcommand(1);

    using sconcave::harness::Command;
    struct Sub {
        const char* name;
        const char* help;
        Command command;
        CommonArgs args;
        CLI::App* sub = nullptr;
    };
    Sub subs[] = {
        {"verify-geometry", "Monte Carlo checks of the distribution-geometry bounds",
         Command::verify_geometry, {}, nullptr},
        {"run-al", "margin-based active learning of a halfspace",
         Command::run_al, {}, nullptr},
        {"run-baum", "two-halfspace intersection learner",
         Command::run_baum, {}, nullptr},
        {"estimate-coefficient", "Monte Carlo disagreement-coefficient estimate",
         Command::estimate_coefficient, {}, nullptr},
    };
    for (Sub& s : subs) {
        s.sub = app.add_subcommand(s.name, s.help);
        attach_options(s.sub, s.args);
    }

    CLI11_PARSE(app, argc, argv);

    for (const Sub& s : subs)
        if (s.sub->parsed()) return run_subcommand(s.name, s.command, s.args);
    return 2;  // unreachable: a subcommand is required
}
