#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "quotus/pipeline.hpp"

namespace {

constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

}  // namespace

int main(int argc, char** argv) {
    using namespace quotus;

    CLI::App app{"Track presidential quotes through news coverage and model who cites what."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string workdir;
    app.add_option("--config", config_path, "Pipeline config file (JSON)")->required();
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--workdir", workdir, "Override the artifact directory");

    std::vector<pipeline::Stage> stages;
    for (auto s : pipeline::all_stages()) {
        auto* sub = app.add_subcommand(std::string(pipeline::stage_name(s)),
                                       "Run the " + std::string(pipeline::stage_name(s)) + " stage");
        sub->callback([&stages, s] { stages = {s}; });
    }
    app.add_subcommand("all", "Run every stage in order")->callback([&stages] { stages = pipeline::all_stages(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidationError;
    }

    Diagnostics diag;
    auto flush = [&diag] {
        for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
        diag.warnings.clear();
    };
    try {
        auto cfg = pipeline::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!workdir.empty()) cfg.workdir = workdir;
        for (auto s : stages) {
            pipeline::run_stage(s, cfg, diag);
            flush();
        }
    } catch (const InputError& e) {
        flush();
        std::cerr << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception& e) {
        flush();
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
