#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "bsim/scenario.hpp"

// Exit codes: 0 success, 2 validation error, 3 runtime error. Errors go to
// stderr as one "error: <category>: <detail>" line each.
int main(int argc, char** argv) {
    CLI::App app{"bsim: bond-tuned Duffing resonator scenario runner"};
    app.require_subcommand(1);

    std::string file;
    std::string out_override;
    std::uint64_t seed_override = 0;
    int workers_override = 0;
    bool have_seed = false;

    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("file", file, "scenario JSON file")->required();
    run->add_option("--out", out_override, "override the output directory");
    run->add_option("--seed", seed_override, "override the scenario seed")
        ->each([&](const std::string&) { have_seed = true; });
    run->add_option("--workers", workers_override, "override the worker count");

    std::string vfile;
    auto* validate = app.add_subcommand("validate", "check a scenario file without running it");
    validate->add_option("file", vfile, "scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            const auto report = bsim::scenario::validate_file(vfile);
            for (const auto& w : report.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            if (!report.ok) {
                for (const auto& e : report.errors)
                    std::fprintf(stderr, "error: validation: %s\n", e.c_str());
                return 2;
            }
            std::printf("ok\n%s\n", report.resolved.dump(2).c_str());
            return 0;
        }

        bsim::scenario::Overrides ov;
        if (!out_override.empty()) ov.output_dir = out_override;
        if (have_seed) ov.seed = seed_override;
        if (workers_override > 0) ov.workers = workers_override;
        bsim::scenario::run_file(file, ov);
        return 0;
    } catch (const bsim::scenario::ValidationError& e) {
        for (const auto& issue : e.issues)
            std::fprintf(stderr, "error: validation: %s\n", issue.c_str());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: runtime: %s\n", e.what());
        return 3;
    }
}
