#include <CLI11.hpp>
#include <iostream>

#include "cmrs/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Conditional mean risk sharing allocations via Laplace inversion"};
    app.require_subcommand(1);

    cmrs::CliOptions options;
    std::uint64_t seed = 0;
    int order = 0;

    const auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", options.config_path, "JSON run configuration")->required();
        sub->add_option("--out", options.out_path, "output path (overrides output.csv)");
        sub->add_option("--threads", options.threads, "worker threads, 0 for hardware parallelism")
            ->check(CLI::NonNegativeNumber);
        if (with_seed) sub->add_option("--seed", seed, "Monte Carlo seed (overrides verify.seed)");
    };
    auto* allocate = app.add_subcommand("allocate", "compute allocations on the configured grid");
    add_common(allocate, false);
    auto* diagnose = app.add_subcommand("diagnose", "transform residuals, budget residuals and fade points");
    add_common(diagnose, false);
    auto* verify = app.add_subcommand("verify", "compare against closed-form or Monte Carlo references");
    add_common(verify, true);
    auto* bench = app.add_subcommand("bench", "time allocation on the common-shock benchmark portfolio");
    add_common(bench, false);
    auto* weights = app.add_subcommand("weights", "print exact Gaver-Stehfest weights");
    weights->add_option("M", order, "Gaver-Stehfest order")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << '\n';
        return cmrs::kExitError;
    }

    if (verify->parsed() && verify->count("--seed")) options.seed = seed;
    if (allocate->parsed()) return cmrs::cmd_allocate(options, std::cout, std::cerr);
    if (diagnose->parsed()) return cmrs::cmd_diagnose(options, std::cout, std::cerr);
    if (verify->parsed()) return cmrs::cmd_verify(options, std::cout, std::cerr);
    if (bench->parsed()) return cmrs::cmd_bench(options, std::cout, std::cerr);
    return cmrs::cmd_weights(order, std::cout, std::cerr);
}
