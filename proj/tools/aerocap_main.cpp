#include "aerocap/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    using namespace aerocap::cli;

    CLI::App app{"Multi-UAV aerial target capture simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    run_cmd->add_option("--config", run.config, "Scenario config (YAML)")->required();
    run_cmd->add_option("--seed", run.seed, "Override the config seed");
    run_cmd->add_option("--out", run.out_dir, "Output directory")->capture_default_str();

    MonteCarloArgs mc;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo batch over consecutive seeds");
    mc_cmd->add_option("--config", mc.config, "Scenario config (YAML)")->required();
    mc_cmd->add_option("--runs", mc.runs, "Number of runs")->required();
    mc_cmd->add_option("--seed-base", mc.seed_base, "First seed")->capture_default_str();
    mc_cmd->add_option("--out", mc.out_dir, "Output directory")->capture_default_str();
    mc_cmd->add_option("--threads", mc.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plot", "Render a figure from a run log");
    plot_cmd->add_option("--kind", plot.kind, "depth_profile | trajectory_3d | pixel_error | phase_timeline")->required();
    plot_cmd->add_option("--log", plot.log, "Run log (log.ndjson)")->required();
    plot_cmd->add_option("--out", plot.out, "Output SVG path")->required();

    std::string check_config;
    auto* check_cmd = app.add_subcommand("check", "Validate a scenario config");
    check_cmd->add_option("--config", check_config, "Scenario config (YAML)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kUsage;
    }

    if (*run_cmd) return cmd_run(run);
    if (*mc_cmd) return cmd_montecarlo(mc);
    if (*plot_cmd) return cmd_plot(plot);
    if (*check_cmd) return cmd_check(check_config);
    return kUsage;
}
