#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lpsim/commands.hpp"
#include "lpsim/errors.hpp"

namespace {

struct SharedArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void add_shared(CLI::App* cmd, SharedArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the run config JSON")->required();
    cmd->add_option("--out", args.out_dir, "Override the output directory");
    cmd->add_option("--seed", args.seed, "Override the synthetic-latent seed");
    cmd->add_flag("--quiet", args.quiet, "Suppress stdout summary and warnings");
}

lpsim::RunConfig load_with_overrides(const SharedArgs& args) {
    lpsim::RunConfig cfg = lpsim::load_run_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    if (args.seed.has_value()) cfg.denoiser.seed = *args.seed;
    return cfg;
}

void emit(const nlohmann::json& summary, bool quiet) {
    if (!quiet) {
        std::printf("%s\n", summary.dump(2).c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent-partitioned diffusion serving simulator"};
    app.require_subcommand(1);

    SharedArgs simulate_args, compare_args, cost_args, completeness_args, plan_args;
    int plan_step = 1;
    std::string schedule = "rotating";
    int max_steps = 8;

    CLI::App* simulate = app.add_subcommand("simulate", "Run the multi-worker loop and meter every transfer");
    add_shared(simulate, simulate_args);

    CLI::App* compare = app.add_subcommand("compare", "Run the cluster and the single-context loop on one seed");
    add_shared(compare, compare_args);

    CLI::App* cost = app.add_subcommand("cost", "Evaluate the analytic communication models");
    add_shared(cost, cost_args);

    CLI::App* completeness = app.add_subcommand("completeness", "Receptive-field coverage analysis");
    add_shared(completeness, completeness_args);
    completeness->add_option("--schedule", schedule, "rotating | temporal | height | width")
        ->check(CLI::IsMember({"rotating", "temporal", "height", "width"}));
    completeness->add_option("--max-steps", max_steps, "Propagation step budget")->check(CLI::PositiveNumber);

    CLI::App* plan = app.add_subcommand("partition-plan", "Dump the partition of one denoising step");
    add_shared(plan, plan_args);
    plan->add_option("--step", plan_step, "Denoising step index (1-based)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const SharedArgs* args = nullptr;
    if (simulate->parsed()) args = &simulate_args;
    else if (compare->parsed()) args = &compare_args;
    else if (cost->parsed()) args = &cost_args;
    else if (completeness->parsed()) args = &completeness_args;
    else args = &plan_args;

    if (args->quiet) {
        lpsim::set_warning_handler(nullptr);
    }

    try {
        const lpsim::RunConfig cfg = load_with_overrides(*args);
        nlohmann::json summary;
        if (simulate->parsed()) {
            summary = lpsim::simulate_run(cfg);
        } else if (compare->parsed()) {
            summary = lpsim::compare_run(cfg);
        } else if (cost->parsed()) {
            summary = lpsim::cost_run(cfg);
        } else if (completeness->parsed()) {
            summary = lpsim::completeness_run(cfg, schedule, max_steps);
        } else {
            summary = lpsim::partition_plan_run(cfg, plan_step);
        }
        emit(summary, args->quiet);
        return 0;
    } catch (const lpsim::Error& e) {
        std::fprintf(stderr, "lpsim: error: %s\n", e.what());
        return e.kind() == lpsim::ErrorKind::Config ? 2 : 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lpsim: error: %s\n", e.what());
        return 3;
    }
}
