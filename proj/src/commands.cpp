#include "lpsim/commands.hpp"

#include <filesystem>
#include <sstream>

#include "lpsim/errors.hpp"
#include "lpsim/io.hpp"

namespace lpsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string prepare_output_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output.dir, ec);
    if (ec) {
        fail(ErrorKind::Io, "cannot create output directory '" + cfg.output.dir + "': " + ec.message());
    }
    return cfg.output.dir;
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

json config_echo(const RunConfig& cfg) {
    return {
        {"latent", {cfg.latent.c, cfg.latent.t, cfg.latent.h, cfg.latent.w}},
        {"latent_dtype_bytes", dtype_bytes(cfg.latent_dtype)},
        {"patch", {cfg.patch.p_t, cfg.patch.p_h, cfg.patch.p_w}},
        {"steps", cfg.sampler.total_steps},
        {"K", cfg.workers},
        {"r", cfg.overlap_ratio},
        {"denoiser", cfg.denoiser.kind},
        {"seed", cfg.denoiser.seed},
        {"preset", cfg.preset.name},
        {"preset_dtype_bytes", cfg.preset.dtype_bytes},
    };
}

}  // namespace

json simulate_run(const RunConfig& cfg) {
    const std::string dir = prepare_output_dir(cfg);
    const std::unique_ptr<Denoiser> denoiser = make_denoiser(cfg.denoiser);
    const SyntheticInputs inputs = synthetic_inputs(cfg.latent, cfg.latent_dtype, cfg.denoiser.seed);

    const LpRunResult result = run_lp(*denoiser, inputs.latent, cfg.sampler, inputs.cond, cfg.cluster_config());
    const bool formula_check = result.ledger.grand_total() == cost_lp_exact(cfg.cost_inputs());

    json summary = ledger_summary_json(result.ledger);
    summary["command"] = "simulate";
    summary["config"] = config_echo(cfg);
    summary["total_bytes"] = result.ledger.grand_total();
    summary["formula_check"] = formula_check;
    summary["files"] = json::array();

    if (cfg.output.bin) {
        write_latent_dump(join(dir, "z0.bin"), result.final_latent);
        summary["files"].push_back("z0.bin");
    }
    if (cfg.output.csv) {
        write_text_file(join(dir, "ledger.csv"), ledger_csv(result.ledger));
        summary["files"].push_back("ledger.csv");
    }
    if (cfg.output.json) {
        summary["files"].push_back("summary.json");
        write_json_file(join(dir, "summary.json"), summary);
    }
    return summary;
}

json compare_run(const RunConfig& cfg) {
    const std::string dir = prepare_output_dir(cfg);
    const std::unique_ptr<Denoiser> denoiser = make_denoiser(cfg.denoiser);
    const SyntheticInputs inputs = synthetic_inputs(cfg.latent, cfg.latent_dtype, cfg.denoiser.seed);

    const LpRunResult lp = run_lp(*denoiser, inputs.latent, cfg.sampler, inputs.cond, cfg.cluster_config());
    const DenoiseResult central = run_centralized(*denoiser, inputs.latent, cfg.sampler, inputs.cond);

    std::ostringstream diff_csv;
    diff_csv << "step,max_abs_diff,rms_diff\n";
    for (size_t i = 0; i < lp.trace.size(); ++i) {
        diff_csv << (i + 1) << ',' << max_abs_diff(lp.trace[i], central.trace[i]) << ','
                 << rms_diff(lp.trace[i], central.trace[i]) << '\n';
    }

    // Baseline volumes at matching settings; the emulations move no data for
    // a single worker.
    const CommLedger nmp =
        run_nmp_emulation(cfg.workers, cfg.latent, cfg.sampler, cfg.cluster_config());
    const CommLedger pp = run_pp_emulation(cfg.workers, cfg.latent, cfg.sampler, cfg.cluster_config());

    json summary = {
        {"command", "compare"},
        {"config", config_echo(cfg)},
        {"final_max_abs_diff", max_abs_diff(lp.final_latent, central.final_latent)},
        {"final_rms_diff", rms_diff(lp.final_latent, central.final_latent)},
        {"comm",
         {{"lp_total", lp.ledger.grand_total()},
          {"nmp_total", nmp.grand_total()},
          {"pp_total", pp.grand_total()}}},
        {"files", json::array()},
    };

    if (cfg.output.csv) {
        write_text_file(join(dir, "diff.csv"), diff_csv.str());
        summary["files"].push_back("diff.csv");
    }
    if (cfg.output.json) {
        summary["files"].push_back("compare.json");
        write_json_file(join(dir, "compare.json"), summary);
    }
    return summary;
}

json cost_run(const RunConfig& cfg) {
    const std::string dir = prepare_output_dir(cfg);
    const CostInputs inputs = cfg.cost_inputs();
    const CostReport report = cost_report(inputs);

    json summary = cost_report_json(report);
    summary["command"] = "cost";
    summary["config"] = config_echo(cfg);

    if (cfg.output.csv) {
        write_text_file(join(dir, "cost.csv"), cost_report_csv(inputs, report));
    }
    if (cfg.output.json) {
        write_json_file(join(dir, "cost.json"), summary);
    }
    return summary;
}

json completeness_run(const RunConfig& cfg, const std::string& schedule_name, int max_steps) {
    const std::string dir = prepare_output_dir(cfg);
    GridDims grid;
    grid.nt = patch_count(cfg.latent, cfg.patch, Axis::Temporal);
    grid.nh = patch_count(cfg.latent, cfg.patch, Axis::Height);
    grid.nw = patch_count(cfg.latent, cfg.patch, Axis::Width);

    std::vector<Axis> schedule;
    if (schedule_name == "rotating") {
        schedule = rotating_schedule(max_steps);
    } else {
        const std::optional<Axis> axis = axis_from_name(schedule_name);
        if (!axis.has_value()) {
            fail(ErrorKind::Config, "unknown schedule '" + schedule_name + "'");
        }
        schedule = constant_schedule(*axis, max_steps);
    }

    const CompletenessResult result = verify_n_complete(grid, cfg.workers, cfg.overlap_ratio, schedule, max_steps);

    json schedule_names = json::array();
    for (Axis a : schedule) schedule_names.push_back(axis_name(a));

    json summary = {
        {"command", "completeness"},
        {"grid", {grid.nt, grid.nh, grid.nw}},
        {"K", cfg.workers},
        {"r", cfg.overlap_ratio},
        {"schedule", schedule_names},
        {"complete_at", result.complete ? json(result.complete_at) : json(nullptr)},
        {"worst_position", {result.worst.t, result.worst.h, result.worst.w}},
    };

    if (cfg.output.csv) {
        std::ostringstream cov;
        cov << "step,min_reached,mean_reached,max_reached,complete_positions,total_positions\n";
        ReachabilitySet reach = ReachabilitySet::initial(grid);
        for (int step = 1; step <= max_steps; ++step) {
            const Axis axis = schedule[static_cast<size_t>(step - 1)];
            const PartitionPlan plan =
                build_axis_plan(axis, grid.extent(axis), 1, step, cfg.workers, cfg.overlap_ratio);
            reach = propagate_step(reach, plan);
            i64 min_c = reach.positions(), max_c = 0, full = 0;
            double mean_c = 0.0;
            for (i64 p = 0; p < reach.positions(); ++p) {
                const i64 c = reach.count(p);
                min_c = std::min(min_c, c);
                max_c = std::max(max_c, c);
                mean_c += static_cast<double>(c);
                if (c == reach.positions()) full += 1;
            }
            mean_c /= static_cast<double>(reach.positions());
            cov << step << ',' << min_c << ',' << mean_c << ',' << max_c << ',' << full << ','
                << reach.positions() << '\n';
            if (full == reach.positions()) break;
        }
        write_text_file(join(dir, "coverage.csv"), cov.str());
    }
    if (cfg.output.json) {
        write_json_file(join(dir, "completeness.json"), summary);
    }
    return summary;
}

json partition_plan_run(const RunConfig& cfg, int step) {
    const std::string dir = prepare_output_dir(cfg);
    const PartitionPlan plan = build_plan_for_shape(cfg.latent, cfg.patch, step, cfg.workers, cfg.overlap_ratio);

    json summary = plan_json(plan);
    if (cfg.output.csv) {
        write_text_file(join(dir, "weights.csv"), weight_profile_csv(plan));
    }
    if (cfg.output.json) {
        write_json_file(join(dir, "plan.json"), summary);
    }
    return summary;
}

}  // namespace lpsim
