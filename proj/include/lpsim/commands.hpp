#pragma once

#include <string>

#include <json.hpp>

#include "lpsim/run_config.hpp"

namespace lpsim {

// Each command executes one run, writes the artifacts selected by
// cfg.output (into cfg.output.dir, created on demand) and returns the
// summary document it wrote.

nlohmann::json simulate_run(const RunConfig& cfg);
nlohmann::json compare_run(const RunConfig& cfg);
nlohmann::json cost_run(const RunConfig& cfg);
nlohmann::json completeness_run(const RunConfig& cfg, const std::string& schedule_name, int max_steps);
nlohmann::json partition_plan_run(const RunConfig& cfg, int step);

}  // namespace lpsim
