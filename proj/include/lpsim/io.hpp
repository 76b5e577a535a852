#pragma once

#include <string>

#include <json.hpp>

#include "lpsim/cluster.hpp"
#include "lpsim/completeness.hpp"
#include "lpsim/cost.hpp"
#include "lpsim/reconstruct.hpp"

namespace lpsim {

// Binary latent dump: 32-byte header (magic "LPLT", u32 version, u32
// dtype_bytes, u32 C/T/H/W, 4 reserved zero bytes), then the row-major
// payload at the storage width, little-endian.
void write_latent_dump(const std::string& path, const LatentTensor& z);
LatentTensor read_latent_dump(const std::string& path);

// One row per transfer: step,pass,kind,src,dst,bytes.
std::string ledger_csv(const CommLedger& ledger);

// Weight profiles of a plan: position,worker_id,weight.
std::string weight_profile_csv(const PartitionPlan& plan);

nlohmann::json plan_json(const PartitionPlan& plan);
nlohmann::json ledger_summary_json(const CommLedger& ledger);
nlohmann::json cost_report_json(const CostReport& report);
std::string cost_report_csv(const CostInputs& in, const CostReport& report);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& doc);

}  // namespace lpsim
