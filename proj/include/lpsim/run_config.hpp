#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "lpsim/cluster.hpp"
#include "lpsim/cost.hpp"
#include "lpsim/denoise.hpp"

namespace lpsim {

struct DenoiserConfig {
    std::string kind = "box";          // box | global | identity
    std::array<i64, 3> radius{1, 1, 1};
    std::uint64_t seed = 0;            // drives the synthetic latent and conditioning
};

struct OutputConfig {
    std::string dir = "out";
    bool json = true;
    bool csv = true;
    bool bin = true;
};

// Parsed and validated run description. The JSON schema is strict: unknown
// keys anywhere are rejected before anything runs.
struct RunConfig {
    Shape latent{1, 1, 1, 1};
    Dtype latent_dtype = Dtype::F32;
    PatchGeometry patch;
    SamplerConfig sampler;
    DenoiserConfig denoiser;
    int workers = 1;                   // K
    double overlap_ratio = 0.0;        // r
    ModelPreset preset;
    std::optional<HybridSpec> hybrid;
    OutputConfig output;

    ClusterConfig cluster_config() const;
    CostInputs cost_inputs() const;
};

// Throws Error(Config) on any schema or semantic violation.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

std::unique_ptr<Denoiser> make_denoiser(const DenoiserConfig& cfg);

// Deterministic synthetic inputs: a standard-normal latent followed by an
// 8-value conditioning vector, drawn from one mt19937_64 stream seeded with
// `seed` and transformed with Box-Muller. Identical on every platform with
// the same libm rounding; identical across runs everywhere.
struct SyntheticInputs {
    LatentTensor latent;
    ConditioningVector cond;
};

SyntheticInputs synthetic_inputs(const Shape& shape, Dtype dtype, std::uint64_t seed);

}  // namespace lpsim
