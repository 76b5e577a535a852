#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lpsim/latent.hpp"

namespace lpsim {

// Hierarchical layout: M worker groups of size K_m, latent-partitioned
// across groups, layer-split inside each group.
struct HybridSpec {
    int groups = 1;                 // M
    std::vector<int> group_sizes;   // K_m, sums to K
};

struct CostInputs {
    int steps = 1;                  // T
    int workers = 1;                // K
    double overlap_ratio = 0.0;     // r
    Shape shape;
    PatchGeometry geometry;
    ModelPreset preset;
    std::optional<HybridSpec> hybrid;
};

struct HybridCostReport {
    std::uint64_t inter_bytes = 0;   // group-level scatter/gather
    std::uint64_t intra_bytes = 0;   // boundary activations inside groups
    std::uint64_t total_bytes = 0;
    double ratio_vs_nmp = 0.0;
    double bound = 0.0;              // (K - M) / (K - 1)
    bool within_bound = false;
};

struct CostReport {
    std::uint64_t latent_bytes = 0;      // S_z
    std::uint64_t activation_bytes = 0;  // S_H
    double ext_bytes_mean = 0.0;         // S_ext averaged over the rotation cycle
    double gamma = 1.0;                  // cycle-mean expansion factor
    std::array<double, 3> gamma_per_axis{1.0, 1.0, 1.0};
    std::uint64_t nmp_bytes = 0;
    std::uint64_t pp_bytes = 0;
    std::uint64_t lp_exact_bytes = 0;
    double lp_approx_bytes = 0.0;
    double ratio_exact = 0.0;            // NaN when K == 1
    double ratio_approx = 0.0;
    double latent_activation_ratio = 0.0;  // S_z / S_H
    std::optional<HybridCostReport> hybrid;
};

// S_z: full latent payload in bytes at the preset's wire width.
std::uint64_t latent_size_bytes(const Shape& shape, const ModelPreset& preset);

// S_H: one activation tensor, token count times hidden width.
std::uint64_t activation_size_bytes(const Shape& shape, const PatchGeometry& g, const ModelPreset& preset);

// Expansion factor of one axis: total extension length / axis extent,
// measured from a real partition plan.
double expansion_factor(Axis axis, i64 axis_extent, i64 axis_patch, int workers, double overlap_ratio);

// 2T(K-1) * S_H.
std::uint64_t cost_nmp(const CostInputs& in);
// Identical volume; micro-batching changes ordering, not bytes.
std::uint64_t cost_pp(const CostInputs& in);

// Sum over steps of 4 * sum_{k>=2} S_sub, using the real per-axis plans and
// the actual step-to-axis assignment. Matches the simulator ledger exactly.
std::uint64_t cost_lp_exact(const CostInputs& in);
// Balanced approximation 4T (K-1)/K * gamma * S_z, per-axis gamma applied
// per step. Reported for comparison, never asserted against the ledger.
double cost_lp_approx(const CostInputs& in);

struct LpNmpRatio {
    double exact = 0.0;
    double approx = 0.0;
    double latent_activation_ratio = 0.0;
};

// Requires K >= 2 (the baseline volume is zero otherwise).
LpNmpRatio ratio_lp_vs_nmp(const CostInputs& in);

HybridCostReport cost_hybrid(const CostInputs& in);

CostReport cost_report(const CostInputs& in);

}  // namespace lpsim
