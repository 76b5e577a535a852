#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lpsim/latent.hpp"

namespace lpsim {

// Half-open [begin, end) interval in patch or latent units.
struct Range {
    i64 begin = 0;
    i64 end = 0;

    i64 length() const { return end - begin; }
    bool contains(i64 x) const { return begin <= x && x < end; }
    bool operator==(const Range&) const = default;
};

// One worker's assignment along the partitioned axis.
struct PartitionEntry {
    int worker_id = 1;         // k, 1-based; k=1 is the master's own partition
    Range core_patches;        // exclusive region, patch units
    Range ext_patches;         // core extended by the overlap, patch units
    Range latent;              // extension mapped to latent units (last entry absorbs the remainder)
    i64 delta_start = 0;       // front overlap length in latent units
    i64 delta_end = 0;         // rear overlap length in latent units
};

// Partition of one denoising step: which axis was cut, and how.
struct PartitionPlan {
    Axis axis = Axis::Temporal;
    int step_index = 1;        // i, 1-based
    double overlap_ratio = 0;  // r
    i64 patches_per_core = 0;  // L
    i64 overlap_patches = 0;   // O
    i64 axis_patches = 0;      // N along the partitioned axis
    i64 axis_extent = 0;       // D along the partitioned axis
    i64 patch_size = 1;        // p along the partitioned axis
    std::vector<PartitionEntry> entries;

    int workers() const { return static_cast<int>(entries.size()); }
    // Sum of extension lengths in latent units.
    i64 extended_length() const;
};

// Optional sink for non-fatal notices (dropped idle workers). Defaults to
// stderr; pass nullptr to silence.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void emit_warning(const std::string& message);

// Axis cycled per step: 1 -> Temporal, 2 -> Height, 3 -> Width, then repeat.
Axis rotation_axis(int step_index);

// Core regions [alpha_k, beta_k) with L = ceil(N/K). Ends are clamped to N
// and empty trailing entries are dropped, so the result tiles [0, N).
std::vector<Range> core_bounds(i64 patches, int workers);

// Extends each core by O = floor(L * r) patches on both sides, clamped to
// [0, N). Requires r in [0, K-1].
std::vector<Range> extend_overlap(const std::vector<Range>& cores, i64 patches, i64 patches_per_core,
                                  double overlap_ratio, int workers);

// Full plan for one axis: cores, extensions, latent mapping and overlap
// deltas. Used directly by the per-step builders below and by the
// completeness analysis (patch granularity, p = 1).
PartitionPlan build_axis_plan(Axis axis, i64 axis_extent, i64 axis_patch, int step_index, int workers,
                              double overlap_ratio);

PartitionPlan build_plan_for_shape(const Shape& shape, const PatchGeometry& g, int step_index, int workers,
                                   double overlap_ratio);
PartitionPlan build_plan(const LatentTensor& z, const PatchGeometry& g, int step_index, int workers,
                         double overlap_ratio);

// One sub-latent per plan entry, sliced from z along the plan's axis.
std::vector<LatentTensor> extract_sublatents(const LatentTensor& z, const PartitionPlan& plan);

}  // namespace lpsim
