#pragma once

#include <vector>

#include "lpsim/partition.hpp"

namespace lpsim {

// Blend profile of one partition along the partitioned axis: linear ramp up
// over the front overlap, 1 across the core, linear ramp down over the rear
// overlap. One weight per latent position of the extension.
struct WeightMask {
    std::vector<double> axis_profile;
    i64 length = 0;        // ell = e - s
    i64 delta_start = 0;
    i64 delta_end = 0;
};

WeightMask build_weight_mask(const PartitionEntry& entry);

// Global axis coordinate -> local coordinate inside the entry's extension.
// Errors with OutsideExtent when x is not in [s, e).
i64 local_coord(i64 x, const PartitionEntry& entry);

// True when x lies inside the entry's extension.
bool covers(i64 x, const PartitionEntry& entry);

// Normalized position-weighted average of the per-partition predictions.
// predictions[k] must have entry k's extent along the plan axis and the full
// shape's extents elsewhere. Accumulation runs in doubles; the result is
// stored at the predictions' dtype.
LatentTensor reconstruct(const std::vector<LatentTensor>& predictions, const PartitionPlan& plan,
                         const Shape& full_shape);

}  // namespace lpsim
