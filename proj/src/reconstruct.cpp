#include "lpsim/reconstruct.hpp"

#include <string>

#include "lpsim/errors.hpp"

namespace lpsim {

WeightMask build_weight_mask(const PartitionEntry& entry) {
    WeightMask mask;
    mask.length = entry.latent.length();
    mask.delta_start = entry.delta_start;
    mask.delta_end = entry.delta_end;
    mask.axis_profile.resize(static_cast<size_t>(mask.length), 1.0);

    // Ramps are empty segments when the corresponding delta is 0, so the
    // divisions below are never evaluated for boundary partitions.
    for (i64 j = 0; j < mask.delta_start; ++j) {
        mask.axis_profile[static_cast<size_t>(j)] =
            static_cast<double>(j) / static_cast<double>(mask.delta_start);
    }
    for (i64 j = mask.length - mask.delta_end; j < mask.length; ++j) {
        mask.axis_profile[static_cast<size_t>(j)] =
            static_cast<double>(mask.length - j) / static_cast<double>(mask.delta_end);
    }
    return mask;
}

i64 local_coord(i64 x, const PartitionEntry& entry) {
    if (!entry.latent.contains(x)) {
        fail(ErrorKind::OutsideExtent, "global coordinate " + std::to_string(x) + " outside extent [" +
                                           std::to_string(entry.latent.begin) + "," +
                                           std::to_string(entry.latent.end) + ")");
    }
    return x - entry.latent.begin;
}

bool covers(i64 x, const PartitionEntry& entry) {
    return entry.latent.contains(x);
}

LatentTensor reconstruct(const std::vector<LatentTensor>& predictions, const PartitionPlan& plan,
                         const Shape& full_shape) {
    if (predictions.size() != plan.entries.size()) {
        fail(ErrorKind::ShapeMismatch, "got " + std::to_string(predictions.size()) + " predictions for " +
                                           std::to_string(plan.entries.size()) + " partitions");
    }
    if (full_shape.extent(plan.axis) != plan.axis_extent) {
        fail(ErrorKind::ShapeMismatch, "plan axis extent " + std::to_string(plan.axis_extent) +
                                           " does not match output shape " + full_shape.str());
    }
    const Dtype dtype = predictions.empty() ? Dtype::F32 : predictions[0].dtype();
    for (size_t k = 0; k < predictions.size(); ++k) {
        const Shape expect = full_shape.with_extent(plan.axis, plan.entries[k].latent.length());
        if (predictions[k].shape() != expect || predictions[k].dtype() != dtype) {
            fail(ErrorKind::ShapeMismatch, "prediction " + std::to_string(k + 1) + " has shape " +
                                               predictions[k].shape().str() + ", expected " + expect.str());
        }
    }

    const i64 d = full_shape.extent(plan.axis);

    // Weight sum depends only on the axis coordinate; cache one column.
    std::vector<WeightMask> masks;
    masks.reserve(plan.entries.size());
    for (const PartitionEntry& e : plan.entries) {
        masks.push_back(build_weight_mask(e));
    }
    std::vector<double> weight_sum(static_cast<size_t>(d), 0.0);
    for (size_t k = 0; k < plan.entries.size(); ++k) {
        const PartitionEntry& e = plan.entries[k];
        for (i64 x = e.latent.begin; x < e.latent.end; ++x) {
            weight_sum[static_cast<size_t>(x)] += masks[k].axis_profile[static_cast<size_t>(x - e.latent.begin)];
        }
    }
    for (i64 x = 0; x < d; ++x) {
        // Core tiling guarantees one contributor at weight 1 everywhere.
        if (weight_sum[static_cast<size_t>(x)] < 1.0 - 1e-12) {
            fail(ErrorKind::ZeroWeight, "weight sum " + std::to_string(weight_sum[static_cast<size_t>(x)]) +
                                            " < 1 at axis position " + std::to_string(x));
        }
    }

    std::vector<double> acc(static_cast<size_t>(full_shape.volume()), 0.0);

    i64 outer = 1, inner = 1;
    switch (plan.axis) {
        case Axis::Temporal: outer = full_shape.c; inner = full_shape.h * full_shape.w; break;
        case Axis::Height: outer = full_shape.c * full_shape.t; inner = full_shape.w; break;
        case Axis::Width: outer = full_shape.c * full_shape.t * full_shape.h; inner = 1; break;
    }

    for (size_t k = 0; k < plan.entries.size(); ++k) {
        const PartitionEntry& e = plan.entries[k];
        const i64 len = e.latent.length();
        const std::vector<double>& pred = predictions[k].data();
        for (i64 o = 0; o < outer; ++o) {
            for (i64 j = 0; j < len; ++j) {
                const double w = masks[k].axis_profile[static_cast<size_t>(j)];
                if (w == 0.0) continue;
                const double* sp = pred.data() + (o * len + j) * inner;
                double* dp = acc.data() + (o * d + e.latent.begin + j) * inner;
                for (i64 i = 0; i < inner; ++i) {
                    dp[i] += w * sp[i];
                }
            }
        }
    }

    for (i64 o = 0; o < outer; ++o) {
        for (i64 x = 0; x < d; ++x) {
            const double z = weight_sum[static_cast<size_t>(x)];
            double* dp = acc.data() + (o * d + x) * inner;
            for (i64 i = 0; i < inner; ++i) {
                dp[i] /= z;
            }
        }
    }

    return LatentTensor::from_doubles(full_shape, dtype, std::move(acc));
}

}  // namespace lpsim
