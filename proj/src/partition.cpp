#include "lpsim/partition.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "lpsim/errors.hpp"

namespace lpsim {

namespace {

std::mutex g_warning_mutex;
WarningHandler g_warning_handler = [](const std::string& message) {
    std::fprintf(stderr, "lpsim: warning: %s\n", message.c_str());
};

}  // namespace

void set_warning_handler(WarningHandler handler) {
    std::lock_guard<std::mutex> lock(g_warning_mutex);
    g_warning_handler = std::move(handler);
}

void emit_warning(const std::string& message) {
    std::lock_guard<std::mutex> lock(g_warning_mutex);
    if (g_warning_handler) g_warning_handler(message);
}

i64 PartitionPlan::extended_length() const {
    i64 total = 0;
    for (const PartitionEntry& e : entries) {
        total += e.latent.length();
    }
    return total;
}

Axis rotation_axis(int step_index) {
    if (step_index < 1) {
        fail(ErrorKind::InvalidArgument, "step index must be >= 1, got " + std::to_string(step_index));
    }
    return kAllAxes[static_cast<size_t>((step_index - 1) % 3)];
}

std::vector<Range> core_bounds(i64 patches, int workers) {
    if (patches < 1) {
        fail(ErrorKind::InvalidArgument, "patch count must be >= 1");
    }
    if (workers < 1) {
        fail(ErrorKind::InvalidArgument, "worker count must be >= 1");
    }
    const i64 per_core = (patches + workers - 1) / workers;  // L = ceil(N/K)
    std::vector<Range> cores;
    for (int k = 1; k <= workers; ++k) {
        const i64 a = static_cast<i64>(k - 1) * per_core;
        if (a >= patches) {
            break;  // nothing left; trailing workers idle this step
        }
        cores.push_back({a, std::min(a + per_core, patches)});
    }
    return cores;
}

std::vector<Range> extend_overlap(const std::vector<Range>& cores, i64 patches, i64 patches_per_core,
                                  double overlap_ratio, int workers) {
    if (!(overlap_ratio >= 0.0 && overlap_ratio <= static_cast<double>(workers - 1))) {
        fail(ErrorKind::InvalidOverlapRatio,
             "overlap ratio " + std::to_string(overlap_ratio) + " outside [0, " +
                 std::to_string(workers - 1) + "]");
    }
    const i64 overlap = static_cast<i64>(patches_per_core * overlap_ratio);  // O = floor(L*r)
    std::vector<Range> ext;
    ext.reserve(cores.size());
    for (const Range& c : cores) {
        ext.push_back({std::max<i64>(0, c.begin - overlap), std::min(patches, c.end + overlap)});
    }
    return ext;
}

PartitionPlan build_axis_plan(Axis axis, i64 axis_extent, i64 axis_patch, int step_index, int workers,
                              double overlap_ratio) {
    if (axis_patch < 1 || axis_extent < axis_patch) {
        fail(ErrorKind::DegenerateAxis, std::string("axis ") + axis_name(axis) + " extent " +
                                            std::to_string(axis_extent) + " cannot hold patch size " +
                                            std::to_string(axis_patch));
    }
    const i64 patches = axis_extent / axis_patch;
    std::vector<Range> cores = core_bounds(patches, workers);
    if (static_cast<int>(cores.size()) < workers) {
        emit_warning("axis " + std::string(axis_name(axis)) + " has " + std::to_string(patches) +
                     " patches for " + std::to_string(workers) + " workers; " +
                     std::to_string(workers - static_cast<int>(cores.size())) + " idle this step");
    }
    const i64 per_core = (patches + workers - 1) / workers;
    std::vector<Range> ext = extend_overlap(cores, patches, per_core, overlap_ratio, workers);

    PartitionPlan plan;
    plan.axis = axis;
    plan.step_index = step_index;
    plan.overlap_ratio = overlap_ratio;
    plan.patches_per_core = per_core;
    plan.overlap_patches = static_cast<i64>(per_core * overlap_ratio);
    plan.axis_patches = patches;
    plan.axis_extent = axis_extent;
    plan.patch_size = axis_patch;

    for (size_t i = 0; i < cores.size(); ++i) {
        PartitionEntry e;
        e.worker_id = static_cast<int>(i) + 1;
        e.core_patches = cores[i];
        e.ext_patches = ext[i];
        e.latent = {ext[i].begin * axis_patch, ext[i].end * axis_patch};
        if (i + 1 == cores.size()) {
            // The remainder rows beyond N*p belong to the final partition so
            // that the plan covers every latent position.
            e.latent.end = axis_extent;
        }
        e.delta_start = (cores[i].begin - ext[i].begin) * axis_patch;
        e.delta_end = (ext[i].end - cores[i].end) * axis_patch;
        plan.entries.push_back(e);
    }
    return plan;
}

PartitionPlan build_plan_for_shape(const Shape& shape, const PatchGeometry& g, int step_index, int workers,
                                   double overlap_ratio) {
    const Axis axis = rotation_axis(step_index);
    return build_axis_plan(axis, shape.extent(axis), g.at(axis), step_index, workers, overlap_ratio);
}

PartitionPlan build_plan(const LatentTensor& z, const PatchGeometry& g, int step_index, int workers,
                         double overlap_ratio) {
    return build_plan_for_shape(z.shape(), g, step_index, workers, overlap_ratio);
}

std::vector<LatentTensor> extract_sublatents(const LatentTensor& z, const PartitionPlan& plan) {
    if (z.extent(plan.axis) != plan.axis_extent) {
        fail(ErrorKind::ShapeMismatch, "plan was built for extent " + std::to_string(plan.axis_extent) +
                                           " on axis " + axis_name(plan.axis) + ", tensor has " +
                                           std::to_string(z.extent(plan.axis)));
    }
    std::vector<LatentTensor> subs;
    subs.reserve(plan.entries.size());
    for (const PartitionEntry& e : plan.entries) {
        subs.push_back(slice_axis(z, plan.axis, e.latent.begin, e.latent.end));
    }
    return subs;
}

}  // namespace lpsim
