#include "lpsim/cost.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lpsim/errors.hpp"
#include "lpsim/partition.hpp"

namespace lpsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_inputs(const CostInputs& in) {
    if (in.steps < 1) fail(ErrorKind::InvalidArgument, "steps must be >= 1");
    if (in.workers < 1) fail(ErrorKind::InvalidArgument, "workers must be >= 1");
}

void validate_hybrid(const CostInputs& in, const HybridSpec& spec) {
    if (spec.groups < 1 || spec.groups > in.workers) {
        fail(ErrorKind::InvalidGrouping, "group count must be in [1, K]");
    }
    if (static_cast<int>(spec.group_sizes.size()) != spec.groups) {
        fail(ErrorKind::InvalidGrouping, "expected " + std::to_string(spec.groups) + " group sizes");
    }
    int total = 0;
    for (int k : spec.group_sizes) {
        if (k < 1) fail(ErrorKind::InvalidGrouping, "every group needs at least one worker");
        total += k;
    }
    if (total != in.workers) {
        fail(ErrorKind::InvalidGrouping, "group sizes sum to " + std::to_string(total) + ", expected " +
                                             std::to_string(in.workers));
    }
}

// Elements of one latent unit of the given axis (all other extents full).
i64 elements_per_unit(const Shape& shape, Axis axis) {
    return shape.volume() / shape.extent(axis);
}

// Bytes scattered+gathered in one step partitioned along `axis`:
// 4 * sum_{k>=2} S_sub^(k).
std::uint64_t lp_step_bytes(const CostInputs& in, Axis axis) {
    const PartitionPlan plan =
        build_axis_plan(axis, in.shape.extent(axis), in.geometry.at(axis), 1, in.workers, in.overlap_ratio);
    const i64 unit = elements_per_unit(in.shape, axis);
    std::uint64_t sum = 0;
    for (size_t k = 1; k < plan.entries.size(); ++k) {
        sum += static_cast<std::uint64_t>(plan.entries[k].latent.length() * unit);
    }
    return 4 * sum * static_cast<std::uint64_t>(in.preset.dtype_bytes);
}

}  // namespace

std::uint64_t latent_size_bytes(const Shape& shape, const ModelPreset& preset) {
    return static_cast<std::uint64_t>(shape.volume()) * static_cast<std::uint64_t>(preset.dtype_bytes);
}

std::uint64_t activation_size_bytes(const Shape& shape, const PatchGeometry& g, const ModelPreset& preset) {
    return static_cast<std::uint64_t>(total_patches(shape, g)) *
           static_cast<std::uint64_t>(preset.hidden_dim) * static_cast<std::uint64_t>(preset.dtype_bytes);
}

double expansion_factor(Axis axis, i64 axis_extent, i64 axis_patch, int workers, double overlap_ratio) {
    const PartitionPlan plan = build_axis_plan(axis, axis_extent, axis_patch, 1, workers, overlap_ratio);
    return static_cast<double>(plan.extended_length()) / static_cast<double>(axis_extent);
}

std::uint64_t cost_nmp(const CostInputs& in) {
    validate_inputs(in);
    const std::uint64_t s_h = activation_size_bytes(in.shape, in.geometry, in.preset);
    return 2ull * static_cast<std::uint64_t>(in.steps) * static_cast<std::uint64_t>(in.workers - 1) * s_h;
}

std::uint64_t cost_pp(const CostInputs& in) {
    return cost_nmp(in);
}

std::uint64_t cost_lp_exact(const CostInputs& in) {
    validate_inputs(in);
    std::array<std::uint64_t, 3> per_axis{};
    for (Axis a : kAllAxes) {
        per_axis[static_cast<size_t>(a)] = lp_step_bytes(in, a);
    }
    std::uint64_t total = 0;
    for (int i = 1; i <= in.steps; ++i) {
        total += per_axis[static_cast<size_t>(rotation_axis(i))];
    }
    return total;
}

double cost_lp_approx(const CostInputs& in) {
    validate_inputs(in);
    const double s_z = static_cast<double>(latent_size_bytes(in.shape, in.preset));
    std::array<double, 3> gamma{};
    for (Axis a : kAllAxes) {
        gamma[static_cast<size_t>(a)] =
            expansion_factor(a, in.shape.extent(a), in.geometry.at(a), in.workers, in.overlap_ratio);
    }
    const double balance = static_cast<double>(in.workers - 1) / static_cast<double>(in.workers);
    double total = 0.0;
    for (int i = 1; i <= in.steps; ++i) {
        total += 4.0 * balance * gamma[static_cast<size_t>(rotation_axis(i))] * s_z;
    }
    return total;
}

LpNmpRatio ratio_lp_vs_nmp(const CostInputs& in) {
    validate_inputs(in);
    if (in.workers < 2) {
        fail(ErrorKind::InvalidArgument, "ratio needs at least two workers");
    }
    const double nmp = static_cast<double>(cost_nmp(in));
    const double s_z = static_cast<double>(latent_size_bytes(in.shape, in.preset));
    const double s_h = static_cast<double>(activation_size_bytes(in.shape, in.geometry, in.preset));
    double gamma_mean = 0.0;
    for (Axis a : kAllAxes) {
        gamma_mean += expansion_factor(a, in.shape.extent(a), in.geometry.at(a), in.workers, in.overlap_ratio);
    }
    gamma_mean /= 3.0;

    LpNmpRatio out;
    out.exact = static_cast<double>(cost_lp_exact(in)) / nmp;
    out.approx = (2.0 * gamma_mean / static_cast<double>(in.workers)) * (s_z / s_h);
    out.latent_activation_ratio = s_z / s_h;
    return out;
}

HybridCostReport cost_hybrid(const CostInputs& in) {
    validate_inputs(in);
    if (!in.hybrid.has_value()) {
        fail(ErrorKind::InvalidGrouping, "no hybrid grouping configured");
    }
    const HybridSpec& spec = *in.hybrid;
    validate_hybrid(in, spec);

    // A single group never partitions the latent: no inter-group traffic and
    // the group's activation is the full tensor. The overlap ratio only
    // constrains real partitions, so it is not validated against M here.
    if (spec.groups == 1) {
        HybridCostReport out;
        out.inter_bytes = 0;
        out.intra_bytes = 2ull * static_cast<std::uint64_t>(in.steps) *
                          static_cast<std::uint64_t>(spec.group_sizes[0] - 1) *
                          activation_size_bytes(in.shape, in.geometry, in.preset);
        out.total_bytes = out.intra_bytes;
        if (in.workers >= 2) {
            out.ratio_vs_nmp = static_cast<double>(out.total_bytes) / static_cast<double>(cost_nmp(in));
            out.bound = static_cast<double>(in.workers - 1) / static_cast<double>(in.workers - 1);
            out.within_bound = out.ratio_vs_nmp < out.bound;
        } else {
            out.ratio_vs_nmp = kNaN;
            out.bound = kNaN;
            out.within_bound = false;
        }
        return out;
    }

    // Token counts off the partitioned axis are shared by all groups.
    std::array<std::uint64_t, 3> inter_step{};
    std::array<std::uint64_t, 3> intra_step{};
    for (Axis a : kAllAxes) {
        const PartitionPlan plan =
            build_axis_plan(a, in.shape.extent(a), in.geometry.at(a), 1, spec.groups, in.overlap_ratio);
        const i64 unit = elements_per_unit(in.shape, a);

        std::uint64_t scatter = 0;
        for (size_t m = 1; m < plan.entries.size(); ++m) {
            scatter += static_cast<std::uint64_t>(plan.entries[m].latent.length() * unit);
        }
        inter_step[static_cast<size_t>(a)] = 4 * scatter * static_cast<std::uint64_t>(in.preset.dtype_bytes);

        i64 other_tokens = 1;
        for (Axis b : kAllAxes) {
            if (b != a) other_tokens *= patch_count(in.shape, in.geometry, b);
        }
        // Groups beyond K_eff receive no sub-latent and stay silent.
        std::uint64_t intra = 0;
        for (size_t m = 0; m < plan.entries.size(); ++m) {
            const int group_workers = spec.group_sizes[m];
            const std::uint64_t group_tokens =
                static_cast<std::uint64_t>(plan.entries[m].ext_patches.length() * other_tokens);
            const std::uint64_t group_activation = group_tokens *
                                                   static_cast<std::uint64_t>(in.preset.hidden_dim) *
                                                   static_cast<std::uint64_t>(in.preset.dtype_bytes);
            intra += 2ull * static_cast<std::uint64_t>(group_workers - 1) * group_activation;
        }
        intra_step[static_cast<size_t>(a)] = intra;
    }

    HybridCostReport out;
    for (int i = 1; i <= in.steps; ++i) {
        const size_t a = static_cast<size_t>(rotation_axis(i));
        out.inter_bytes += inter_step[a];
        out.intra_bytes += intra_step[a];
    }
    out.total_bytes = out.inter_bytes + out.intra_bytes;

    if (in.workers >= 2) {
        out.ratio_vs_nmp = static_cast<double>(out.total_bytes) / static_cast<double>(cost_nmp(in));
        out.bound = static_cast<double>(in.workers - spec.groups) / static_cast<double>(in.workers - 1);
        out.within_bound = out.ratio_vs_nmp < out.bound;
    } else {
        out.ratio_vs_nmp = kNaN;
        out.bound = kNaN;
        out.within_bound = false;
    }
    return out;
}

CostReport cost_report(const CostInputs& in) {
    validate_inputs(in);
    CostReport out;
    out.latent_bytes = latent_size_bytes(in.shape, in.preset);
    out.activation_bytes = activation_size_bytes(in.shape, in.geometry, in.preset);

    double gamma_mean = 0.0;
    for (Axis a : kAllAxes) {
        const double g =
            expansion_factor(a, in.shape.extent(a), in.geometry.at(a), in.workers, in.overlap_ratio);
        out.gamma_per_axis[static_cast<size_t>(a)] = g;
        gamma_mean += g;
    }
    out.gamma = gamma_mean / 3.0;
    out.ext_bytes_mean = out.gamma * static_cast<double>(out.latent_bytes);

    out.nmp_bytes = cost_nmp(in);
    out.pp_bytes = cost_pp(in);
    out.lp_exact_bytes = cost_lp_exact(in);
    out.lp_approx_bytes = cost_lp_approx(in);
    out.latent_activation_ratio =
        static_cast<double>(out.latent_bytes) / static_cast<double>(out.activation_bytes);
    if (in.workers >= 2) {
        out.ratio_exact = static_cast<double>(out.lp_exact_bytes) / static_cast<double>(out.nmp_bytes);
        out.ratio_approx = (2.0 * out.gamma / static_cast<double>(in.workers)) * out.latent_activation_ratio;
    } else {
        out.ratio_exact = kNaN;
        out.ratio_approx = kNaN;
    }
    if (in.hybrid.has_value()) {
        out.hybrid = cost_hybrid(in);
    }
    return out;
}

}  // namespace lpsim
