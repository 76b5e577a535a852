#include "lpsim/completeness.hpp"

#include <bit>
#include <string>

#include "lpsim/errors.hpp"

namespace lpsim {

namespace {

constexpr i64 kMaxGridPositions = 4096;

i64 axis_coord(const GridDims& grid, i64 p, Axis a) {
    const i64 w = p % grid.nw;
    const i64 h = (p / grid.nw) % grid.nh;
    const i64 t = p / (grid.nw * grid.nh);
    switch (a) {
        case Axis::Temporal: return t;
        case Axis::Height: return h;
        case Axis::Width: return w;
    }
    return w;
}

}  // namespace

ReachabilitySet ReachabilitySet::initial(const GridDims& grid) {
    if (grid.nt < 1 || grid.nh < 1 || grid.nw < 1) {
        fail(ErrorKind::InvalidArgument, "grid dimensions must be >= 1");
    }
    if (grid.size() > kMaxGridPositions) {
        fail(ErrorKind::InvalidArgument, "grid has " + std::to_string(grid.size()) +
                                             " positions, exhaustive analysis is capped at " +
                                             std::to_string(kMaxGridPositions));
    }
    const i64 n = grid.size();
    const i64 words = (n + 63) / 64;
    ReachabilitySet r(grid, words);
    r.bits_.assign(static_cast<size_t>(n * words), 0);
    for (i64 p = 0; p < n; ++p) {
        r.row(p)[p / 64] |= (1ull << (p % 64));
    }
    return r;
}

bool ReachabilitySet::reaches(i64 p, i64 q) const {
    return (row(p)[q / 64] >> (q % 64)) & 1ull;
}

i64 ReachabilitySet::count(i64 p) const {
    i64 total = 0;
    const std::uint64_t* w = row(p);
    for (i64 i = 0; i < words_; ++i) {
        total += std::popcount(w[i]);
    }
    return total;
}

bool ReachabilitySet::is_full(i64 p) const {
    return count(p) == positions();
}

bool ReachabilitySet::all_full() const {
    for (i64 p = 0; p < positions(); ++p) {
        if (!is_full(p)) return false;
    }
    return true;
}

ReachabilitySet propagate_step(const ReachabilitySet& r, const PartitionPlan& plan) {
    const GridDims& grid = r.grid();
    if (plan.axis_extent != grid.extent(plan.axis) || plan.patch_size != 1) {
        fail(ErrorKind::ShapeMismatch, "plan is not at patch granularity for this grid");
    }

    const i64 n = r.positions();
    const i64 words = r.words_per_set();
    ReachabilitySet out = r;  // monotone growth: start from the current sets

    std::vector<std::uint64_t> block_union(static_cast<size_t>(words));
    for (const PartitionEntry& e : plan.entries) {
        // Union of pre-step sets over the block.
        for (i64 i = 0; i < words; ++i) block_union[static_cast<size_t>(i)] = 0;
        for (i64 q = 0; q < n; ++q) {
            if (!e.ext_patches.contains(axis_coord(grid, q, plan.axis))) continue;
            const std::uint64_t* src = r.row(q);
            for (i64 i = 0; i < words; ++i) {
                block_union[static_cast<size_t>(i)] |= src[i];
            }
        }
        // Everything in the block absorbs it.
        for (i64 p = 0; p < n; ++p) {
            if (!e.ext_patches.contains(axis_coord(grid, p, plan.axis))) continue;
            std::uint64_t* dst = out.row(p);
            for (i64 i = 0; i < words; ++i) {
                dst[i] |= block_union[static_cast<size_t>(i)];
            }
        }
    }
    return out;
}

CompletenessResult verify_n_complete(const GridDims& grid, int workers, double overlap_ratio,
                                     const std::vector<Axis>& schedule, int budget) {
    if (budget < 1) {
        fail(ErrorKind::InvalidArgument, "step budget must be >= 1");
    }
    if (static_cast<int>(schedule.size()) < budget) {
        fail(ErrorKind::InvalidArgument, "schedule is shorter than the step budget");
    }

    ReachabilitySet r = ReachabilitySet::initial(grid);
    const i64 n = r.positions();

    CompletenessResult result;
    result.min_steps.assign(static_cast<size_t>(n), -1);
    if (n == 1) {
        result.min_steps[0] = 0;
    }

    for (int step = 1; step <= budget; ++step) {
        const Axis axis = schedule[static_cast<size_t>(step - 1)];
        const PartitionPlan plan = build_axis_plan(axis, grid.extent(axis), 1, step, workers, overlap_ratio);
        r = propagate_step(r, plan);

        bool pending = false;
        for (i64 p = 0; p < n; ++p) {
            if (result.min_steps[static_cast<size_t>(p)] >= 0) continue;
            if (r.is_full(p)) {
                result.min_steps[static_cast<size_t>(p)] = step;
            } else {
                pending = true;
            }
        }
        if (!pending) break;
    }

    int worst_steps = -1;
    i64 worst_pos = 0;
    bool all = true;
    for (i64 p = 0; p < n; ++p) {
        const int s = result.min_steps[static_cast<size_t>(p)];
        if (s < 0) {
            all = false;
            worst_pos = p;
            break;
        }
        if (s > worst_steps) {
            worst_steps = s;
            worst_pos = p;
        }
    }
    result.complete = all;
    result.complete_at = all ? worst_steps : -1;
    result.worst = GridPos{axis_coord(grid, worst_pos, Axis::Temporal),
                           axis_coord(grid, worst_pos, Axis::Height),
                           axis_coord(grid, worst_pos, Axis::Width)};
    return result;
}

std::vector<Axis> rotating_schedule(int length) {
    std::vector<Axis> schedule;
    schedule.reserve(static_cast<size_t>(length));
    for (int i = 1; i <= length; ++i) {
        schedule.push_back(rotation_axis(i));
    }
    return schedule;
}

std::vector<Axis> constant_schedule(Axis axis, int length) {
    return std::vector<Axis>(static_cast<size_t>(length), axis);
}

}  // namespace lpsim
