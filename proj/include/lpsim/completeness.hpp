#pragma once

#include <cstdint>
#include <vector>

#include "lpsim/partition.hpp"

namespace lpsim {

// Patch-grid dimensions for the reachability analysis. Attention tokens are
// patches, so propagation runs at patch granularity.
struct GridDims {
    i64 nt = 1;
    i64 nh = 1;
    i64 nw = 1;

    i64 size() const { return nt * nh * nw; }
    i64 extent(Axis a) const {
        switch (a) {
            case Axis::Temporal: return nt;
            case Axis::Height: return nh;
            case Axis::Width: return nw;
        }
        return 1;
    }
    i64 index(i64 t, i64 h, i64 w) const { return (t * nh + h) * nw + w; }
    bool operator==(const GridDims&) const = default;
};

struct GridPos {
    i64 t = 0;
    i64 h = 0;
    i64 w = 0;
    bool operator==(const GridPos&) const = default;
};

// One bitset of grid positions per grid position: R(p) is the set of
// positions whose information has been exchanged with p.
class ReachabilitySet {
public:
    // Every position reaches exactly itself.
    static ReachabilitySet initial(const GridDims& grid);

    const GridDims& grid() const { return grid_; }
    i64 positions() const { return grid_.size(); }

    bool reaches(i64 p, i64 q) const;
    i64 count(i64 p) const;
    bool is_full(i64 p) const;
    bool all_full() const;

    // Internal layout accessors used by the propagation step.
    i64 words_per_set() const { return words_; }
    const std::uint64_t* row(i64 p) const { return bits_.data() + p * words_; }
    std::uint64_t* row(i64 p) { return bits_.data() + p * words_; }

private:
    ReachabilitySet(const GridDims& grid, i64 words) : grid_(grid), words_(words) {}

    GridDims grid_;
    i64 words_ = 0;
    std::vector<std::uint64_t> bits_;
};

// One denoising step under the plan: all positions inside a partition block
// (its extension along the plan axis, full range elsewhere) exchange
// everything they have. A position lying in several overlapping blocks fuses
// with all of them. Block unions are taken over the pre-step sets.
ReachabilitySet propagate_step(const ReachabilitySet& r, const PartitionPlan& plan);

struct CompletenessResult {
    bool complete = false;            // all positions reached everything within the budget
    int complete_at = -1;             // max over positions of min_steps; -1 while incomplete
    std::vector<int> min_steps;       // per position, -1 if never full within the budget
    GridPos worst;                    // last position to complete, or a still-incomplete one
};

// Runs `budget` propagation steps following the axis schedule (plans built
// at patch granularity with the given K and r) and reports when each
// position first covers the whole grid.
CompletenessResult verify_n_complete(const GridDims& grid, int workers, double overlap_ratio,
                                     const std::vector<Axis>& schedule, int budget);

// Axis schedules: the per-step rotation, or one constant axis.
std::vector<Axis> rotating_schedule(int length);
std::vector<Axis> constant_schedule(Axis axis, int length);

}  // namespace lpsim
