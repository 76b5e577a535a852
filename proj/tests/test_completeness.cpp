#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <set>
#include <vector>

#include "lpsim/completeness.hpp"
#include "lpsim/errors.hpp"

using namespace lpsim;

namespace {

PartitionPlan patch_plan(Axis axis, i64 extent, int workers, double r) {
    return build_axis_plan(axis, extent, 1, 1, workers, r);
}

}  // namespace

TEST_CASE("a single partition reaches everything in one step") {
    const GridDims grid{4, 4, 4};
    ReachabilitySet r = ReachabilitySet::initial(grid);
    r = propagate_step(r, patch_plan(Axis::Temporal, 4, 1, 0.0));
    CHECK(r.all_full());
}

TEST_CASE("initial sets are reflexive singletons") {
    const GridDims grid{3, 2, 2};
    const ReachabilitySet r = ReachabilitySet::initial(grid);
    for (i64 p = 0; p < r.positions(); ++p) {
        CHECK(r.reaches(p, p));
        CHECK(r.count(p) == 1);
    }
}

TEST_CASE("one temporal split fuses each half across height and width") {
    const GridDims grid{4, 4, 4};
    ReachabilitySet r = ReachabilitySet::initial(grid);
    r = propagate_step(r, patch_plan(Axis::Temporal, 4, 2, 0.0));

    for (i64 t = 0; t < 4; ++t) {
        for (i64 h = 0; h < 4; ++h) {
            for (i64 w = 0; w < 4; ++w) {
                const i64 p = grid.index(t, h, w);
                CHECK(r.count(p) == 2 * 4 * 4);
                // Same temporal half: reachable; other half: not.
                CHECK(r.reaches(p, grid.index(t < 2 ? 0 : 2, 3, 3)));
                CHECK_FALSE(r.reaches(p, grid.index(t < 2 ? 2 : 0, 0, 0)));
            }
        }
    }
}

TEST_CASE("a following height split completes the coverage") {
    const GridDims grid{4, 4, 4};
    ReachabilitySet r = ReachabilitySet::initial(grid);
    r = propagate_step(r, patch_plan(Axis::Temporal, 4, 2, 0.0));
    r = propagate_step(r, patch_plan(Axis::Height, 4, 2, 0.0));
    CHECK(r.all_full());
}

TEST_CASE("reachability grows monotonically") {
    const GridDims grid{3, 3, 3};
    ReachabilitySet r = ReachabilitySet::initial(grid);
    std::vector<Axis> schedule = rotating_schedule(6);
    std::vector<i64> prev(static_cast<size_t>(grid.size()), 1);
    for (Axis a : schedule) {
        r = propagate_step(r, patch_plan(a, 3, 2, 0.5));
        for (i64 p = 0; p < grid.size(); ++p) {
            CHECK(r.count(p) >= prev[static_cast<size_t>(p)]);
            prev[static_cast<size_t>(p)] = r.count(p);
        }
    }
}

TEST_CASE("the rotating schedule completes every grid in two steps") {
    for (i64 nt = 2; nt <= 5; ++nt) {
        for (i64 nh = 2; nh <= 5; ++nh) {
            for (i64 nw = 2; nw <= 5; ++nw) {
                for (int workers = 2; workers <= 4; ++workers) {
                    for (double r : {0.0, 0.5}) {
                        const CompletenessResult res =
                            verify_n_complete({nt, nh, nw}, workers, r, rotating_schedule(2), 2);
                        CHECK(res.complete);
                        CHECK(res.complete_at <= 2);
                    }
                }
            }
        }
    }
}

TEST_CASE("the default desk grid completes at exactly two steps") {
    const CompletenessResult res = verify_n_complete({4, 4, 4}, 2, 0.5, rotating_schedule(4), 4);
    CHECK(res.complete);
    CHECK(res.complete_at == 2);
}

TEST_CASE("a constant single-axis schedule never completes without overlap") {
    const CompletenessResult res =
        verify_n_complete({4, 4, 4}, 2, 0.0, constant_schedule(Axis::Temporal, 50), 50);
    CHECK_FALSE(res.complete);
    CHECK(res.complete_at == -1);
    for (int s : res.min_steps) CHECK(s == -1);
}

TEST_CASE("exhaustive check on the 2x2x2 grid") {
    // Independent brute force: per step, every position's set becomes the
    // union over the blocks containing it, computed on plain std::set.
    const GridDims grid{2, 2, 2};
    std::array<std::set<int>, 8> sets;
    for (int p = 0; p < 8; ++p) sets[static_cast<size_t>(p)] = {p};

    auto axis_of = [&](int p, int axis) {
        const int t = p / 4, h = (p / 2) % 2, w = p % 2;
        return axis == 0 ? t : (axis == 1 ? h : w);
    };
    auto brute_step = [&](int axis) {
        // K=2 on an extent of 2: blocks {0} and {1} along the axis.
        std::array<std::set<int>, 8> next = sets;
        for (int block = 0; block < 2; ++block) {
            std::set<int> u;
            for (int q = 0; q < 8; ++q) {
                if (axis_of(q, axis) == block) {
                    u.insert(sets[static_cast<size_t>(q)].begin(), sets[static_cast<size_t>(q)].end());
                }
            }
            for (int p = 0; p < 8; ++p) {
                if (axis_of(p, axis) == block) {
                    next[static_cast<size_t>(p)].insert(u.begin(), u.end());
                }
            }
        }
        sets = next;
    };

    // Step 1 temporal, step 2 height: every set must be full.
    brute_step(0);
    brute_step(1);
    for (int p = 0; p < 8; ++p) CHECK(sets[static_cast<size_t>(p)].size() == 8);

    const CompletenessResult res = verify_n_complete(grid, 2, 0.0, rotating_schedule(2), 2);
    CHECK(res.complete);
    for (int s : res.min_steps) {
        CHECK(s >= 1);
        CHECK(s <= 2);
    }
}

TEST_CASE("axis relabeling permutes but preserves reachability") {
    const GridDims grid{3, 4, 5};
    const GridDims permuted{4, 5, 3};  // (t,h,w) -> (h,w,t)

    ReachabilitySet a = ReachabilitySet::initial(grid);
    a = propagate_step(a, patch_plan(Axis::Temporal, 3, 2, 0.5));
    a = propagate_step(a, patch_plan(Axis::Height, 4, 2, 0.5));

    ReachabilitySet b = ReachabilitySet::initial(permuted);
    b = propagate_step(b, patch_plan(Axis::Temporal, 4, 2, 0.5));
    b = propagate_step(b, patch_plan(Axis::Height, 5, 2, 0.5));

    // The second run partitions (h, w) of the permuted grid, which plays the
    // role (t, h) played in the first. Compare through the relabeling map.
    auto map_pos = [&](i64 t, i64 h, i64 w) { return permuted.index(h, w, t); };
    for (i64 t = 0; t < 3; ++t) {
        for (i64 h = 0; h < 4; ++h) {
            for (i64 w = 0; w < 5; ++w) {
                for (i64 t2 = 0; t2 < 3; ++t2) {
                    for (i64 h2 = 0; h2 < 4; ++h2) {
                        for (i64 w2 = 0; w2 < 5; ++w2) {
                            const bool lhs = a.reaches(grid.index(t, h, w), grid.index(t2, h2, w2));
                            const bool rhs = b.reaches(map_pos(t, h, w), map_pos(t2, h2, w2));
                            CHECK(lhs == rhs);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("overlap leaks across seams without reaching completeness in two steps") {
    // Single axis, three partitions, extensions overlapping only adjacent
    // cores (O <= L/2). The frontier advances one core block plus O patches
    // per step; with a larger O the extensions bridge non-adjacent blocks
    // and the bound no longer applies.
    struct Case {
        i64 patches;
        double ratio;
        i64 per_core;
        i64 overlap;
    };
    for (const Case& c : {Case{9, 1.0 / 3.0, 3, 1}, Case{15, 0.4, 5, 2}}) {
        const GridDims grid{c.patches, 1, 1};
        const int workers = 3;

        ReachabilitySet reach = ReachabilitySet::initial(grid);
        const i64 p0 = grid.index(0, 0, 0);
        for (int step = 1; step <= 3; ++step) {
            reach = propagate_step(reach, patch_plan(Axis::Temporal, c.patches, workers, c.ratio));
            // Frontier of position 0: its own block plus O per crossed seam.
            i64 frontier = 0;
            for (i64 q = 0; q < c.patches; ++q) {
                if (reach.reaches(p0, grid.index(q, 0, 0))) frontier = q + 1;
            }
            CHECK(frontier == std::min<i64>(c.patches, step * c.per_core + c.overlap));
        }

        const CompletenessResult res =
            verify_n_complete(grid, workers, c.ratio, constant_schedule(Axis::Temporal, 2), 2);
        CHECK_FALSE(res.complete);
    }
}

TEST_CASE("grids beyond the exhaustive cap are rejected") {
    CHECK_THROWS_AS(ReachabilitySet::initial({17, 16, 16}), Error);
    CHECK_NOTHROW(ReachabilitySet::initial({16, 16, 16}));
}

TEST_CASE("schedule shorter than the budget is rejected") {
    CHECK_THROWS_AS(verify_n_complete({2, 2, 2}, 2, 0.0, rotating_schedule(1), 2), Error);
}
