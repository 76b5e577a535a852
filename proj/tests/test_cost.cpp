#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lpsim/cluster.hpp"
#include "lpsim/cost.hpp"
#include "lpsim/errors.hpp"
#include "test_support.hpp"

using namespace lpsim;
using lpsim::testing::random_tensor;

namespace {

CostInputs inputs_of(int steps, int workers, double r, Shape shape, PatchGeometry g, ModelPreset preset) {
    CostInputs in;
    in.steps = steps;
    in.workers = workers;
    in.overlap_ratio = r;
    in.shape = shape;
    in.geometry = g;
    in.preset = preset;
    return in;
}

ConditioningVector cond_of(std::vector<double> values) {
    ConditioningVector c;
    c.values = std::move(values);
    c.is_null = false;
    return c;
}

const ModelPreset kWan = *find_preset("wan21-like");
const Shape kWanShape{16, 13, 60, 104};
const PatchGeometry kWanPatch{1, 2, 2};

}  // namespace

TEST_CASE("layer-sequential volume follows 2T(K-1)S_H") {
    SUBCASE("single worker") {
        const CostInputs in = inputs_of(60, 1, 0.0, {1, 4, 4, 4}, {1, 1, 1}, ModelPreset{"t", 1, 4, ""});
        CHECK(cost_nmp(in) == 0);
    }
    SUBCASE("hand-sized activation") {
        // Tokens 250, hidden 1, fp32: S_H = 1000 bytes.
        const CostInputs in = inputs_of(60, 4, 0.0, {1, 10, 5, 5}, {1, 1, 1}, ModelPreset{"t", 1, 4, ""});
        CHECK(activation_size_bytes(in.shape, in.geometry, in.preset) == 1000);
        CHECK(cost_nmp(in) == 360000);
    }
    SUBCASE("pipeline equals layer-sequential everywhere") {
        std::mt19937_64 rng(3);
        for (int iter = 0; iter < 50; ++iter) {
            const CostInputs in = inputs_of(1 + static_cast<int>(rng() % 60), 1 + static_cast<int>(rng() % 8),
                                            0.0, {1 + static_cast<i64>(rng() % 4), 2 + static_cast<i64>(rng() % 10),
                                                  2 + static_cast<i64>(rng() % 10), 2 + static_cast<i64>(rng() % 10)},
                                            {1, 1, 1}, ModelPreset{"t", 1 + static_cast<i64>(rng() % 64), 2, ""});
            CHECK(cost_pp(in) == cost_nmp(in));
        }
    }
}

TEST_CASE("exact transfer volume matches the simulator ledger") {
    std::mt19937_64 rng(5);
    const auto f = make_identity_denoiser();
    const SamplerConfig sampler{5, 0.1, 1.0};

    const Shape shapes[] = {{1, 8, 8, 8}, {2, 7, 9, 5}, {1, 4, 16, 6}};
    const PatchGeometry geoms[] = {{2, 2, 2}, {1, 2, 1}, {2, 1, 3}};
    const double ratios[] = {0.0, 0.5, 1.0};
    for (const Shape& shape : shapes) {
        for (const PatchGeometry& g : geoms) {
            for (double r : ratios) {
                for (int workers : {1, 2, 3, 6}) {
                    if (r > workers - 1) continue;
                    ClusterConfig cluster;
                    cluster.workers = workers;
                    cluster.overlap_ratio = r;
                    cluster.geometry = g;
                    cluster.preset = ModelPreset{"t", 8, 2, ""};

                    const LatentTensor z = random_tensor(rng, shape, Dtype::F32);
                    const LpRunResult run = run_lp(*f, z, sampler, cond_of({1.0}), cluster);

                    CostInputs in = inputs_of(sampler.total_steps, workers, r, shape, g, cluster.preset);
                    CHECK(run.ledger.grand_total() == cost_lp_exact(in));
                }
            }
        }
    }
}

TEST_CASE("single-worker transfer volume is zero") {
    const CostInputs in = inputs_of(10, 1, 0.0, {2, 8, 8, 8}, {2, 2, 2}, kWan);
    CHECK(cost_lp_exact(in) == 0);
    CHECK(cost_lp_approx(in) == 0.0);
}

TEST_CASE("balanced divisible splits make the approximation exact") {
    // r=0 and every axis divisible by K: per step 4 (K-1)/K S_z.
    const Shape shape{2, 8, 8, 8};
    const PatchGeometry g{1, 1, 1};
    const ModelPreset preset{"t", 16, 4, ""};
    for (int workers : {1, 2, 4, 8}) {
        const CostInputs in = inputs_of(9, workers, 0.0, shape, g, preset);
        const std::uint64_t s_z = latent_size_bytes(shape, preset);
        const std::uint64_t expect =
            static_cast<std::uint64_t>(9.0 * 4.0 * (workers - 1) / workers * static_cast<double>(s_z));
        CHECK(cost_lp_exact(in) == expect);
        CHECK(cost_lp_approx(in) == doctest::Approx(static_cast<double>(expect)).epsilon(1e-12));
    }
}

TEST_CASE("expansion factor is one without overlap and grows with r") {
    CHECK(expansion_factor(Axis::Temporal, 24, 1, 4, 0.0) == 1.0);
    CHECK(expansion_factor(Axis::Temporal, 24, 1, 1, 0.0) == 1.0);

    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 100; ++iter) {
        const i64 n = 2 + static_cast<i64>(rng() % 60);
        const int workers = 2 + static_cast<int>(rng() % 7);
        double prev = 0.0;
        for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double g = expansion_factor(Axis::Height, n, 1, workers, r);
            CHECK(g >= 1.0);
            CHECK(g >= prev);
            prev = g;
        }
    }
}

TEST_CASE("expansion factor is nondecreasing in both arguments on the pinned grid") {
    // 480 patches per axis keeps floor(L*r) benign for every K in 1..8.
    const i64 n = 480;
    const double ratios[] = {0.0, 0.25, 0.5, 1.0};
    double by_k[9][4];
    for (int workers = 1; workers <= 8; ++workers) {
        for (int ri = 0; ri < 4; ++ri) {
            if (ratios[ri] > workers - 1) {
                by_k[workers][ri] = workers == 1 ? 1.0 : 0.0;
                continue;
            }
            by_k[workers][ri] = expansion_factor(Axis::Temporal, n, 1, workers, ratios[ri]);
            CHECK(by_k[workers][ri] >= 1.0);
        }
    }
    for (int workers = 2; workers <= 8; ++workers) {
        for (int ri = 0; ri < 4; ++ri) {
            CHECK(by_k[workers][ri] >= by_k[workers - 1][ri]);
            if (ri > 0) CHECK(by_k[workers][ri] >= by_k[workers][ri - 1]);
        }
    }
}

TEST_CASE("ratio report combines the expansion factor and the size ratio") {
    SUBCASE("five percent latent with no expansion") {
        // C=1, hidden=20, unit patches: S_z/S_H = 1/20; gamma = 1 at r=0.
        const CostInputs in = inputs_of(6, 2, 0.0, {1, 8, 8, 8}, {1, 1, 1}, ModelPreset{"t", 20, 4, ""});
        const LpNmpRatio ratio = ratio_lp_vs_nmp(in);
        CHECK(ratio.latent_activation_ratio == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(ratio.approx == doctest::Approx(0.05).epsilon(1e-12));
    }
    SUBCASE("matched sizes and gamma of K/2 give ratio one") {
        // K=2, r=0: gamma = 1 = K/2; C == hidden makes S_z == S_H.
        const CostInputs in = inputs_of(6, 2, 0.0, {4, 8, 8, 8}, {1, 1, 1}, ModelPreset{"t", 4, 4, ""});
        const LpNmpRatio ratio = ratio_lp_vs_nmp(in);
        CHECK(ratio.latent_activation_ratio == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ratio.approx == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("at least two workers required") {
        const CostInputs in = inputs_of(6, 1, 0.0, {1, 8, 8, 8}, {1, 1, 1}, ModelPreset{"t", 4, 4, ""});
        CHECK_THROWS_AS(ratio_lp_vs_nmp(in), Error);
    }
}

TEST_CASE("the serving-scale preset sits in the documented regime") {
    const CostInputs in = inputs_of(60, 4, 0.5, kWanShape, kWanPatch, kWan);
    const LpNmpRatio ratio = ratio_lp_vs_nmp(in);
    // The latent is a few percent of one activation tensor.
    CHECK(ratio.latent_activation_ratio > 0.01);
    CHECK(ratio.latent_activation_ratio < 0.1);
    // The measured reduction is at least 95 percent.
    CHECK(ratio.exact <= 0.05);
}

TEST_CASE("hybrid grouping reduces to the pure strategies at the extremes") {
    CostInputs in = inputs_of(12, 4, 0.5, kWanShape, kWanPatch, kWan);

    SUBCASE("one group is the layer-sequential baseline") {
        in.hybrid = HybridSpec{1, {4}};
        const HybridCostReport h = cost_hybrid(in);
        CHECK(h.inter_bytes == 0);
        CHECK(h.total_bytes == cost_nmp(in));
    }
    SUBCASE("singleton groups are pure latent partitioning") {
        in.hybrid = HybridSpec{4, {1, 1, 1, 1}};
        const HybridCostReport h = cost_hybrid(in);
        CHECK(h.intra_bytes == 0);
        CHECK(h.total_bytes == cost_lp_exact(in));
    }
}

TEST_CASE("hybrid ratio stays under the group bound in the dominant-activation regime") {
    CostInputs in = inputs_of(60, 4, 0.5, kWanShape, kWanPatch, kWan);
    in.hybrid = HybridSpec{2, {2, 2}};
    const HybridCostReport h = cost_hybrid(in);
    CHECK(h.bound == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(h.ratio_vs_nmp < h.bound);
    CHECK(h.within_bound);
}

TEST_CASE("bad groupings are rejected") {
    CostInputs in = inputs_of(6, 4, 0.0, {1, 8, 8, 8}, {1, 1, 1}, ModelPreset{"t", 4, 4, ""});
    auto expect_invalid = [&](HybridSpec spec) {
        in.hybrid = std::move(spec);
        try {
            cost_hybrid(in);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidGrouping);
        }
    };
    expect_invalid(HybridSpec{2, {2, 1}});      // does not sum to K
    expect_invalid(HybridSpec{2, {2, 2, 1}});   // wrong count
    expect_invalid(HybridSpec{5, {1, 1, 1, 1, 1}});  // more groups than workers... sums wrong too
    expect_invalid(HybridSpec{2, {4, 0}});      // empty group
    in.hybrid.reset();
    CHECK_THROWS_AS(cost_hybrid(in), Error);
}

TEST_CASE("the full report is internally consistent") {
    CostInputs in = inputs_of(60, 4, 0.5, kWanShape, kWanPatch, kWan);
    in.hybrid = HybridSpec{2, {2, 2}};
    const CostReport report = cost_report(in);

    CHECK(report.nmp_bytes == cost_nmp(in));
    CHECK(report.pp_bytes == report.nmp_bytes);
    CHECK(report.lp_exact_bytes == cost_lp_exact(in));
    CHECK(report.gamma >= 1.0);
    CHECK(report.ratio_exact ==
          doctest::Approx(static_cast<double>(report.lp_exact_bytes) / static_cast<double>(report.nmp_bytes))
              .epsilon(1e-12));
    REQUIRE(report.hybrid.has_value());
    CHECK(report.hybrid->total_bytes == report.hybrid->inter_bytes + report.hybrid->intra_bytes);

    // The balanced approximation is reported, not asserted; just confirm it
    // lands in the same order of magnitude here.
    CHECK(report.lp_approx_bytes > 0.5 * static_cast<double>(report.lp_exact_bytes));
    CHECK(report.lp_approx_bytes < 2.0 * static_cast<double>(report.lp_exact_bytes));
}

TEST_CASE("ratios are NaN at a single worker") {
    const CostInputs in = inputs_of(6, 1, 0.0, {1, 8, 8, 8}, {1, 1, 1}, ModelPreset{"t", 4, 4, ""});
    const CostReport report = cost_report(in);
    CHECK(std::isnan(report.ratio_exact));
    CHECK(std::isnan(report.ratio_approx));
}
