#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "daf/evaluation.hpp"
#include "reference_impl.hpp"

namespace {

daf::RankingResult ranking_from(std::vector<std::vector<std::uint32_t>> order) {
    daf::RankingResult result;
    const std::size_t ng = order.empty() ? 0 : order.front().size();
    result.distances = daf::Matrix(order.size(), ng);
    result.order = std::move(order);
    return result;
}

TEST(ProtocolFilter, DropsSamePersonSameCameraOnly) {
    const daf::GroundTruth gallery{{5, 1}, {5, 2}, {7, 1}};
    const auto valid = daf::protocol_filter({5, 1}, gallery);
    EXPECT_EQ(valid, (std::vector<std::uint32_t>{1, 2}));
}

TEST(ProtocolFilter, NoJunkKeepsFullGallery) {
    const daf::GroundTruth gallery{{5, 2}, {6, 1}, {7, 3}};
    const auto valid = daf::protocol_filter({5, 1}, gallery);
    EXPECT_EQ(valid.size(), 3u);
}

TEST(AveragePrecision, PerfectRankingScoresOne) {
    const std::vector<std::uint32_t> ranked{0, 1, 2, 3};
    const std::vector<char> relevant{1, 1, 0, 0};
    const std::vector<char> skipped{0, 0, 0, 0};
    const auto ap = daf::average_precision(ranked, relevant, skipped);
    ASSERT_TRUE(ap.has_value());
    EXPECT_DOUBLE_EQ(*ap, 1.0);
}

TEST(AveragePrecision, SingleRelevantAtEffectiveRankTwo) {
    const std::vector<std::uint32_t> ranked{2, 0, 1};
    const std::vector<char> relevant{1, 0, 0};
    const std::vector<char> skipped{0, 0, 0};
    EXPECT_DOUBLE_EQ(*daf::average_precision(ranked, relevant, skipped), 0.5);
}

TEST(AveragePrecision, TwoRelevantAtEffectiveRanksOneAndThree) {
    const std::vector<std::uint32_t> ranked{0, 3, 1, 2};
    const std::vector<char> relevant{1, 1, 0, 0};
    const std::vector<char> skipped{0, 0, 0, 0};
    EXPECT_NEAR(*daf::average_precision(ranked, relevant, skipped), (1.0 + 2.0 / 3.0) / 2.0,
                1e-7);
}

TEST(AveragePrecision, SkippedEntriesDoNotAdvanceTheEffectiveRank) {
    // Junk at the top of the list: the relevant item right after it
    // still has effective rank 1.
    const std::vector<std::uint32_t> ranked{3, 0, 1, 2};
    const std::vector<char> relevant{1, 0, 0, 0};
    const std::vector<char> skipped{0, 0, 0, 1};
    EXPECT_DOUBLE_EQ(*daf::average_precision(ranked, relevant, skipped), 1.0);
}

TEST(AveragePrecision, NoRelevantMeansUnevaluable) {
    const std::vector<std::uint32_t> ranked{0, 1};
    EXPECT_FALSE(daf::average_precision(ranked, {0, 0}, {0, 0}).has_value());
    // Relevant-but-skipped does not count either.
    EXPECT_FALSE(daf::average_precision(ranked, {1, 0}, {1, 0}).has_value());
}

TEST(AveragePrecision, InvariantUnderIrrelevantTailPermutations) {
    const std::vector<char> relevant{1, 0, 0, 1, 0};
    const std::vector<char> skipped{0, 0, 0, 0, 0};
    const auto a = daf::average_precision({{0, 3, 1, 2, 4}}, relevant, skipped);
    const auto b = daf::average_precision({{0, 3, 4, 2, 1}}, relevant, skipped);
    EXPECT_DOUBLE_EQ(*a, *b);
}

TEST(ComputeMetrics, AveragesPerProbeAp) {
    // Probe 0: relevant at effective ranks 1 and 2 -> AP 1.0, first hit 1.
    // Probe 1: single relevant at effective rank 2 -> AP 0.5, first hit 2.
    const daf::GroundTruth probes{{1, 0}, {2, 0}};
    const daf::GroundTruth gallery{{1, 1}, {1, 2}, {2, 1}, {3, 1}};
    const auto result = ranking_from({{0, 1, 2, 3}, {3, 2, 0, 1}});
    const auto metrics = daf::compute_metrics(result, probes, gallery);

    EXPECT_EQ(metrics.evaluable, 2u);
    ASSERT_TRUE(metrics.per_query_ap[0].has_value());
    ASSERT_TRUE(metrics.per_query_ap[1].has_value());
    EXPECT_DOUBLE_EQ(*metrics.per_query_ap[0], 1.0);
    EXPECT_DOUBLE_EQ(*metrics.per_query_ap[1], 0.5);
    EXPECT_DOUBLE_EQ(metrics.map_score, 0.75);
    EXPECT_DOUBLE_EQ(metrics.cmc.at(1), 0.5);
    EXPECT_DOUBLE_EQ(metrics.cmc.at(5), 1.0);
    EXPECT_DOUBLE_EQ(metrics.cmc.at(10), 1.0);
    EXPECT_DOUBLE_EQ(metrics.cmc.at(20), 1.0);
}

TEST(ComputeMetrics, UnevaluableProbesAreExcludedFromAverages) {
    // Probe 1's person appears only under its own camera.
    const daf::GroundTruth probes{{1, 0}, {9, 3}};
    const daf::GroundTruth gallery{{1, 1}, {9, 3}, {2, 1}};
    const auto result = ranking_from({{0, 1, 2}, {0, 1, 2}});
    const auto metrics = daf::compute_metrics(result, probes, gallery);
    EXPECT_EQ(metrics.evaluable, 1u);
    EXPECT_FALSE(metrics.per_query_ap[1].has_value());
    EXPECT_DOUBLE_EQ(metrics.map_score, 1.0);
}

TEST(ComputeMetrics, ThrowsWhenNothingIsEvaluable) {
    const daf::GroundTruth probes{{1, 0}};
    const daf::GroundTruth gallery{{1, 0}, {2, 0}};
    const auto result = ranking_from({{0, 1}});
    EXPECT_THROW(daf::compute_metrics(result, probes, gallery), daf::Error);
}

TEST(ComputeMetrics, RejectsShapeMismatches) {
    const daf::GroundTruth probes{{1, 0}};
    const daf::GroundTruth gallery{{1, 1}, {2, 0}};
    EXPECT_THROW(daf::compute_metrics(ranking_from({{0, 1}, {1, 0}}), probes, gallery),
                 daf::ShapeError);
    EXPECT_THROW(daf::compute_metrics(ranking_from({{0}}), probes, gallery), daf::ShapeError);
}

struct RandomInstance {
    std::vector<std::vector<std::uint32_t>> order;
    daf::GroundTruth probes;
    daf::GroundTruth gallery;
};

RandomInstance random_instance(std::mt19937_64& rng) {
    const std::size_t np = 1 + rng() % 8;
    const std::size_t ng = 10 + rng() % 51;
    RandomInstance inst;
    for (std::size_t p = 0; p < np; ++p) {
        inst.probes.push_back({static_cast<std::int64_t>(rng() % 6),
                               static_cast<std::int64_t>(rng() % 3)});
    }
    for (std::size_t g = 0; g < ng; ++g) {
        inst.gallery.push_back({static_cast<std::int64_t>(rng() % 6),
                                static_cast<std::int64_t>(rng() % 3)});
    }
    // Guarantee at least one evaluable probe.
    inst.gallery[0] = {inst.probes[0].person_id, (inst.probes[0].camera_id + 1) % 3};
    for (std::size_t p = 0; p < np; ++p) {
        std::vector<std::uint32_t> order(ng);
        std::iota(order.begin(), order.end(), 0u);
        std::shuffle(order.begin(), order.end(), rng);
        inst.order.push_back(std::move(order));
    }
    return inst;
}

std::vector<dafref::LabelRef> to_ref(const daf::GroundTruth& truth) {
    std::vector<dafref::LabelRef> out;
    for (const auto& l : truth) out.push_back({l.person_id, l.camera_id});
    return out;
}

TEST(ComputeMetrics, AgreesWithQuadraticReferenceScorer) {
    std::mt19937_64 rng(163);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = random_instance(rng);
        const auto metrics =
            daf::compute_metrics(ranking_from(inst.order), inst.probes, inst.gallery);
        const auto ref = dafref::score(inst.order, to_ref(inst.probes), to_ref(inst.gallery));

        EXPECT_EQ(metrics.evaluable, static_cast<std::size_t>(ref.evaluable));
        EXPECT_NEAR(metrics.map_score, ref.map, 1e-12);
        EXPECT_NEAR(metrics.cmc.at(1), ref.rank1, 1e-12);
        EXPECT_NEAR(metrics.cmc.at(5), ref.rank5, 1e-12);
        EXPECT_NEAR(metrics.cmc.at(10), ref.rank10, 1e-12);
        EXPECT_NEAR(metrics.cmc.at(20), ref.rank20, 1e-12);
        for (std::size_t p = 0; p < inst.probes.size(); ++p) {
            if (metrics.per_query_ap[p].has_value()) {
                EXPECT_NEAR(*metrics.per_query_ap[p], ref.ap[p], 1e-12);
            } else {
                EXPECT_EQ(ref.ap[p], -1.0);
            }
        }
        // CMC is monotone in k.
        EXPECT_LE(metrics.cmc.at(1), metrics.cmc.at(5));
        EXPECT_LE(metrics.cmc.at(5), metrics.cmc.at(10));
        EXPECT_LE(metrics.cmc.at(10), metrics.cmc.at(20));
    }
}

TEST(ComputeMetrics, RemovingAJunkEntryChangesNothing) {
    std::mt19937_64 rng(167);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = random_instance(rng);
        // Plant a junk entry for probe 0 somewhere in the gallery.
        inst.gallery[1] = {inst.probes[0].person_id, inst.probes[0].camera_id};

        const auto before =
            daf::compute_metrics(ranking_from(inst.order), inst.probes, inst.gallery);
        if (!before.per_query_ap[0].has_value()) continue;

        // Remove gallery entity 1 for probe 0's scoring: drop it from
        // the ranked list and from the labels, shifting indices down.
        std::vector<std::uint32_t> reduced_order;
        for (std::uint32_t g : inst.order[0]) {
            if (g == 1) continue;
            reduced_order.push_back(g > 1 ? g - 1 : g);
        }
        daf::GroundTruth reduced_gallery = inst.gallery;
        reduced_gallery.erase(reduced_gallery.begin() + 1);
        const daf::GroundTruth one_probe{inst.probes[0]};
        const auto after =
            daf::compute_metrics(ranking_from({reduced_order}), one_probe, reduced_gallery);
        EXPECT_DOUBLE_EQ(*after.per_query_ap[0], *before.per_query_ap[0]);
    }
}

TEST(GenerateSynthetic, ShapesRolesAndCameraAssignment) {
    const auto data = daf::generate_synthetic(5, 7, 16, 0.3, 3, 42);
    EXPECT_EQ(data.probes.count(), 5u);
    EXPECT_EQ(data.probes.dim(), 16u);
    EXPECT_EQ(data.galleries.count(), 5u * 6u);
    EXPECT_EQ(data.probe_truth.size(), 5u);
    EXPECT_EQ(data.gallery_truth.size(), 30u);
    EXPECT_EQ(data.probes.role, daf::Role::probe);
    EXPECT_EQ(data.galleries.role, daf::Role::gallery);

    for (std::size_t p = 0; p < 5; ++p) {
        EXPECT_EQ(data.probe_truth[p].person_id, static_cast<std::int64_t>(p));
        EXPECT_EQ(data.probe_truth[p].camera_id, 0);
    }
    // Gallery samples s = 1..6 of each identity get cameras s mod 3.
    for (std::size_t i = 0; i < 30; ++i) {
        const std::size_t s = 1 + i % 6;
        EXPECT_EQ(data.gallery_truth[i].person_id, static_cast<std::int64_t>(i / 6));
        EXPECT_EQ(data.gallery_truth[i].camera_id, static_cast<std::int64_t>(s % 3));
    }
}

TEST(GenerateSynthetic, DeterministicPerSeed) {
    const auto a = daf::generate_synthetic(4, 3, 8, 0.5, 2, 7);
    const auto b = daf::generate_synthetic(4, 3, 8, 0.5, 2, 7);
    const auto c = daf::generate_synthetic(4, 3, 8, 0.5, 2, 8);
    EXPECT_EQ(a.probes.values, b.probes.values);
    EXPECT_EQ(a.galleries.values, b.galleries.values);
    EXPECT_NE(a.probes.values, c.probes.values);
}

TEST(GenerateSynthetic, ZeroNoiseGivesPerfectBaselineRanking) {
    const auto data = daf::generate_synthetic(6, 4, 12, 0.0, 2, 3);
    const auto result = daf::initial_ranking(data.probes, data.galleries);
    const auto metrics = daf::compute_metrics(result, data.probe_truth, data.gallery_truth);
    EXPECT_DOUBLE_EQ(metrics.map_score, 1.0);
    EXPECT_DOUBLE_EQ(metrics.cmc.at(1), 1.0);
}

TEST(GenerateSynthetic, MidNoiseKeepsBaselineBelowPerfect) {
    // At noise 0.6 the perturbation carries most of the sample energy,
    // so the plain Euclidean ranking must make mistakes.
    const auto data = daf::generate_synthetic(50, 6, 64, 0.6, 4, 0);
    const auto result = daf::initial_ranking(data.probes, data.galleries);
    const auto metrics = daf::compute_metrics(result, data.probe_truth, data.gallery_truth);
    EXPECT_LT(metrics.map_score, 1.0);
    EXPECT_GT(metrics.map_score, 0.2);
}

TEST(GenerateSynthetic, RejectsInvalidSizes) {
    EXPECT_THROW(daf::generate_synthetic(1, 4, 8, 0.1, 2, 0), daf::InvalidParameterError);
    EXPECT_THROW(daf::generate_synthetic(4, 1, 8, 0.1, 2, 0), daf::InvalidParameterError);
    EXPECT_THROW(daf::generate_synthetic(4, 4, 8, 0.1, 1, 0), daf::InvalidParameterError);
    EXPECT_THROW(daf::generate_synthetic(4, 4, 0, 0.1, 2, 0), daf::InvalidParameterError);
    EXPECT_THROW(daf::generate_synthetic(4, 4, 8, -0.5, 2, 0), daf::InvalidParameterError);
    EXPECT_THROW(daf::generate_synthetic(4, 4, 8, 1.0, 2, 0), daf::InvalidParameterError);
    EXPECT_THROW(daf::generate_synthetic(4, 4, 8, 1.5, 2, 0), daf::InvalidParameterError);
}

}  // namespace
