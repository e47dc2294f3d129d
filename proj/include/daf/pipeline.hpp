#pragma once

#include <numeric>
#include <utility>

#include "daf/core.hpp"
#include "daf/encoding.hpp"
#include "daf/fusion.hpp"
#include "daf/types.hpp"

namespace daf {

/// Final ranking of the gallery for each probe: gallery indices in
/// ascending distance order (ties by index) plus the distance matrix
/// itself. Distances lie in [0, 1].
struct RankingResult {
    std::vector<std::vector<std::uint32_t>> order;
    Matrix distances;

    std::size_t probe_count() const { return order.size(); }
};

/// Encodings produced by the final pass over one sub-feature, together
/// with the distance field that pass saw.
struct SubFeatureEncodings {
    std::vector<EncodedVector> probe_vectors;
    std::vector<EncodedVector> gallery_vectors;
    DistanceField field;
};

namespace detail {

inline void blend_into(Matrix& dist, const Matrix& intermediate, double lambda) {
    const double keep = 1.0 - lambda;
    double* d = dist.data();
    const double* m = intermediate.data();
    const std::size_t n = dist.rows() * dist.cols();
    for (std::size_t i = 0; i < n; ++i) d[i] = keep * d[i] + lambda * m[i];
}

inline std::vector<std::uint32_t> ascending_order(std::span<const double> distances) {
    std::vector<std::uint32_t> order(distances.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (distances[a] != distances[b]) return distances[a] < distances[b];
        return a < b;
    });
    return order;
}

inline RankingResult result_from_distances(Matrix distances) {
    RankingResult result;
    result.order.reserve(distances.rows());
    for (std::size_t p = 0; p < distances.rows(); ++p) {
        result.order.push_back(ascending_order(distances.row(p)));
    }
    result.distances = std::move(distances);
    return result;
}

}  // namespace detail

/// Runs T encoding passes over one sub-feature. Each pass ranks the
/// current distance field and encodes + enhances every probe and
/// gallery entity. Between passes the working distances are renewed by
/// blending in the Jaccard distances of the fresh encodings:
///   d := (1 - lambda) * d + lambda * d_jaccard
/// for both the probe-gallery and the gallery-gallery matrix; the
/// gallery-gallery matrix is then re-symmetrized and its diagonal
/// pinned to zero. The encodings of the last pass are returned.
inline SubFeatureEncodings iterate_subfeature(const DistanceField& initial,
                                              const ReRankParams& params) {
    params.validate();
    if (params.encode_neighbors >= initial.gallery_count()) {
        throw InvalidParameterError(
            "encode_neighbors (k1) must be smaller than the gallery size");
    }

    SubFeatureEncodings state;
    state.field = initial;
    const std::size_t np = initial.probe_count();
    const std::size_t ng = initial.gallery_count();

    for (std::uint32_t pass = 1; pass <= params.iterations; ++pass) {
        const RankTable ranks = build_rank_tables(state.field);

        auto probe_raw = encode_entities(ranks, Role::probe, params.encode_neighbors);
        auto gallery_raw = encode_entities(ranks, Role::gallery, params.encode_neighbors);
        state.probe_vectors = enhance_entities(probe_raw, gallery_raw, ranks, Role::probe,
                                               params.enhance_neighbors);
        state.gallery_vectors = enhance_entities(gallery_raw, gallery_raw, ranks,
                                                 Role::gallery, params.enhance_neighbors);

        if (pass == params.iterations) break;

        const InvertedIndex index(state.gallery_vectors);
        JaccardAccumulator acc;
        Matrix intermediate_qg(np, ng);
        for (std::size_t p = 0; p < np; ++p) {
            batch_jaccard_into(state.probe_vectors[p], index, intermediate_qg.row(p), acc);
        }
        Matrix intermediate_gg(ng, ng);
        for (std::size_t i = 0; i < ng; ++i) {
            batch_jaccard_into(state.gallery_vectors[i], index, intermediate_gg.row(i), acc);
        }

        detail::blend_into(state.field.query_gallery, intermediate_qg,
                           params.aggregating_factor);
        detail::blend_into(state.field.gallery_gallery, intermediate_gg,
                           params.aggregating_factor);

        // Repair the gallery-gallery invariants after the blend.
        Matrix& gg = state.field.gallery_gallery;
        for (std::size_t i = 0; i < ng; ++i) {
            gg(i, i) = 0.0;
            for (std::size_t j = i + 1; j < ng; ++j) {
                const double sym = 0.5 * (gg(i, j) + gg(j, i));
                gg(i, j) = sym;
                gg(j, i) = sym;
            }
        }
    }
    return state;
}

/// Ranks the gallery for every probe by the whole-feature normalized
/// Euclidean distance. Baseline against which the re-ranked result is
/// compared.
inline RankingResult initial_ranking(const FeatureMatrix& probes,
                                     const FeatureMatrix& galleries) {
    if (probes.dim() != galleries.dim()) {
        throw ShapeError("probe/gallery dimension mismatch: " + std::to_string(probes.dim()) +
                         " vs " + std::to_string(galleries.dim()));
    }
    return detail::result_from_distances(
        normalized_distance_matrix(probes.values, galleries.values));
}

/// Full re-ranking pipeline: divides the features into sub-features,
/// iteratively encodes each one, fuses every entity's encodings into a
/// single sparse vector and ranks the gallery by generalized Jaccard
/// distance between the fused vectors. Deterministic for a fixed seed.
inline RankingResult rerank(const FeatureMatrix& probes, const FeatureMatrix& galleries,
                            const ReRankParams& params) {
    if (probes.dim() != galleries.dim()) {
        throw ShapeError("probe/gallery dimension mismatch: " + std::to_string(probes.dim()) +
                         " vs " + std::to_string(galleries.dim()));
    }
    params.validate_for(probes.dim(), galleries.count());

    const auto partition =
        split_features(galleries, params.sub_feature_count, params.split, params.seed);

    const std::size_t np = probes.count();
    const std::size_t ng = galleries.count();
    const std::size_t parts = partition.part_count();

    // Per-entity encodings across sub-features; sub-features are
    // processed one at a time so only one distance field is live.
    std::vector<std::vector<EncodedVector>> probe_parts(np);
    std::vector<std::vector<EncodedVector>> gallery_parts(ng);
    for (auto& v : probe_parts) v.reserve(parts);
    for (auto& v : gallery_parts) v.reserve(parts);

    for (const auto& part : partition.parts) {
        const auto probe_sub = extract_sub_feature(probes, part);
        const auto gallery_sub = extract_sub_feature(galleries, part);
        auto encodings =
            iterate_subfeature(compute_initial_distances(probe_sub, gallery_sub), params);
        for (std::size_t p = 0; p < np; ++p) {
            probe_parts[p].push_back(std::move(encodings.probe_vectors[p]));
        }
        for (std::size_t i = 0; i < ng; ++i) {
            gallery_parts[i].push_back(std::move(encodings.gallery_vectors[i]));
        }
    }

    std::vector<FusedVector> fused_galleries;
    fused_galleries.reserve(ng);
    for (std::size_t i = 0; i < ng; ++i) {
        fused_galleries.push_back(fuse(gallery_parts[i], params.fusion_exponent));
        gallery_parts[i].clear();
    }
    const InvertedIndex index(fused_galleries);

    JaccardAccumulator acc;
    Matrix distances(np, ng);
    for (std::size_t p = 0; p < np; ++p) {
        const FusedVector fused_probe = fuse(probe_parts[p], params.fusion_exponent);
        batch_jaccard_into(fused_probe, index, distances.row(p), acc);
    }
    return detail::result_from_distances(std::move(distances));
}

}  // namespace daf
