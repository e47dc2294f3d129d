#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "daf/types.hpp"

namespace daf {

namespace detail {

/// Collects the galleries an entity ranks within the top limit, as
/// (gallery index, rank) pairs in ascending index order.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> top_ranked(
    std::span<const std::uint32_t> rank_row, std::uint32_t limit) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> top;
    for (std::uint32_t j = 0; j < rank_row.size(); ++j) {
        if (rank_row[j] <= limit) top.emplace_back(j, rank_row[j]);
    }
    return top;
}

}  // namespace detail

/// Rank-based similarity between an entity and gallery item j: the
/// reciprocal of j's rank in the entity's list, plus, for every
/// neighbor m the entity ranks within its top k1, the reciprocal of
/// j's rank in m's list damped by m's own rank. Neighbors that are
/// ranked close to both the entity and each other score high even when
/// their raw distances disagree.
inline double contextual_similarity(const RankTable& ranks, EntityRef entity,
                                    std::uint32_t gallery_index, std::uint32_t k1) {
    const auto row = ranks.row(entity);
    double sim = 1.0 / row[gallery_index];
    for (std::uint32_t m = 0; m < row.size(); ++m) {
        if (row[m] > k1) continue;
        sim += 1.0 / (static_cast<double>(ranks.gallery_rank(m, gallery_index)) *
                      (1.0 + static_cast<double>(row[m])));
    }
    return sim;
}

/// Encodes an entity's neighborhood into a sparse vector: coordinate j
/// holds the contextual similarity to gallery j for exactly the
/// galleries the entity ranks within its top k1; every other
/// coordinate is zero.
inline EncodedVector encode_vector(const RankTable& ranks, EntityRef entity,
                                   std::uint32_t k1) {
    const auto row = ranks.row(entity);
    const auto top = detail::top_ranked(row, k1);

    EncodedVector vec;
    vec.dimension = static_cast<std::uint32_t>(ranks.gallery_count());
    vec.entries.reserve(top.size());
    for (const auto& [j, rank_j] : top) {
        double sim = 1.0 / rank_j;
        for (const auto& [m, rank_m] : top) {
            sim += 1.0 / (static_cast<double>(ranks.gallery_rank(m, j)) *
                          (1.0 + static_cast<double>(rank_m)));
        }
        vec.entries.push_back({j, sim});
    }
    return vec;
}

/// Averages an entity's encoded vector with the pre-enhancement
/// encodings of its k2 nearest galleries:
///   (own + sum of neighbor vectors) / (1 + k2).
/// All right-hand vectors are the pre-enhancement snapshot, so the
/// pass is order-independent. k2 = 0 returns own unchanged.
inline EncodedVector neighbor_enhance(const EncodedVector& own,
                                      std::span<const EncodedVector> gallery_vectors,
                                      const RankTable& ranks, EntityRef entity,
                                      std::uint32_t k2) {
    if (k2 == 0) return own;

    const auto row = ranks.row(entity);
    std::vector<const EncodedVector*> sources;
    sources.reserve(k2 + 1);
    sources.push_back(&own);
    for (std::uint32_t i = 0; i < row.size(); ++i) {
        if (row[i] <= k2) sources.push_back(&gallery_vectors[i]);
    }

    std::vector<SparseEntry> merged;
    for (const auto* src : sources) {
        merged.insert(merged.end(), src->entries.begin(), src->entries.end());
    }
    // Stable: entries sharing an index keep source order (own vector
    // first, then neighbors by ascending index), so sums reproduce.
    std::stable_sort(merged.begin(), merged.end(),
                     [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });

    EncodedVector out;
    out.dimension = own.dimension;
    const double divisor = 1.0 + static_cast<double>(k2);
    for (std::size_t i = 0; i < merged.size();) {
        const std::uint32_t idx = merged[i].index;
        double sum = 0.0;
        for (; i < merged.size() && merged[i].index == idx; ++i) sum += merged[i].value;
        out.entries.push_back({idx, sum / divisor});
    }
    return out;
}

/// Encodes every entity on one side of the rank table.
inline std::vector<EncodedVector> encode_entities(const RankTable& ranks, Role side,
                                                  std::uint32_t k1) {
    const std::size_t count =
        side == Role::probe ? ranks.probe_count() : ranks.gallery_count();
    std::vector<EncodedVector> vectors;
    vectors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        vectors.push_back(encode_vector(ranks, {side, i}, k1));
    }
    return vectors;
}

/// Enhances every vector on one side against a frozen snapshot of the
/// pre-enhancement gallery encodings.
inline std::vector<EncodedVector> enhance_entities(
    std::span<const EncodedVector> own_vectors,
    std::span<const EncodedVector> gallery_vectors, const RankTable& ranks, Role side,
    std::uint32_t k2) {
    std::vector<EncodedVector> out;
    out.reserve(own_vectors.size());
    for (std::uint32_t i = 0; i < own_vectors.size(); ++i) {
        out.push_back(neighbor_enhance(own_vectors[i], gallery_vectors, ranks, {side, i}, k2));
    }
    return out;
}

}  // namespace daf
