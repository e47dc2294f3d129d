#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "daf/types.hpp"

namespace daf {

/// Divides the dimension indices {0..feature_dim-1} into part_count
/// parts whose sizes differ by at most one. The contiguous strategy
/// assigns the first (M mod L) parts ceil(M/L) consecutive indices and
/// the remaining parts floor(M/L); the random strategy applies a
/// seed-determined permutation of the indices first. Indices within
/// each part are returned in ascending order.
inline SubFeaturePartition split_dimensions(std::size_t feature_dim,
                                            std::uint32_t part_count,
                                            SplitStrategy strategy,
                                            std::uint64_t seed) {
    if (part_count < 1 || part_count > feature_dim) {
        throw InvalidParameterError(
            "part count must satisfy 1 <= L <= M, got L=" + std::to_string(part_count) +
            " M=" + std::to_string(feature_dim));
    }

    std::vector<std::uint32_t> order(feature_dim);
    std::iota(order.begin(), order.end(), 0u);
    if (strategy == SplitStrategy::random) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }

    const std::size_t base = feature_dim / part_count;
    const std::size_t remainder = feature_dim % part_count;

    SubFeaturePartition partition;
    partition.parts.reserve(part_count);
    std::size_t pos = 0;
    for (std::uint32_t p = 0; p < part_count; ++p) {
        const std::size_t size = base + (p < remainder ? 1 : 0);
        std::vector<std::uint32_t> part(order.begin() + pos, order.begin() + pos + size);
        std::sort(part.begin(), part.end());
        partition.parts.push_back(std::move(part));
        pos += size;
    }
    return partition;
}

inline SubFeaturePartition split_features(const FeatureMatrix& features,
                                          std::uint32_t part_count,
                                          SplitStrategy strategy,
                                          std::uint64_t seed) {
    return split_dimensions(features.dim(), part_count, strategy, seed);
}

/// Gathers the columns named by part into a new feature matrix.
inline FeatureMatrix extract_sub_feature(const FeatureMatrix& features,
                                         const std::vector<std::uint32_t>& part) {
    FeatureMatrix sub;
    sub.role = features.role;
    sub.values = Matrix(features.count(), part.size());
    for (std::size_t r = 0; r < features.count(); ++r) {
        auto src = features.values.row(r);
        auto dst = sub.values.row(r);
        for (std::size_t c = 0; c < part.size(); ++c) dst[c] = src[part[c]];
    }
    return sub;
}

/// Scales every row to unit Euclidean norm; all-zero rows are left
/// untouched.
inline Matrix unit_normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        double sq = 0.0;
        for (double v : row) sq += v * v;
        if (sq > 0.0) {
            const double norm = std::sqrt(sq);
            for (double& v : row) v /= norm;
        }
    }
    return out;
}

/// Pairwise distances between unit-normalized rows of a and b, as half
/// the Euclidean distance so every entry lies in [0, 1]. Inputs are
/// normalized internally; callers pass raw rows.
inline Matrix normalized_distance_matrix(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("feature dimension mismatch: " + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()));
    }
    const Matrix an = unit_normalize_rows(a);
    const Matrix bn = unit_normalize_rows(b);
    Matrix dist(a.rows(), b.rows());
    for (std::size_t i = 0; i < an.rows(); ++i) {
        auto u = an.row(i);
        for (std::size_t j = 0; j < bn.rows(); ++j) {
            auto v = bn.row(j);
            double sq = 0.0;
            for (std::size_t c = 0; c < u.size(); ++c) {
                const double d = u[c] - v[c];
                sq += d * d;
            }
            dist(i, j) = std::min(std::sqrt(sq) * 0.5, 1.0);
        }
    }
    return dist;
}

/// Initial distances of one sub-feature: probe-gallery and
/// gallery-gallery matrices under the normalized Euclidean metric.
/// The gallery-gallery matrix is symmetric with an exactly zero
/// diagonal.
inline DistanceField compute_initial_distances(const FeatureMatrix& probe_sub,
                                               const FeatureMatrix& gallery_sub) {
    if (probe_sub.dim() != gallery_sub.dim()) {
        throw ShapeError("probe/gallery dimension mismatch: " + std::to_string(probe_sub.dim()) +
                         " vs " + std::to_string(gallery_sub.dim()));
    }
    DistanceField field;
    field.query_gallery = normalized_distance_matrix(probe_sub.values, gallery_sub.values);

    const Matrix gn = unit_normalize_rows(gallery_sub.values);
    const std::size_t n = gn.rows();
    field.gallery_gallery = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto u = gn.row(i);
        field.gallery_gallery(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            auto v = gn.row(j);
            double sq = 0.0;
            for (std::size_t c = 0; c < u.size(); ++c) {
                const double d = u[c] - v[c];
                sq += d * d;
            }
            const double dij = std::min(std::sqrt(sq) * 0.5, 1.0);
            field.gallery_gallery(i, j) = dij;
            field.gallery_gallery(j, i) = dij;
        }
    }
    return field;
}

namespace detail {

/// Writes 1-based ranks of one distance row into out. Ties are broken
/// by ascending gallery index, except that the entity itself (self >= 0)
/// always wins its tie group so a gallery entity ranks itself first.
inline void rank_row(std::span<const double> distances, std::ptrdiff_t self,
                     std::span<std::uint32_t> out,
                     std::vector<std::uint32_t>& order_scratch) {
    const std::size_t n = distances.size();
    order_scratch.resize(n);
    std::iota(order_scratch.begin(), order_scratch.end(), 0u);
    std::sort(order_scratch.begin(), order_scratch.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                  if (distances[a] != distances[b]) return distances[a] < distances[b];
                  if (a == static_cast<std::uint32_t>(self)) return true;
                  if (b == static_cast<std::uint32_t>(self)) return false;
                  return a < b;
              });
    for (std::size_t r = 0; r < n; ++r) out[order_scratch[r]] = static_cast<std::uint32_t>(r + 1);
}

}  // namespace detail

/// Ranks every gallery item for each probe and for each gallery entity
/// by ascending distance. Deterministic: ties resolve by ascending
/// gallery index (self first for gallery entities).
inline RankTable build_rank_tables(const DistanceField& dist) {
    const std::size_t np = dist.probe_count();
    const std::size_t ng = dist.gallery_count();
    RankTable table(np, ng);
    std::vector<std::uint32_t> scratch;
    for (std::size_t p = 0; p < np; ++p) {
        detail::rank_row(dist.query_gallery.row(p), -1, table.probe_row(p), scratch);
    }
    for (std::size_t i = 0; i < ng; ++i) {
        detail::rank_row(dist.gallery_gallery.row(i), static_cast<std::ptrdiff_t>(i),
                         table.gallery_row(i), scratch);
    }
    return table;
}

}  // namespace daf
