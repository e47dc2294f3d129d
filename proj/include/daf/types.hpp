#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace daf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A parameter violates its documented range or relation.
struct InvalidParameterError : Error {
    using Error::Error;
};

/// Two operands have incompatible dimensions.
struct ShapeError : Error {
    using Error::Error;
};

/// A file could not be parsed; the message names the offending
/// byte offset or line number.
struct LoadError : Error {
    using Error::Error;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Role { probe, gallery };

enum class SplitStrategy { contiguous, random };

enum class DistanceMetric { euclidean_normalized };

/// Tuning knobs of the re-ranking pipeline.
///
/// Defaults match the reference configuration for 2,048-dim deep
/// features: 11 sub-features, 20 encoding neighbors, 4 enhancement
/// neighbors, fusion exponent 0.5, two encoding passes blended with
/// aggregating factor 0.2.
struct ReRankParams {
    /// Number of sub-features the feature vector is divided into (L).
    std::uint32_t sub_feature_count = 11;
    /// Neighborhood size used when encoding rank context (k1).
    std::uint32_t encode_neighbors = 20;
    /// Neighborhood size used for neighbor enhancement (k2).
    std::uint32_t enhance_neighbors = 4;
    /// Exponent of the power-mean fusion operator (alpha).
    double fusion_exponent = 0.5;
    /// Weight of the intermediate distance when renewing the working
    /// distance between encoding passes (lambda), in [0, 1).
    double aggregating_factor = 0.2;
    /// Number of encoding passes (T).
    std::uint32_t iterations = 2;

    SplitStrategy split = SplitStrategy::contiguous;
    std::uint64_t seed = 0;
    DistanceMetric metric = DistanceMetric::euclidean_normalized;

    /// Data-independent range checks; one message per violated field.
    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (sub_feature_count < 1) {
            out.push_back("sub_feature_count (L) must be >= 1");
        }
        if (enhance_neighbors < 1 || encode_neighbors < enhance_neighbors) {
            out.push_back("neighborhood sizes must satisfy 1 <= k2 <= k1, got k1=" +
                          std::to_string(encode_neighbors) +
                          " k2=" + std::to_string(enhance_neighbors));
        }
        if (!(fusion_exponent > 0.0)) {
            out.push_back("fusion_exponent (alpha) must be > 0");
        }
        if (!(aggregating_factor >= 0.0 && aggregating_factor < 1.0)) {
            out.push_back("aggregating_factor (lambda) must lie in [0, 1)");
        }
        if (iterations < 1) {
            out.push_back("iterations (T) must be >= 1");
        }
        return out;
    }

    /// Checks data-independent parameter ranges.
    void validate() const {
        const auto problems = violations();
        if (problems.empty()) return;
        std::string joined;
        for (const auto& problem : problems) {
            if (!joined.empty()) joined += "; ";
            joined += problem;
        }
        throw InvalidParameterError(joined);
    }

    /// Checks ranges that depend on the data sizes.
    void validate_for(std::size_t feature_dim, std::size_t gallery_count) const {
        validate();
        if (sub_feature_count > feature_dim) {
            throw InvalidParameterError(
                "sub_feature_count (L=" + std::to_string(sub_feature_count) +
                ") exceeds the feature dimension M=" + std::to_string(feature_dim));
        }
        if (encode_neighbors >= gallery_count) {
            throw InvalidParameterError(
                "encode_neighbors (k1=" + std::to_string(encode_neighbors) +
                ") must be smaller than the gallery size N_g=" + std::to_string(gallery_count));
        }
    }
};

/// Dense feature matrix; one entity per row, M dimensions per column.
struct FeatureMatrix {
    Matrix values;
    Role role = Role::gallery;

    std::size_t count() const { return values.rows(); }
    std::size_t dim() const { return values.cols(); }
};

/// Ordered division of the feature dimensions {0..M-1} into parts
/// whose sizes differ by at most one.
struct SubFeaturePartition {
    std::vector<std::vector<std::uint32_t>> parts;

    std::size_t part_count() const { return parts.size(); }
};

/// Paired probe-gallery and gallery-gallery distance matrices for one
/// (sub-)feature. gallery_gallery is symmetric with zero diagonal and
/// all entries lie in [0, 1].
struct DistanceField {
    Matrix query_gallery;
    Matrix gallery_gallery;

    std::size_t probe_count() const { return query_gallery.rows(); }
    std::size_t gallery_count() const { return gallery_gallery.rows(); }
};

/// Identifies one probe or one gallery entity.
struct EntityRef {
    Role kind = Role::probe;
    std::uint32_t index = 0;
};

/// Per-entity 1-based ranks of every gallery item under a distance
/// field. Each row is a permutation of 1..N_g; a gallery entity always
/// ranks itself first. Probe rows range over the gallery set only.
class RankTable {
public:
    RankTable() = default;
    RankTable(std::size_t probe_count, std::size_t gallery_count)
        : probe_count_(probe_count),
          gallery_count_(gallery_count),
          probe_ranks_(probe_count * gallery_count, 0),
          gallery_ranks_(gallery_count * gallery_count, 0) {}

    std::size_t probe_count() const { return probe_count_; }
    std::size_t gallery_count() const { return gallery_count_; }

    std::uint32_t probe_rank(std::size_t probe, std::size_t gallery) const {
        return probe_ranks_[probe * gallery_count_ + gallery];
    }
    std::uint32_t gallery_rank(std::size_t entity, std::size_t gallery) const {
        return gallery_ranks_[entity * gallery_count_ + gallery];
    }

    std::uint32_t rank(EntityRef entity, std::size_t gallery) const {
        return entity.kind == Role::probe ? probe_rank(entity.index, gallery)
                                          : gallery_rank(entity.index, gallery);
    }

    std::span<std::uint32_t> probe_row(std::size_t probe) {
        return {probe_ranks_.data() + probe * gallery_count_, gallery_count_};
    }
    std::span<const std::uint32_t> probe_row(std::size_t probe) const {
        return {probe_ranks_.data() + probe * gallery_count_, gallery_count_};
    }
    std::span<std::uint32_t> gallery_row(std::size_t entity) {
        return {gallery_ranks_.data() + entity * gallery_count_, gallery_count_};
    }
    std::span<const std::uint32_t> gallery_row(std::size_t entity) const {
        return {gallery_ranks_.data() + entity * gallery_count_, gallery_count_};
    }

    std::span<const std::uint32_t> row(EntityRef entity) const {
        return entity.kind == Role::probe ? probe_row(entity.index) : gallery_row(entity.index);
    }

private:
    std::size_t probe_count_ = 0;
    std::size_t gallery_count_ = 0;
    std::vector<std::uint32_t> probe_ranks_;
    std::vector<std::uint32_t> gallery_ranks_;
};

struct SparseEntry {
    std::uint32_t index;
    double value;

    bool operator==(const SparseEntry&) const = default;
};

/// Sparse nonnegative vector over the gallery coordinate space.
/// Entries are sorted by index and strictly positive; absent
/// coordinates are zero.
struct SparseVector {
    std::uint32_t dimension = 0;
    std::vector<SparseEntry> entries;

    std::size_t support_size() const { return entries.size(); }

    double value_at(std::uint32_t index) const {
        auto it = std::lower_bound(
            entries.begin(), entries.end(), index,
            [](const SparseEntry& e, std::uint32_t i) { return e.index < i; });
        return (it != entries.end() && it->index == index) ? it->value : 0.0;
    }

    /// Sum of all stored values.
    double norm() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.value;
        return s;
    }

    bool operator==(const SparseVector&) const = default;
};

/// Rank-context encoding of one entity over its k1 nearest galleries.
using EncodedVector = SparseVector;
/// Power-mean fusion of the per-sub-feature encodings of one entity.
using FusedVector = SparseVector;

}  // namespace daf
