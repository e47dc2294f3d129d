#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "daf/types.hpp"

namespace daf {

/// Coordinate-wise power-mean fusion of L sparse vectors:
///   out[j] = ((1/L) * sum_l v_l[j]^alpha)^(1/alpha), with 0^alpha = 0.
/// The output support is the union of the input supports; coordinates
/// absent from every input stay absent. alpha = 1 reduces to the
/// arithmetic mean (computed exactly), and a single input is returned
/// unchanged.
inline FusedVector fuse(std::span<const EncodedVector> vectors, double fusion_exponent) {
    if (!(fusion_exponent > 0.0)) {
        throw InvalidParameterError("fusion_exponent (alpha) must be > 0");
    }
    if (vectors.empty()) {
        throw InvalidParameterError("fuse requires at least one input vector");
    }
    for (const auto& v : vectors) {
        if (v.dimension != vectors.front().dimension) {
            throw ShapeError("fuse inputs must share one dimension");
        }
    }
    if (vectors.size() == 1) return vectors.front();

    std::vector<SparseEntry> merged;
    for (const auto& v : vectors) {
        merged.insert(merged.end(), v.entries.begin(), v.entries.end());
    }
    // Stable: entries sharing an index keep input order, so sums are
    // accumulated in input order and results are reproducible.
    std::stable_sort(merged.begin(), merged.end(),
                     [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });

    const double count = static_cast<double>(vectors.size());
    const bool arithmetic = fusion_exponent == 1.0;

    FusedVector out;
    out.dimension = vectors.front().dimension;
    for (std::size_t i = 0; i < merged.size();) {
        const std::uint32_t idx = merged[i].index;
        double sum = 0.0;
        for (; i < merged.size() && merged[i].index == idx; ++i) {
            sum += arithmetic ? merged[i].value : std::pow(merged[i].value, fusion_exponent);
        }
        const double mean = sum / count;
        out.entries.push_back({idx, arithmetic ? mean : std::pow(mean, 1.0 / fusion_exponent)});
    }
    return out;
}

/// Generalized Jaccard distance between two nonnegative sparse
/// vectors: 1 - sum(min) / sum(max) over all coordinates. Two all-zero
/// vectors are at distance 1.
inline double jaccard_distance(const SparseVector& a, const SparseVector& b) {
    if (a.dimension != b.dimension) {
        throw ShapeError("jaccard_distance operands must share one dimension");
    }
    double min_sum = 0.0;
    double max_sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        const auto& ea = a.entries[i];
        const auto& eb = b.entries[j];
        if (ea.index == eb.index) {
            min_sum += std::min(ea.value, eb.value);
            max_sum += std::max(ea.value, eb.value);
            ++i;
            ++j;
        } else if (ea.index < eb.index) {
            max_sum += ea.value;
            ++i;
        } else {
            max_sum += eb.value;
            ++j;
        }
    }
    for (; i < a.entries.size(); ++i) max_sum += a.entries[i].value;
    for (; j < b.entries.size(); ++j) max_sum += b.entries[j].value;
    if (max_sum == 0.0) return 1.0;
    return 1.0 - min_sum / max_sum;
}

struct Posting {
    std::uint32_t entity;
    double value;
};

/// Coordinate-major postings over a set of sparse gallery vectors,
/// plus each vector's value sum. Immutable once built; any number of
/// concurrent batch evaluations may share one index.
class InvertedIndex {
public:
    InvertedIndex() = default;

    explicit InvertedIndex(std::span<const SparseVector> gallery_vectors) {
        dimension_ = gallery_vectors.empty() ? 0 : gallery_vectors.front().dimension;
        norms_.reserve(gallery_vectors.size());

        std::vector<std::size_t> counts(dimension_ + 1, 0);
        for (const auto& v : gallery_vectors) {
            if (v.dimension != dimension_) {
                throw ShapeError("inverted index inputs must share one dimension");
            }
            for (const auto& e : v.entries) ++counts[e.index + 1];
            norms_.push_back(v.norm());
        }

        offsets_.assign(counts.begin(), counts.end());
        for (std::size_t c = 1; c < offsets_.size(); ++c) offsets_[c] += offsets_[c - 1];

        postings_.resize(offsets_.empty() ? 0 : offsets_.back());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::uint32_t entity = 0; entity < gallery_vectors.size(); ++entity) {
            for (const auto& e : gallery_vectors[entity].entries) {
                postings_[cursor[e.index]++] = {entity, e.value};
            }
        }
    }

    std::uint32_t dimension() const { return dimension_; }
    std::size_t entity_count() const { return norms_.size(); }
    std::size_t posting_count() const { return postings_.size(); }

    double norm(std::uint32_t entity) const { return norms_[entity]; }

    std::span<const Posting> postings(std::uint32_t coordinate) const {
        return {postings_.data() + offsets_[coordinate],
                offsets_[coordinate + 1] - offsets_[coordinate]};
    }

private:
    std::uint32_t dimension_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<Posting> postings_;
    std::vector<double> norms_;
};

inline InvertedIndex build_inverted_index(std::span<const SparseVector> gallery_vectors) {
    return InvertedIndex(gallery_vectors);
}

/// Reusable accumulator for batch Jaccard evaluations. Keeps the
/// per-entity min-sums and the list of touched entities so that only
/// entities sharing support with the query pay any per-entity cost.
class JaccardAccumulator {
public:
    void reset(std::size_t entity_count) {
        min_sums_.assign(entity_count, 0.0);
        touched_.clear();
        touched_.reserve(256);
    }

    void ensure(std::size_t entity_count) {
        if (min_sums_.size() != entity_count) {
            reset(entity_count);
        } else {
            for (std::uint32_t e : touched_) min_sums_[e] = 0.0;
            touched_.clear();
        }
    }

    std::vector<double> min_sums_;
    std::vector<std::uint32_t> touched_;
};

/// Distances from one query vector to every indexed entity, written
/// into out. Walks only the postings of the query's support,
/// accumulating sum(min); sum(max) follows from the identity
/// sum(max) = sum(a) + sum(b) - sum(min). Entities sharing no support
/// with the query keep the default distance 1.
inline void batch_jaccard_into(const SparseVector& query, const InvertedIndex& index,
                               std::span<double> out, JaccardAccumulator& acc) {
    if (query.dimension != index.dimension() && index.entity_count() > 0) {
        throw ShapeError("query dimension does not match the inverted index");
    }
    if (out.size() != index.entity_count()) {
        throw ShapeError("output size does not match the indexed entity count");
    }

    acc.ensure(index.entity_count());
    std::fill(out.begin(), out.end(), 1.0);
    if (index.entity_count() == 0) return;

    for (const auto& qe : query.entries) {
        for (const auto& posting : index.postings(qe.index)) {
            double& slot = acc.min_sums_[posting.entity];
            if (slot == 0.0) acc.touched_.push_back(posting.entity);
            slot += std::min(qe.value, posting.value);
        }
    }

    const double query_norm = query.norm();
    for (std::uint32_t entity : acc.touched_) {
        const double min_sum = acc.min_sums_[entity];
        const double max_sum = query_norm + index.norm(entity) - min_sum;
        out[entity] = 1.0 - min_sum / max_sum;
    }
}

inline std::vector<double> batch_jaccard(const SparseVector& query,
                                         const InvertedIndex& index) {
    std::vector<double> out(index.entity_count());
    JaccardAccumulator acc;
    batch_jaccard_into(query, index, out, acc);
    return out;
}

}  // namespace daf
