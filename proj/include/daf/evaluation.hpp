#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <random>

#include "daf/pipeline.hpp"
#include "daf/types.hpp"

namespace daf {

struct Label {
    std::int64_t person_id = 0;
    std::int64_t camera_id = 0;
};

/// One entry per entity, indexed like the corresponding feature rows.
using GroundTruth = std::vector<Label>;

inline constexpr std::array<std::uint32_t, 4> kCmcRanks{1, 5, 10, 20};

struct Metrics {
    std::map<std::uint32_t, double> cmc;
    double map_score = 0.0;
    /// One slot per probe; disengaged for unevaluable probes.
    std::vector<std::optional<double>> per_query_ap;
    std::size_t evaluable = 0;
};

/// Gallery indices that participate in scoring for the given probe.
/// Entries sharing BOTH person and camera with the probe are junk and
/// are dropped; everything else stays. Ascending order.
inline std::vector<std::uint32_t> protocol_filter(const Label& probe,
                                                  const GroundTruth& gallery_truth) {
    std::vector<std::uint32_t> valid;
    valid.reserve(gallery_truth.size());
    for (std::uint32_t g = 0; g < gallery_truth.size(); ++g) {
        const Label& entry = gallery_truth[g];
        if (entry.person_id == probe.person_id && entry.camera_id == probe.camera_id) {
            continue;
        }
        valid.push_back(g);
    }
    return valid;
}

namespace detail {

struct ProbeScore {
    double ap_sum = 0.0;
    std::uint32_t relevant_seen = 0;
    std::uint64_t first_hit_rank = 0;  // 0 until the first relevant item appears
};

/// Walks a ranked gallery list once. Skipped entries do not advance the
/// effective rank; each relevant item at effective rank r contributes
/// hits/r to the AP sum.
inline ProbeScore score_ranked_list(std::span<const std::uint32_t> ranked,
                                    const std::vector<char>& is_relevant,
                                    const std::vector<char>& is_skipped) {
    ProbeScore score;
    std::uint64_t effective_rank = 0;
    for (std::uint32_t g : ranked) {
        if (is_skipped[g]) continue;
        ++effective_rank;
        if (!is_relevant[g]) continue;
        ++score.relevant_seen;
        if (score.relevant_seen == 1) score.first_hit_rank = effective_rank;
        score.ap_sum +=
            static_cast<double>(score.relevant_seen) / static_cast<double>(effective_rank);
    }
    return score;
}

}  // namespace detail

/// Average precision of one ranked gallery list under skip-don't-penalize
/// junk handling: AP = (1/|relevant|) sum over relevant items of
/// hits-so-far / effective-rank. Returns nothing when no relevant item
/// survives the skip set (the probe is unevaluable). `ranked` must list
/// every gallery index exactly once; both masks are indexed by gallery
/// index and a skipped entry is never counted as relevant.
inline std::optional<double> average_precision(std::span<const std::uint32_t> ranked,
                                               const std::vector<char>& is_relevant,
                                               const std::vector<char>& is_skipped) {
    if (is_relevant.size() != is_skipped.size() || ranked.size() != is_relevant.size()) {
        throw ShapeError("average_precision: ranked list and masks must have equal size");
    }
    std::uint32_t total_relevant = 0;
    for (std::size_t g = 0; g < is_relevant.size(); ++g) {
        if (is_relevant[g] && !is_skipped[g]) ++total_relevant;
    }
    if (total_relevant == 0) return std::nullopt;
    const auto score = detail::score_ranked_list(ranked, is_relevant, is_skipped);
    return score.ap_sum / static_cast<double>(total_relevant);
}

/// CMC at the ranks in kCmcRanks plus mAP over all evaluable probes.
/// A probe is evaluable when at least one gallery entry shares its
/// person under a different camera; the rest are left out of every
/// average. Throws when no probe is evaluable.
inline Metrics compute_metrics(const RankingResult& result, const GroundTruth& probe_truth,
                               const GroundTruth& gallery_truth) {
    if (result.probe_count() != probe_truth.size()) {
        throw ShapeError("compute_metrics: ranking covers " +
                         std::to_string(result.probe_count()) + " probes but " +
                         std::to_string(probe_truth.size()) + " probe labels were given");
    }
    const std::size_t ng = gallery_truth.size();
    for (const auto& row : result.order) {
        if (row.size() != ng) {
            throw ShapeError("compute_metrics: ranked list size " +
                             std::to_string(row.size()) + " does not match " +
                             std::to_string(ng) + " gallery labels");
        }
    }

    Metrics metrics;
    metrics.per_query_ap.resize(probe_truth.size());
    std::array<std::size_t, kCmcRanks.size()> hits_at{};
    double ap_total = 0.0;

    std::vector<char> is_relevant(ng);
    std::vector<char> is_skipped(ng);
    for (std::size_t p = 0; p < probe_truth.size(); ++p) {
        const Label& probe = probe_truth[p];
        std::uint32_t total_relevant = 0;
        for (std::size_t g = 0; g < ng; ++g) {
            const Label& entry = gallery_truth[g];
            const bool same_person = entry.person_id == probe.person_id;
            const bool junk = same_person && entry.camera_id == probe.camera_id;
            is_skipped[g] = junk;
            is_relevant[g] = same_person && !junk;
            if (is_relevant[g]) ++total_relevant;
        }
        if (total_relevant == 0) continue;

        const auto score = detail::score_ranked_list(result.order[p], is_relevant, is_skipped);
        metrics.per_query_ap[p] = score.ap_sum / static_cast<double>(total_relevant);
        ap_total += *metrics.per_query_ap[p];
        ++metrics.evaluable;
        for (std::size_t i = 0; i < kCmcRanks.size(); ++i) {
            if (score.first_hit_rank != 0 && score.first_hit_rank <= kCmcRanks[i]) {
                ++hits_at[i];
            }
        }
    }

    if (metrics.evaluable == 0) {
        throw Error("compute_metrics: no evaluable probe (every probe lacks a cross-camera match)");
    }
    metrics.map_score = ap_total / static_cast<double>(metrics.evaluable);
    for (std::size_t i = 0; i < kCmcRanks.size(); ++i) {
        metrics.cmc[kCmcRanks[i]] =
            static_cast<double>(hits_at[i]) / static_cast<double>(metrics.evaluable);
    }
    return metrics;
}

struct SyntheticData {
    FeatureMatrix probes;
    FeatureMatrix galleries;
    GroundTruth probe_truth;
    GroundTruth gallery_truth;
};

/// Clustered random dataset: one unit-sphere center per identity and
/// per-sample Gaussian perturbations. `noise` in [0, 1) is the
/// fraction of each sample's expected squared norm contributed by the
/// perturbation, so 0 places every sample on its center and values
/// toward 1 drown the identity signal; the per-component sigma is
/// sqrt(noise / (1 - noise)) / sqrt(dim). Cameras are assigned
/// round-robin within an identity; sample 0 of each identity is the
/// probe and the rest go to the gallery, so every probe has a
/// cross-camera match. Deterministic per seed.
inline SyntheticData generate_synthetic(std::uint32_t identity_count,
                                        std::uint32_t samples_per_identity, std::uint32_t dim,
                                        double noise, std::uint32_t camera_count,
                                        std::uint64_t seed) {
    if (identity_count < 2) {
        throw InvalidParameterError("identity_count must be at least 2, got " +
                                    std::to_string(identity_count));
    }
    if (samples_per_identity < 2) {
        throw InvalidParameterError("samples_per_identity must be at least 2, got " +
                                    std::to_string(samples_per_identity));
    }
    if (camera_count < 2) {
        throw InvalidParameterError("camera_count must be at least 2, got " +
                                    std::to_string(camera_count));
    }
    if (dim == 0) throw InvalidParameterError("dim must be positive");
    if (!(noise >= 0.0 && noise < 1.0)) {
        throw InvalidParameterError("noise must lie in [0, 1), got " + std::to_string(noise));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma =
        std::sqrt(noise / (1.0 - noise)) / std::sqrt(static_cast<double>(dim));

    SyntheticData data;
    data.probes.values = Matrix(identity_count, dim);
    data.probes.role = Role::probe;
    data.galleries.values =
        Matrix(static_cast<std::size_t>(identity_count) * (samples_per_identity - 1), dim);
    data.galleries.role = Role::gallery;
    data.probe_truth.reserve(identity_count);
    data.gallery_truth.reserve(data.galleries.values.rows());

    std::vector<double> center(dim);
    std::size_t gallery_row = 0;
    for (std::uint32_t id = 0; id < identity_count; ++id) {
        double norm_sq = 0.0;
        for (auto& c : center) {
            c = gauss(rng);
            norm_sq += c * c;
        }
        if (norm_sq == 0.0) center[0] = 1.0, norm_sq = 1.0;
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (auto& c : center) c *= inv_norm;

        for (std::uint32_t s = 0; s < samples_per_identity; ++s) {
            const std::int64_t camera = s % camera_count;
            std::span<double> row = s == 0 ? data.probes.values.row(id)
                                           : data.galleries.values.row(gallery_row);
            for (std::uint32_t d = 0; d < dim; ++d) {
                row[d] = center[d] + sigma * gauss(rng);
            }
            if (s == 0) {
                data.probe_truth.push_back({id, camera});
            } else {
                data.gallery_truth.push_back({id, camera});
                ++gallery_row;
            }
        }
    }
    return data;
}

}  // namespace daf
