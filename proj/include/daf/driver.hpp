#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "daf/evaluation.hpp"
#include "daf/io.hpp"
#include "daf/pipeline.hpp"
#include "daf/types.hpp"

namespace daf {

/// Everything one invocation needs: data locations (or the synthetic
/// generator's knobs), the re-ranking parameters and the output shape.
struct RunConfig {
    std::string probe_features_path;
    std::string gallery_features_path;
    std::string labels_path;  // empty = no labels, metrics are skipped
    std::string output_dir;
    FileFormat format = FileFormat::binary;
    ReRankParams params;
    std::uint32_t top_k = 100;

    /// Replaces the feature files with a generated clustered dataset.
    bool synthetic = false;
    std::uint32_t synthetic_ids = 50;
    std::uint32_t synthetic_per_id = 6;
    std::uint32_t synthetic_dim = 64;
    double synthetic_noise = 0.6;
    std::uint32_t synthetic_cameras = 4;

    /// Every violation, each naming the offending field.
    std::vector<std::string> violations() const {
        std::vector<std::string> out = params.violations();
        if (output_dir.empty()) out.push_back("output_dir is required");
        if (top_k < 1) out.push_back("top_k must be >= 1");
        if (synthetic) {
            if (!probe_features_path.empty()) {
                out.push_back("probe_features_path must be empty in synthetic mode");
            }
            if (!gallery_features_path.empty()) {
                out.push_back("gallery_features_path must be empty in synthetic mode");
            }
            if (!labels_path.empty()) {
                out.push_back("labels_path must be empty in synthetic mode");
            }
            if (synthetic_ids < 2) out.push_back("synthetic_ids must be >= 2");
            if (synthetic_per_id < 2) out.push_back("synthetic_per_id must be >= 2");
            if (synthetic_cameras < 2) out.push_back("synthetic_cameras must be >= 2");
            if (synthetic_dim < 1) out.push_back("synthetic_dim must be >= 1");
            if (!(synthetic_noise >= 0.0 && synthetic_noise < 1.0)) {
                out.push_back("synthetic_noise must lie in [0, 1)");
            }
        } else {
            if (probe_features_path.empty()) out.push_back("probe_features_path is required");
            if (gallery_features_path.empty()) {
                out.push_back("gallery_features_path is required");
            }
        }
        return out;
    }

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
};

namespace detail {

inline std::string fixed6(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

inline void append_metric_block(const std::string& name, const Metrics& metrics,
                                std::string& out) {
    out += name + ".rank1 = " + fixed6(metrics.cmc.at(1)) + "\n";
    out += name + ".rank5 = " + fixed6(metrics.cmc.at(5)) + "\n";
    out += name + ".rank10 = " + fixed6(metrics.cmc.at(10)) + "\n";
    out += name + ".rank20 = " + fixed6(metrics.cmc.at(20)) + "\n";
    out += name + ".mAP = " + fixed6(metrics.map_score) + "\n";
}

inline std::string render_ranking(const RankingResult& result, std::uint32_t top_k) {
    std::string out;
    for (std::size_t p = 0; p < result.probe_count(); ++p) {
        out += std::to_string(p);
        out.push_back('\t');
        const auto& order = result.order[p];
        const std::size_t limit = std::min<std::size_t>(top_k, order.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (i > 0) out.push_back(' ');
            out += std::to_string(order[i]);
        }
        out.push_back('\n');
    }
    return out;
}

inline std::string render_config(const RunConfig& config) {
    std::string out;
    out += "probe_features = " + (config.synthetic ? "(synthetic)" : config.probe_features_path) + "\n";
    out += "gallery_features = " +
           (config.synthetic ? "(synthetic)" : config.gallery_features_path) + "\n";
    out += "labels = " + (config.synthetic      ? "(synthetic)"
                          : config.labels_path.empty() ? "(none)"
                                                       : config.labels_path) + "\n";
    out += "format = " + std::string(to_string(config.format)) + "\n";
    out += "output_dir = " + config.output_dir + "\n";
    out += "L = " + std::to_string(config.params.sub_feature_count) + "\n";
    out += "k1 = " + std::to_string(config.params.encode_neighbors) + "\n";
    out += "k2 = " + std::to_string(config.params.enhance_neighbors) + "\n";
    out += "alpha = " + fixed6(config.params.fusion_exponent) + "\n";
    out += "lambda = " + fixed6(config.params.aggregating_factor) + "\n";
    out += "iterations = " + std::to_string(config.params.iterations) + "\n";
    out += "split = " +
           std::string(config.params.split == SplitStrategy::contiguous ? "contiguous"
                                                                        : "random") + "\n";
    out += "seed = " + std::to_string(config.params.seed) + "\n";
    out += "topk = " + std::to_string(config.top_k) + "\n";
    out += "synthetic = " + std::string(config.synthetic ? "true" : "false") + "\n";
    if (config.synthetic) {
        out += "synthetic_ids = " + std::to_string(config.synthetic_ids) + "\n";
        out += "synthetic_per_id = " + std::to_string(config.synthetic_per_id) + "\n";
        out += "synthetic_dim = " + std::to_string(config.synthetic_dim) + "\n";
        out += "synthetic_noise = " + fixed6(config.synthetic_noise) + "\n";
        out += "synthetic_cameras = " + std::to_string(config.synthetic_cameras) + "\n";
    }
    return out;
}

}  // namespace detail

/// Loads (or generates) the data, runs the baseline and the re-ranking
/// pipeline, and writes ranking.tsv, config.txt and, when labels are
/// available, metrics.txt into the output directory. All files are
/// staged as .tmp and renamed only after every write has succeeded, so
/// a failing run leaves no partial outputs. Returns the process exit
/// status and prints diagnostics to stderr on failure.
inline int run(const RunConfig& config) {
    namespace fs = std::filesystem;
    std::vector<fs::path> staged;
    try {
        const auto problems = config.violations();
        if (!problems.empty()) {
            for (const auto& problem : problems) std::cerr << "config error: " << problem << "\n";
            return 1;
        }

        FeatureMatrix probes;
        FeatureMatrix galleries;
        GroundTruth probe_truth;
        GroundTruth gallery_truth;
        bool have_labels = false;
        if (config.synthetic) {
            auto data = generate_synthetic(config.synthetic_ids, config.synthetic_per_id,
                                           config.synthetic_dim, config.synthetic_noise,
                                           config.synthetic_cameras, config.params.seed);
            probes = std::move(data.probes);
            galleries = std::move(data.galleries);
            probe_truth = std::move(data.probe_truth);
            gallery_truth = std::move(data.gallery_truth);
            have_labels = true;
        } else {
            probes = load_features(config.probe_features_path, config.format, Role::probe);
            galleries =
                load_features(config.gallery_features_path, config.format, Role::gallery);
            if (!config.labels_path.empty()) {
                GroundTruth truth = load_labels(config.labels_path);
                const std::size_t expected = probes.count() + galleries.count();
                if (truth.size() != expected) {
                    throw LoadError(config.labels_path + ": " + std::to_string(truth.size()) +
                                    " labels for " + std::to_string(expected) +
                                    " entities (probes first, then galleries)");
                }
                probe_truth.assign(truth.begin(),
                                   truth.begin() + static_cast<std::ptrdiff_t>(probes.count()));
                gallery_truth.assign(
                    truth.begin() + static_cast<std::ptrdiff_t>(probes.count()), truth.end());
                have_labels = true;
            }
        }
        config.params.validate_for(probes.dim(), galleries.count());

        const RankingResult baseline = initial_ranking(probes, galleries);
        const RankingResult reranked = rerank(probes, galleries, config.params);

        std::string metrics_text;
        if (have_labels) {
            detail::append_metric_block(
                "baseline", compute_metrics(baseline, probe_truth, gallery_truth),
                metrics_text);
            detail::append_metric_block(
                "daf", compute_metrics(reranked, probe_truth, gallery_truth), metrics_text);
        }

        fs::create_directories(config.output_dir);
        const fs::path out_dir(config.output_dir);
        const auto stage = [&](const char* name, const std::string& content) {
            const fs::path tmp = out_dir / (std::string(name) + ".tmp");
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw Error(tmp.string() + ": cannot open file for writing");
            out << content;
            if (!out.flush()) throw Error(tmp.string() + ": write failed");
            staged.push_back(tmp);
        };

        stage("ranking.tsv", detail::render_ranking(reranked, config.top_k));
        stage("config.txt", detail::render_config(config));
        if (have_labels) stage("metrics.txt", metrics_text);

        for (const auto& tmp : staged) {
            fs::path final_path = tmp;
            final_path.replace_extension();  // strips the trailing .tmp
            fs::rename(tmp, final_path);
        }
        staged.clear();

        if (have_labels) std::cout << metrics_text;
        std::cout << "wrote " << (out_dir / "ranking.tsv").string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        for (const auto& tmp : staged) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace daf
