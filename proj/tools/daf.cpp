#include <string>

#include <CLI11.hpp>

#include "daf/daf.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Divide-and-fuse re-ranking for person re-identification"};

    daf::RunConfig config;
    std::string format = "binary";
    std::string split = "contiguous";

    app.add_option("--probe-features", config.probe_features_path,
                   "Probe feature file (one row per probe)");
    app.add_option("--gallery-features", config.gallery_features_path,
                   "Gallery feature file (one row per gallery entity)");
    app.add_option("--labels", config.labels_path,
                   "Label csv covering probes then galleries; optional");
    app.add_option("--format", format, "Feature file format: binary or csv")
        ->check(CLI::IsMember({"binary", "csv"}))
        ->capture_default_str();
    app.add_option("--out", config.output_dir, "Output directory")->required();
    app.add_option("--L", config.params.sub_feature_count, "Number of sub-features")
        ->capture_default_str();
    app.add_option("--k1", config.params.encode_neighbors, "Encoding neighborhood size")
        ->capture_default_str();
    app.add_option("--k2", config.params.enhance_neighbors, "Enhancement neighborhood size")
        ->capture_default_str();
    app.add_option("--alpha", config.params.fusion_exponent, "Power-mean fusion exponent")
        ->capture_default_str();
    app.add_option("--lambda", config.params.aggregating_factor,
                   "Aggregating factor for the iterative distance update")
        ->capture_default_str();
    app.add_option("--iterations", config.params.iterations, "Number of encoding passes")
        ->capture_default_str();
    app.add_option("--split", split, "Dimension split strategy: contiguous or random")
        ->check(CLI::IsMember({"contiguous", "random"}))
        ->capture_default_str();
    app.add_option("--seed", config.params.seed, "Seed for every random choice")
        ->capture_default_str();
    app.add_option("--topk", config.top_k, "Ranked list length written per probe")
        ->capture_default_str();

    app.add_flag("--synthetic", config.synthetic,
                 "Run on a generated clustered dataset instead of files");
    app.add_option("--ids", config.synthetic_ids, "Synthetic: number of identities")
        ->capture_default_str();
    app.add_option("--per-id", config.synthetic_per_id, "Synthetic: samples per identity")
        ->capture_default_str();
    app.add_option("--dim", config.synthetic_dim, "Synthetic: feature dimension")
        ->capture_default_str();
    app.add_option("--noise", config.synthetic_noise,
                   "Synthetic: noise fraction of sample variance, in [0, 1)")
        ->capture_default_str();
    app.add_option("--cameras", config.synthetic_cameras, "Synthetic: number of cameras")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    config.format = daf::parse_file_format(format);
    config.params.split =
        split == "random" ? daf::SplitStrategy::random : daf::SplitStrategy::contiguous;
    return daf::run(config);
}
