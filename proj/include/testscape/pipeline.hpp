#pragma once

#include "testscape/feature_matrix.hpp"
#include "testscape/isa.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace testscape::pipeline {

struct IsaConfig {
    double threshold = 0.3;
    std::size_t max_combinations = 10000;
    int k_min = 2;
    int k_max = 10;
};

struct PilotConfig {
    int restarts = 30;
    int max_iters = 1000;
    double grad_tol = 1e-6;
};

struct LearnConfig {
    double train_fraction = 0.8;
};

// Union of every stage knob; a run's resolved config is echoed into its
// output directory and the directory name carries the config hash.
struct PipelineConfig {
    std::string corpus_dir;  // used when synth_n == 0
    std::size_t synth_n = 0; // > 0 generates a corpus instead of loading one
    std::uint64_t seed = 42; // master seed; stage seeds derive from it
    bool balance = true;
    double turn_threshold_deg = 5.0;
    std::vector<std::string> channels; // empty: channels common to all cases
    IsaConfig isa;
    PilotConfig pilot;
    LearnConfig learn;
    bool plots = true;
    std::string out_dir = "out";

    nlohmann::json to_json(bool include_out) const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

// FNV-1a 64 hash of the canonical config JSON (output location excluded).
std::string config_hash(const PipelineConfig& config);

// extract -> prefilter -> cluster -> select -> project -> train -> report.
// Artifacts are staged in a temporary directory and moved into place on
// success; failures remove partial output and re-throw as "stage <name>: ...".
std::filesystem::path run_pipeline(const PipelineConfig& config);

// prefilter -> cluster -> select, bundled for the pipeline and `isa select`.
struct SelectionArtifacts {
    FeatureMatrix filtered;
    isa::FeatureClusters clusters;
    std::vector<std::pair<int, double>> silhouettes;
    isa::SelectionResult selection;
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;
    IsaConfig config;
};

SelectionArtifacts run_isa_selection(const FeatureMatrix& features, const OutcomeVector& outcomes,
                                     const std::vector<std::string>& techniques,
                                     const IsaConfig& config, std::uint64_t seed);
nlohmann::json selection_to_json(const SelectionArtifacts& artifacts);
std::vector<std::string> selected_features_from_json(const nlohmann::json& j);

// CLI glue shared by the standalone subcommands.
FeatureMatrix load_and_stack_features(const std::vector<std::string>& csv_paths);
FeatureMatrix align_to_ids(const FeatureMatrix& features, const std::vector<std::string>& ids);
std::optional<FeatureMatrix> load_extra_static(const std::filesystem::path& corpus_dir);

} // namespace testscape::pipeline
