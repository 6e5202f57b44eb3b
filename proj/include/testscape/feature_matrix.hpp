#pragma once

#include "testscape/dataset.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace testscape {

// Features x instances numeric table with named rows and instance ids.
struct FeatureMatrix {
    std::vector<std::string> names;        // n feature names
    std::vector<std::string> instance_ids; // i instance ids
    Eigen::MatrixXd values;                // n x i

    std::size_t n_features() const { return names.size(); }
    std::size_t n_instances() const { return instance_ids.size(); }

    // Throws DataError on NaN/inf entries, duplicate names/ids, shape mismatch.
    void validate() const;

    // Index of a feature name; throws ArgumentError when absent.
    std::size_t row_index(const std::string& name) const;
    bool has_feature(const std::string& name) const;

    // Row subset in the order given.
    FeatureMatrix subset(std::span<const std::string> feature_names) const;

    // Column subset by instance positions, preserving the given order.
    FeatureMatrix columns(std::span<const std::size_t> instance_positions) const;
};

// Aligned outcome encoding: Effective = 1, Ineffective = 0.
struct OutcomeVector {
    Eigen::VectorXd values;

    std::size_t size() const { return std::size_t(values.size()); }
};

// Vertical concatenation; instance ids must match exactly.
FeatureMatrix stack(const FeatureMatrix& top, const FeatureMatrix& bottom);

// Instances-as-rows CSV with an `id` first column.
FeatureMatrix read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);

// Extraction over a corpus (instances in corpus order).
FeatureMatrix static_feature_matrix(const Corpus& corpus, double turn_threshold_deg);
FeatureMatrix dynamic_feature_matrix(const Corpus& corpus, std::span<const std::string> channels);

// Channels present in every case, sorted by name.
std::vector<std::string> common_channels(const Corpus& corpus);

OutcomeVector outcomes_of(const Corpus& corpus);
std::vector<std::string> techniques_of(const Corpus& corpus);

} // namespace testscape
