#pragma once

#include "testscape/feature_matrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace testscape::isa {

// Pearson product-moment correlation; both inputs must be non-constant.
double pearson(std::span<const double> x, std::span<const double> y);

// Keeps, per technique, the feature with the highest |rho| against the
// outcomes of that technique's instances, plus every feature whose |rho|
// exceeds the threshold for at least one technique. Constant features are
// dropped beforehand (reported via `warnings`). A feature that is constant
// within one technique's subset contributes rho = 0 for that technique.
FeatureMatrix prefilter(const FeatureMatrix& features, const OutcomeVector& outcomes,
                        std::span<const std::string> technique_tags, double threshold,
                        std::vector<std::string>* warnings = nullptr);

// D[i][j] = 1 - |rho(row_i, row_j)|: symmetric, zero diagonal, entries in [0,1].
Eigen::MatrixXd dissimilarity(const FeatureMatrix& features);

struct FeatureClusters {
    int k = 0;
    std::vector<int> assignment; // per feature index -> cluster index
    std::vector<int> medoids;    // per cluster -> feature index

    std::vector<std::vector<int>> members() const;
};

// Seeded k-medoids on a dissimilarity matrix: greedy farthest-point
// initialization, assignment/medoid-update alternation, then swap descent.
// Assignment ties break toward the lowest medoid index.
FeatureClusters cluster_features(const Eigen::MatrixXd& D, int k, std::uint64_t seed);

// Total dissimilarity of each point to its medoid under the given medoid set.
double medoid_cost(const Eigen::MatrixXd& D, std::span<const int> medoids);

// Mean silhouette over all points; singletons contribute 0.
double silhouette(const Eigen::MatrixXd& D, const FeatureClusters& clusters);

// k in [k_min, k_max] maximizing the mean silhouette; ties -> smaller k.
// Optionally reports the silhouette evaluated at each k.
int choose_k(const Eigen::MatrixXd& D, int k_min, int k_max, std::uint64_t seed,
             std::vector<std::pair<int, double>>* silhouettes = nullptr);

// Top-2 PCA of the z-scored feature rows: orthonormal components sorted by
// eigenvalue, each sign-fixed so its largest-magnitude loading is positive.
// Falls back to one component (with a warning) on a degenerate covariance.
struct PcaProjection {
    Eigen::MatrixXd components;  // used x m, orthonormal rows
    Eigen::VectorXd eigenvalues; // descending, one per used component
    Eigen::MatrixXd coords;      // used x instances
};

PcaProjection pca_project(const FeatureMatrix& subset, std::vector<std::string>* warnings = nullptr);

// z-score rows, project to a temporary 2D PCA space, then 5-fold stratified
// cross-validated random-forest misclassification rate on the coordinates.
double score_combination(const FeatureMatrix& subset, const OutcomeVector& outcomes,
                         std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

struct ScoredCombination {
    std::vector<std::string> features;
    double cv_error = 0.0;
};

struct SelectionResult {
    std::vector<std::string> selected;
    double cv_error = 1.0;
    std::vector<ScoredCombination> alternatives; // every evaluated combination
};

// Evaluates one-feature-per-cluster combinations (the full Cartesian product,
// or a seeded uniform sample of max_combinations plus the all-medoids
// combination when the product is larger). Ties break lexicographically on
// the feature name lists.
SelectionResult select_best(const FeatureClusters& clusters, const FeatureMatrix& features,
                            const OutcomeVector& outcomes, std::uint64_t seed,
                            std::size_t max_combinations = 10000,
                            std::vector<std::string>* warnings = nullptr);

} // namespace testscape::isa
