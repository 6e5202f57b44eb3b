#pragma once

#include "testscape/dataset.hpp"
#include "testscape/feature_matrix.hpp"
#include "testscape/rng.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace testscape::learn {

enum class ModelKind { RandomForest, DecisionTree, KNearest, MultilayerPerceptron, NaiveBayes };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// 1 = Effective (positive class), 0 = Ineffective.
using Labels = std::vector<std::uint8_t>;

struct TreeOptions {
    int max_depth = -1;        // -1: unlimited
    int min_split = 2;
    int features_per_split = 0; // 0: all features
};

struct DecisionTreeModel {
    struct Node {
        int feature = -1; // -1 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
    };
    std::vector<Node> nodes;
    TreeOptions options;

    int predict_one(const Eigen::RowVectorXd& x) const;
    int depth() const;
    int leaf_of(const Eigen::RowVectorXd& x) const;
};

// CART with Gini impurity; split ties resolved toward the lowest feature
// index, then the lowest threshold. X is instances x features.
DecisionTreeModel fit_tree(const Eigen::MatrixXd& X, const Labels& y, const TreeOptions& options,
                           Rng* feature_rng = nullptr);

struct ForestOptions {
    int trees = 100;
    bool bootstrap = true;
    int max_depth = -1;
    int features_per_split = -1; // -1: floor(sqrt(n_features)), at least 1
};

struct RandomForestModel {
    std::vector<DecisionTreeModel> trees;
};

RandomForestModel fit_forest(const Eigen::MatrixXd& X, const Labels& y, std::uint64_t seed,
                             const ForestOptions& options);
Labels forest_predict(const RandomForestModel& model, const Eigen::MatrixXd& X);
std::vector<Labels> forest_per_tree_predictions(const RandomForestModel& model, const Eigen::MatrixXd& X);

// Per-feature z-scoring fitted on training data only.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std; // zero stds are stored as 1

    static Scaler fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

struct KnnModel {
    int k = 5;
    Scaler scaler;
    Eigen::MatrixXd train; // scaled, instances x features
    Labels labels;
};

struct MlpModel {
    Scaler scaler;
    Eigen::MatrixXd w1;    // hidden x features
    Eigen::VectorXd b1;    // hidden
    Eigen::RowVectorXd w2; // 1 x hidden
    double b2 = 0.0;
};

struct NaiveBayesModel {
    double log_prior0 = 0.0;
    double log_prior1 = 0.0;
    Eigen::VectorXd mean0, var0; // per feature, smoothed variances
    Eigen::VectorXd mean1, var1;
};

// Class log-posteriors (up to the shared evidence term): [ineffective, effective].
Eigen::Vector2d nb_log_posterior(const NaiveBayesModel& model, const Eigen::RowVectorXd& x);

// Binary cross-entropy loss and full parameter gradient of the one-hidden-layer
// network at parameter vector theta = [vec(w1); b1; w2^T; b2]. X is the raw
// (already scaled) batch, instances x features.
struct MlpGradient {
    double loss = 0.0;
    Eigen::VectorXd grad;
};
MlpGradient mlp_loss_and_gradient(const Eigen::VectorXd& theta, int hidden, const Eigen::MatrixXd& X,
                                  const Labels& y);

struct TrainedModel {
    ModelKind kind = ModelKind::DecisionTree;
    std::vector<std::string> feature_names;
    std::uint64_t train_seed = 0;
    std::variant<RandomForestModel, DecisionTreeModel, KnnModel, MlpModel, NaiveBayesModel> params;
};

// Fixed default configurations: RF 100 trees / bootstrap / sqrt features;
// DT uncapped Gini CART; KNN k=5 on z-scored features; MLP 64 ReLU units,
// sigmoid output, 500 epochs of full-batch Adam at lr 1e-2; Gaussian NB with
// 1e-9 * max-variance smoothing.
TrainedModel train(ModelKind kind, const FeatureMatrix& X, const OutcomeVector& y, std::uint64_t seed);
std::vector<Outcome> predict(const TrainedModel& model, const FeatureMatrix& X);

struct MetricsRow {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Positive class is Effective; 0/0 conventions resolve to 0.
MetricsRow metrics(std::span<const Outcome> predicted, std::span<const Outcome> truth);

struct ReportRow {
    ModelKind kind;
    std::string configuration; // "Dynamic" | "Static" | "All"
    MetricsRow scores;
};

struct ClassifierReport {
    std::vector<ReportRow> rows; // 5 kinds x 3 configurations
};

// One 80/20 split (split_seed) reused across all 15 models; `features` holds
// both feature families over the corpus instances.
ClassifierReport compare_configurations(const Corpus& corpus, const FeatureMatrix& features,
                                        const std::vector<std::string>& selected_static,
                                        const std::vector<std::string>& selected_dynamic,
                                        std::uint64_t split_seed, std::uint64_t train_seed);

std::string report_to_csv(const ClassifierReport& report);
ClassifierReport report_from_csv(const std::string& csv_text);
std::string report_to_table(const ClassifierReport& report);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

} // namespace testscape::learn
