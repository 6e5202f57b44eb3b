#pragma once

#include "testscape/dataset.hpp"
#include "testscape/feature_matrix.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace testscape::pilot {

struct Standardization {
    std::vector<double> feature_mean;
    std::vector<double> feature_std; // population form
    double outcome_mean = 0.0;
    double outcome_std = 1.0;
};

struct StandardizedData {
    Eigen::MatrixXd features; // n x i, zero mean / unit std rows
    Eigen::VectorXd outcomes; // length i, zero mean / unit std
    Standardization record;
};

StandardizedData standardize(const FeatureMatrix& features, const OutcomeVector& outcomes);

// Inverse of the recorded feature mapping.
Eigen::MatrixXd unstandardize_features(const Standardization& record, const Eigen::MatrixXd& standardized);

// Objective ||F - B A F||_F^2 + ||y^T - C^T A F||_F^2 with analytic gradients.
struct ObjectiveEval {
    double value = 0.0;
    Eigen::MatrixXd grad_A; // 2 x n
    Eigen::MatrixXd grad_B; // n x 2
    Eigen::Vector2d grad_C;
};

ObjectiveEval pilot_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::Vector2d& C, const Eigen::MatrixXd& F,
                              const Eigen::VectorXd& y);

struct FitOptions {
    int restarts = 30;
    int max_iters = 1000;
    double grad_tol = 1e-6;
};

struct ProjectionModel {
    Eigen::MatrixXd A; // 2 x n projection
    Eigen::MatrixXd B; // n x 2 feature reconstruction
    Eigen::Vector2d C; // outcome prediction
    Eigen::MatrixXd Z; // 2 x i coordinates, Z = A F by construction
    double objective = 0.0;
    std::vector<std::string> feature_names;
    Standardization standardization;
    std::vector<double> objective_trace; // accepted values of the winning restart
};

// L-BFGS with backtracking line search over theta = [vec(A); vec(B); C] from
// seeded Gaussian initializations; returns the restart with the lowest final
// objective (ties toward the lower restart index).
ProjectionModel fit_pilot(const Eigen::MatrixXd& F_std, const Eigen::VectorXd& y_std,
                          std::uint64_t seed, const FitOptions& options = {});

// Standardizes, fits, and carries names/record along.
ProjectionModel fit_pilot(const FeatureMatrix& features, const OutcomeVector& outcomes,
                          std::uint64_t seed, const FitOptions& options = {});

struct InstanceSpace {
    std::vector<std::string> instance_ids;
    std::vector<std::array<double, 2>> coordinates;
    std::vector<Outcome> labels;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd normalized_features; // features x instances, min-max scaled to [0,1]
};

// Coordinates come from model.Z; feature values are min-max normalized per
// feature. The features must match the fitted names and instance count.
InstanceSpace build_instance_space(const ProjectionModel& model, const FeatureMatrix& features,
                                   const OutcomeVector& outcomes);

nlohmann::json projection_to_json(const ProjectionModel& model);
ProjectionModel projection_from_json(const nlohmann::json& j);

} // namespace testscape::pilot
