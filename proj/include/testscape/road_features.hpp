#pragma once

#include "testscape/dataset.hpp"

#include <span>
#include <vector>

namespace testscape {

inline constexpr double kDefaultTurnThresholdDeg = 5.0;

struct AngleStats {
    double max_angle = 0.0;
    double min_angle = 0.0;
    double std_angle = 0.0;
};

struct TurnCounts {
    int left = 0;
    int right = 0;
};

// Signed turn angle at each interior point, degrees in (-180, 180]; positive
// is a left turn. Roads with fewer than 3 points yield an empty sequence.
std::vector<double> turn_angles(std::span<const RoadPoint> road);

double road_distance(std::span<const RoadPoint> road);

// Max/min over signed angles and population standard deviation; all zero for
// an empty sequence.
AngleStats angle_stats(std::span<const double> angles);

// A maximal run of consecutive angles above the threshold counts as one left
// turn; symmetric below -threshold for right turns.
TurnCounts turn_counts(std::span<const double> angles, double threshold_deg);

// Sum over curved runs of the absolute area enclosed between the run's
// polyline and its straight chord (shoelace on the closed run+chord loop).
double full_road_diversity(std::span<const RoadPoint> road,
                           double threshold_deg = kDefaultTurnThresholdDeg);

// The 19 geometry feature names in the emitted column order.
const std::vector<std::string>& static_feature_names();

// Values aligned with static_feature_names(). Angle-derived features are zero
// for 2-point roads.
std::vector<double> static_feature_vector(const TestCase& c,
                                          double threshold_deg = kDefaultTurnThresholdDeg);
std::vector<double> static_feature_vector(std::span<const RoadPoint> road,
                                          double threshold_deg = kDefaultTurnThresholdDeg);

} // namespace testscape
