#include "testscape/road_features.hpp"

#include "testscape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace testscape {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double segment_length(const RoadPoint& a, const RoadPoint& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

double population_std(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(v.size()));
}

struct CurvedRun {
    std::size_t first;  // angle index
    std::size_t last;   // inclusive
    bool left;
};

// Maximal runs of consecutive angles beyond the threshold with one sign.
std::vector<CurvedRun> curved_runs(std::span<const double> angles, double threshold_deg) {
    std::vector<CurvedRun> runs;
    std::size_t i = 0;
    while (i < angles.size()) {
        if (angles[i] > threshold_deg) {
            std::size_t j = i;
            while (j + 1 < angles.size() && angles[j + 1] > threshold_deg) ++j;
            runs.push_back({i, j, true});
            i = j + 1;
        } else if (angles[i] < -threshold_deg) {
            std::size_t j = i;
            while (j + 1 < angles.size() && angles[j + 1] < -threshold_deg) ++j;
            runs.push_back({i, j, false});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return runs;
}

// |shoelace| area of the polygon with the given vertices (implicitly closed).
double polygon_area(std::span<const RoadPoint> pts) {
    double twice = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

} // namespace

std::vector<double> turn_angles(std::span<const RoadPoint> road) {
    std::vector<double> angles;
    if (road.size() < 3) return angles;
    angles.reserve(road.size() - 2);
    for (std::size_t k = 1; k + 1 < road.size(); ++k) {
        const double v1x = road[k].x - road[k - 1].x;
        const double v1y = road[k].y - road[k - 1].y;
        const double v2x = road[k + 1].x - road[k].x;
        const double v2y = road[k + 1].y - road[k].y;
        const double cross = v1x * v2y - v1y * v2x;
        const double dot = v1x * v2x + v1y * v2y;
        angles.push_back(std::atan2(cross, dot) * kRadToDeg);
    }
    return angles;
}

double road_distance(std::span<const RoadPoint> road) {
    if (road.size() < 2) throw ArgumentError("road_distance needs at least 2 points");
    double total = 0.0;
    for (std::size_t i = 1; i < road.size(); ++i)
        total += segment_length(road[i - 1], road[i]);
    return total;
}

AngleStats angle_stats(std::span<const double> angles) {
    if (angles.empty()) return {};
    AngleStats st;
    st.max_angle = *std::max_element(angles.begin(), angles.end());
    st.min_angle = *std::min_element(angles.begin(), angles.end());
    st.std_angle = population_std(angles);
    return st;
}

TurnCounts turn_counts(std::span<const double> angles, double threshold_deg) {
    if (!(threshold_deg > 0.0)) throw ArgumentError("turn threshold must be positive");
    TurnCounts counts;
    for (const auto& run : curved_runs(angles, threshold_deg))
        (run.left ? counts.left : counts.right)++;
    return counts;
}

double full_road_diversity(std::span<const RoadPoint> road, double threshold_deg) {
    if (road.size() < 3) return 0.0;
    const auto angles = turn_angles(road);
    double total = 0.0;
    for (const auto& run : curved_runs(angles, threshold_deg)) {
        // Angle index j sits at road point j+1, so the run spans road points
        // [first, last+2]; the chord closing that stretch completes the loop.
        const std::size_t begin = run.first;
        const std::size_t count = run.last + 2 - run.first + 1;
        total += polygon_area(road.subspan(begin, count));
    }
    return total;
}

const std::vector<std::string>& static_feature_names() {
    static const std::vector<std::string> names = {
        "road_distance",
        "max_angle",
        "min_angle",
        "mean_angle",
        "std_angle",
        "num_l_turns",
        "num_r_turns",
        "full_road_diversity",
        "segment_length_min",
        "segment_length_max",
        "segment_length_mean",
        "segment_length_std",
        "max_angle_per_meter",
        "mean_angle_per_meter",
        "straight_length",
        "curved_length",
        "num_direction_changes",
        "displacement",
        "sinuosity",
    };
    return names;
}

std::vector<double> static_feature_vector(const TestCase& c, double threshold_deg) {
    return static_feature_vector(std::span<const RoadPoint>(c.road), threshold_deg);
}

std::vector<double> static_feature_vector(std::span<const RoadPoint> road, double threshold_deg) {
    if (road.size() < 2) throw ArgumentError("road needs at least 2 points");

    const auto angles = turn_angles(road);
    const auto stats = angle_stats(angles);
    const auto counts = turn_counts(angles, threshold_deg);
    const double distance = road_distance(road);

    std::vector<double> seg_lengths(road.size() - 1);
    for (std::size_t i = 1; i < road.size(); ++i)
        seg_lengths[i - 1] = segment_length(road[i - 1], road[i]);
    const double seg_min = *std::min_element(seg_lengths.begin(), seg_lengths.end());
    const double seg_max = *std::max_element(seg_lengths.begin(), seg_lengths.end());
    const double seg_mean = distance / double(seg_lengths.size());
    const double seg_std = population_std(seg_lengths);

    const double mean_angle =
        angles.empty() ? 0.0
                       : std::accumulate(angles.begin(), angles.end(), 0.0) / double(angles.size());

    // Curvature proxy per interior point: |turn| over the mean of the two
    // adjacent segment lengths.
    double max_apm = 0.0, sum_apm = 0.0;
    for (std::size_t j = 0; j < angles.size(); ++j) {
        const double local = std::abs(angles[j]) / (0.5 * (seg_lengths[j] + seg_lengths[j + 1]));
        max_apm = std::max(max_apm, local);
        sum_apm += local;
    }
    const double mean_apm = angles.empty() ? 0.0 : sum_apm / double(angles.size());

    // A segment is curved when either of its endpoints turns beyond the
    // threshold.
    double curved_len = 0.0;
    for (std::size_t s = 0; s < seg_lengths.size(); ++s) {
        const bool tail = s >= 1 && std::abs(angles[s - 1]) > threshold_deg;
        const bool head = s < angles.size() && std::abs(angles[s]) > threshold_deg;
        if (tail || head) curved_len += seg_lengths[s];
    }
    const double straight_len = distance - curved_len;

    const auto runs = curved_runs(angles, threshold_deg);
    double direction_changes = 0.0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].left != runs[r - 1].left) direction_changes += 1.0;

    const double displacement = segment_length(road.front(), road.back());
    const double sinuosity = displacement < 1e-9 ? 0.0 : distance / displacement;

    return {
        distance,
        stats.max_angle,
        stats.min_angle,
        mean_angle,
        stats.std_angle,
        double(counts.left),
        double(counts.right),
        full_road_diversity(road, threshold_deg),
        seg_min,
        seg_max,
        seg_mean,
        seg_std,
        max_apm,
        mean_apm,
        straight_len,
        curved_len,
        direction_changes,
        displacement,
        sinuosity,
    };
}

} // namespace testscape
