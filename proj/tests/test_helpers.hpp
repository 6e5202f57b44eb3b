#pragma once

#include "testscape/dataset.hpp"
#include "testscape/rng.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testhelpers {

// Scoped scratch directory under the working directory.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& name) : path("scratch_" + name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

inline testscape::TestCase make_case(const std::string& id, const std::string& technique,
                                     testscape::Outcome outcome, double x_offset = 0.0) {
    testscape::TestCase tc;
    tc.id = id;
    tc.technique = technique;
    tc.outcome = outcome;
    tc.road = {{x_offset, 0.0}, {x_offset + 10.0, 0.0}, {x_offset + 20.0, 5.0}};
    tc.telemetry = {
        {"speed", {1.0, 2.0, 3.0}},
        {"steering", {0.1, -0.2, 0.3}},
    };
    return tc;
}

// Random non-degenerate polyline for property tests.
inline std::vector<testscape::RoadPoint> random_road(testscape::Rng& rng, std::size_t min_points = 5,
                                                     std::size_t max_points = 40) {
    const std::size_t n = min_points + rng.below(max_points - min_points + 1);
    std::vector<testscape::RoadPoint> road;
    road.reserve(n);
    double x = 0.0, y = 0.0, heading = rng.uniform(-3.14, 3.14);
    road.push_back({x, y});
    for (std::size_t i = 1; i < n; ++i) {
        heading += rng.uniform(-0.8, 0.8);
        const double step = rng.uniform(2.0, 12.0);
        x += step * std::cos(heading);
        y += step * std::sin(heading);
        road.push_back({x, y});
    }
    return road;
}

} // namespace testhelpers
