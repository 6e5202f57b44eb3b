#include "testscape/road_features.hpp"

#include "testscape/errors.hpp"
#include "testscape/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

using namespace testscape;

namespace {

// Independent shoelace oracle over an implicitly closed vertex loop.
double shoelace(const std::vector<RoadPoint>& loop) {
    double twice = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const auto& a = loop[i];
        const auto& b = loop[(i + 1) % loop.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

std::map<std::string, double> named_features(const std::vector<RoadPoint>& road) {
    const auto values = static_feature_vector(road);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < values.size(); ++i) out[static_feature_names()[i]] = values[i];
    return out;
}

std::vector<RoadPoint> transformed(const std::vector<RoadPoint>& road, double angle, double tx,
                                   double ty) {
    std::vector<RoadPoint> out;
    out.reserve(road.size());
    for (const auto& p : road)
        out.push_back({p.x * std::cos(angle) - p.y * std::sin(angle) + tx,
                       p.x * std::sin(angle) + p.y * std::cos(angle) + ty});
    return out;
}

std::vector<RoadPoint> mirrored(const std::vector<RoadPoint>& road) {
    std::vector<RoadPoint> out;
    out.reserve(road.size());
    for (const auto& p : road) out.push_back({p.x, -p.y});
    return out;
}

} // namespace

TEST_CASE("turn_angles signed convention") {
    CHECK(turn_angles(std::vector<RoadPoint>{{0, 0}, {10, 0}, {20, 0}}) ==
          std::vector<double>{0.0});
    const auto left = turn_angles(std::vector<RoadPoint>{{0, 0}, {10, 0}, {10, 10}});
    REQUIRE(left.size() == 1);
    CHECK(left[0] == doctest::Approx(90.0));
    const auto right = turn_angles(std::vector<RoadPoint>{{0, 0}, {10, 0}, {10, -10}});
    REQUIRE(right.size() == 1);
    CHECK(right[0] == doctest::Approx(-90.0));
    CHECK(turn_angles(std::vector<RoadPoint>{{0, 0}, {1, 1}}).empty());
}

TEST_CASE("road_distance sums segment lengths") {
    CHECK(road_distance(std::vector<RoadPoint>{{0, 0}, {10, 0}, {20, 0}}) == doctest::Approx(20.0));
    CHECK(road_distance(std::vector<RoadPoint>{{0, 0}, {3, 4}}) == doctest::Approx(5.0));
    // Closed square of side 10: four 10 m segments.
    const std::vector<RoadPoint> square = {{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}};
    CHECK(road_distance(square) == doctest::Approx(40.0));
}

TEST_CASE("angle_stats uses population std") {
    const auto ninety = angle_stats(std::vector<double>{90.0, -90.0});
    CHECK(ninety.max_angle == doctest::Approx(90.0));
    CHECK(ninety.min_angle == doctest::Approx(-90.0));
    CHECK(ninety.std_angle == doctest::Approx(90.0));

    const auto zeros = angle_stats(std::vector<double>{0.0, 0.0, 0.0});
    CHECK(zeros.max_angle == 0.0);
    CHECK(zeros.std_angle == 0.0);

    const auto single = angle_stats(std::vector<double>{10.0});
    CHECK(single.max_angle == doctest::Approx(10.0));
    CHECK(single.min_angle == doctest::Approx(10.0));
    CHECK(single.std_angle == doctest::Approx(0.0));

    const auto empty = angle_stats(std::vector<double>{});
    CHECK(empty.max_angle == 0.0);
    CHECK(empty.min_angle == 0.0);
    CHECK(empty.std_angle == 0.0);
}

TEST_CASE("turn_counts counts maximal runs") {
    auto counts = turn_counts(std::vector<double>{0.0, 0.0, 0.0}, 5.0);
    CHECK(counts.left == 0);
    CHECK(counts.right == 0);

    counts = turn_counts(std::vector<double>{10.0, 12.0, -10.0}, 5.0);
    CHECK(counts.left == 1);
    CHECK(counts.right == 1);

    counts = turn_counts(std::vector<double>{10.0, 0.0, 10.0}, 5.0);
    CHECK(counts.left == 2);
    CHECK(counts.right == 0);

    CHECK_THROWS_AS(turn_counts(std::vector<double>{1.0}, 0.0), ArgumentError);
}

TEST_CASE("full_road_diversity equals the shoelace oracle on curved runs") {
    const std::vector<RoadPoint> straight = {{0, 0}, {10, 0}, {20, 0}, {30, 0}};
    CHECK(full_road_diversity(straight) == doctest::Approx(0.0));

    // Triangle detour: a +90 turn then a -90 turn, one curved run each.
    const std::vector<RoadPoint> detour = {{0, 0}, {10, 0}, {10, 10}, {20, 10}};
    const double expected = shoelace({{0, 0}, {10, 0}, {10, 10}}) +
                            shoelace({{10, 0}, {10, 10}, {20, 10}});
    CHECK(full_road_diversity(detour) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(100.0));

    // Mirror image keeps the area.
    CHECK(full_road_diversity(mirrored(detour)) == doctest::Approx(full_road_diversity(detour)));
}

TEST_CASE("static_feature_vector shape and anchors") {
    REQUIRE(static_feature_names().size() == 19);
    for (const char* required : {"full_road_diversity", "max_angle", "min_angle", "std_angle",
                                 "road_distance", "num_l_turns", "num_r_turns"})
        CHECK(std::find(static_feature_names().begin(), static_feature_names().end(),
                        std::string(required)) != static_feature_names().end());

    SUBCASE("two-point road zeroes angle features") {
        const auto f = named_features({{0, 0}, {25, 0}});
        CHECK(f.at("max_angle") == 0.0);
        CHECK(f.at("min_angle") == 0.0);
        CHECK(f.at("std_angle") == 0.0);
        CHECK(f.at("num_l_turns") == 0.0);
        CHECK(f.at("num_r_turns") == 0.0);
        CHECK(f.at("full_road_diversity") == 0.0);
        CHECK(f.at("road_distance") == doctest::Approx(25.0));
        CHECK(f.at("sinuosity") == doctest::Approx(1.0));
    }
    SUBCASE("L-shaped road has a 90 degree max angle") {
        const auto f = named_features({{0, 0}, {10, 0}, {10, 10}});
        CHECK(f.at("max_angle") == doctest::Approx(90.0));
        CHECK(f.at("num_l_turns") == 1.0);
    }
    SUBCASE("every random road yields 19 finite entries") {
        Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            const auto values = static_feature_vector(testhelpers::random_road(rng));
            REQUIRE(values.size() == 19);
            for (double v : values) CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("rigid motion invariance") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const auto road = testhelpers::random_road(rng);
        const auto base = static_feature_vector(road);
        const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const auto moved =
            static_feature_vector(transformed(road, angle, rng.uniform(-500, 500), rng.uniform(-500, 500)));
        for (std::size_t f = 0; f < base.size(); ++f)
            CHECK(std::abs(base[f] - moved[f]) <= 1e-9);
    }
}

TEST_CASE("mirror symmetry swaps turn directions") {
    Rng rng(202);
    for (int trial = 0; trial < 200; ++trial) {
        const auto road = testhelpers::random_road(rng);
        const auto f = named_features(road);
        const auto m = named_features(mirrored(road));
        CHECK(m.at("num_l_turns") == f.at("num_r_turns"));
        CHECK(m.at("num_r_turns") == f.at("num_l_turns"));
        CHECK(m.at("max_angle") == doctest::Approx(-f.at("min_angle")));
        CHECK(m.at("min_angle") == doctest::Approx(-f.at("max_angle")));
        CHECK(m.at("mean_angle") == doctest::Approx(-f.at("mean_angle")));
        CHECK(m.at("std_angle") == doctest::Approx(f.at("std_angle")));
        CHECK(m.at("road_distance") == doctest::Approx(f.at("road_distance")));
        CHECK(m.at("full_road_diversity") == doctest::Approx(f.at("full_road_diversity")));
    }
}

TEST_CASE("distance dominates displacement and reversal invariants") {
    Rng rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        auto road = testhelpers::random_road(rng);
        const auto f = named_features(road);
        CHECK(f.at("road_distance") >= f.at("displacement") - 1e-9);

        std::reverse(road.begin(), road.end());
        const auto r = named_features(road);
        CHECK(r.at("road_distance") == doctest::Approx(f.at("road_distance")));
        CHECK(r.at("full_road_diversity") == doctest::Approx(f.at("full_road_diversity")));
    }
}
