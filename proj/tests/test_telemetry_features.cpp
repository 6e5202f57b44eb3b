#include "testscape/telemetry_features.hpp"

#include "testscape/errors.hpp"
#include "testscape/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace testscape;

TEST_CASE("channel_stats matches direct formulas") {
    auto st = channel_stats(std::vector<double>{2.0, 2.0, 2.0});
    CHECK(st.min == 2.0);
    CHECK(st.max == 2.0);
    CHECK(st.mean == 2.0);
    CHECK(st.std == 0.0);

    st = channel_stats(std::vector<double>{1.0, 3.0});
    CHECK(st.mean == doctest::Approx(2.0));
    CHECK(st.std == doctest::Approx(1.0)); // population std of {1,3}

    st = channel_stats(std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(st.min == -1.0);
    CHECK(st.max == 1.0);
    CHECK(st.mean == doctest::Approx(0.0));
    CHECK(st.std == doctest::Approx(std::sqrt(2.0 / 3.0)));

    CHECK_THROWS_WITH_AS(channel_stats(std::vector<double>{}), doctest::Contains("empty channel"),
                         DataError);
}

TEST_CASE("dynamic_feature_vector layout") {
    TestCase tc;
    tc.id = "c";
    tc.road = {{0, 0}, {1, 0}};
    tc.telemetry = {{"altitude", {5.0, 5.0, 5.0}},
                    {"esc", {0.0, 1.0, 0.0}},
                    {"esc_active", {0.0, 1.0, 1.0}},
                    {"steering", {0.5, -0.5, 0.25}},
                    {"steering_input", {0.4, -0.4, 0.2}}};

    const std::vector<std::string> channels = {"steering", "steering_input", "altitude", "esc",
                                               "esc_active"};
    const auto names = dynamic_feature_names(channels);
    const auto values = dynamic_feature_vector(tc, channels);
    REQUIRE(names.size() == 20); // 4 stats x 5 channels
    REQUIRE(values.size() == 20);
    CHECK(names[0] == "steering_min");
    CHECK(names[3] == "steering_std");

    // Constant altitude: std 0 and max == mean.
    const auto alt_max = std::find(names.begin(), names.end(), "altitude_max") - names.begin();
    const auto alt_mean = std::find(names.begin(), names.end(), "altitude_mean") - names.begin();
    const auto alt_std = std::find(names.begin(), names.end(), "altitude_std") - names.begin();
    CHECK(values[std::size_t(alt_std)] == 0.0);
    CHECK(values[std::size_t(alt_max)] == values[std::size_t(alt_mean)]);

    SUBCASE("missing channel is reported with the case id") {
        const std::vector<std::string> wrong = {"speed"};
        CHECK_THROWS_WITH_AS(dynamic_feature_vector(tc, wrong),
                             doctest::Contains("missing channel speed in case c"), DataError);
    }
}

TEST_CASE("Table-1 style dynamic names are producible") {
    const std::vector<std::string> channels = {"steering", "steering_input", "altitude", "esc",
                                               "esc_active"};
    const auto names = dynamic_feature_names(channels);
    for (const char* expected :
         {"steering_std", "steering_min", "steering_input_max", "altitude_max", "altitude_mean",
          "esc_std", "esc_mean", "esc_active_mean", "esc_active_std", "steering_input_std"})
        CHECK(std::find(names.begin(), names.end(), std::string(expected)) != names.end());
}

TEST_CASE("parse_dynamic_feature_name splits on the last underscore") {
    auto [channel, stat] = parse_dynamic_feature_name("steering_input_max");
    CHECK(channel == "steering_input");
    CHECK(stat == "max");
    CHECK_THROWS_AS(parse_dynamic_feature_name("nounderscore"), ArgumentError);
}

TEST_CASE("statistics are order free and affine equivariant") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> samples(5 + rng.below(60));
        for (auto& v : samples) v = rng.normal() * rng.uniform(0.1, 10.0);
        const auto base = channel_stats(samples);
        CHECK(base.min <= base.mean + 1e-12);
        CHECK(base.mean <= base.max + 1e-12);
        CHECK(base.std >= 0.0);

        // Permutation invariance.
        auto shuffled = samples;
        rng.shuffle(shuffled);
        const auto permuted = channel_stats(shuffled);
        CHECK(permuted.min == base.min);
        CHECK(permuted.max == base.max);
        CHECK(permuted.mean == doctest::Approx(base.mean).epsilon(1e-12));
        CHECK(permuted.std == doctest::Approx(base.std).epsilon(1e-12));

        // Affine map with a > 0.
        const double a = rng.uniform(0.1, 5.0), b = rng.uniform(-10.0, 10.0);
        auto mapped = samples;
        for (auto& v : mapped) v = a * v + b;
        const auto affine = channel_stats(mapped);
        CHECK(affine.min == doctest::Approx(a * base.min + b).epsilon(1e-9));
        CHECK(affine.max == doctest::Approx(a * base.max + b).epsilon(1e-9));
        CHECK(affine.mean == doctest::Approx(a * base.mean + b).epsilon(1e-9));
        CHECK(affine.std == doctest::Approx(a * base.std).epsilon(1e-9));
    }
}
