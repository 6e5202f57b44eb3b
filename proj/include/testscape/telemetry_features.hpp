#pragma once

#include "testscape/dataset.hpp"

#include <span>
#include <string>
#include <vector>

namespace testscape {

struct ChannelStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0; // population form
};

ChannelStats channel_stats(std::span<const double> samples);

// Feature names <channel>_<stat> with stats in min,max,mean,std order,
// channels in the given order.
std::vector<std::string> dynamic_feature_names(std::span<const std::string> channels);

// Values aligned with dynamic_feature_names(channels). Every listed channel
// must exist in the case.
std::vector<double> dynamic_feature_vector(const TestCase& c, std::span<const std::string> channels);

// Splits "<channel>_<stat>" on the last underscore; returns {channel, stat}.
std::pair<std::string, std::string> parse_dynamic_feature_name(const std::string& feature);

} // namespace testscape
