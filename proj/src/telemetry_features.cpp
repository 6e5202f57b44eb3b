#include "testscape/telemetry_features.hpp"

#include "testscape/errors.hpp"

#include <algorithm>
#include <cmath>

namespace testscape {

ChannelStats channel_stats(std::span<const double> samples) {
    if (samples.empty()) throw DataError("empty channel");
    ChannelStats st;
    st.min = samples[0];
    st.max = samples[0];
    double sum = 0.0;
    for (double v : samples) {
        if (!std::isfinite(v)) throw DataError("non-finite sample");
        st.min = std::min(st.min, v);
        st.max = std::max(st.max, v);
        sum += v;
    }
    st.mean = sum / double(samples.size());
    double ss = 0.0;
    for (double v : samples) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / double(samples.size()));
    return st;
}

std::vector<std::string> dynamic_feature_names(std::span<const std::string> channels) {
    static const char* stats[] = {"min", "max", "mean", "std"};
    std::vector<std::string> names;
    names.reserve(channels.size() * 4);
    for (const auto& ch : channels)
        for (const char* stat : stats) names.push_back(ch + "_" + stat);
    return names;
}

std::vector<double> dynamic_feature_vector(const TestCase& c, std::span<const std::string> channels) {
    std::vector<double> values;
    values.reserve(channels.size() * 4);
    for (const auto& name : channels) {
        const TelemetryChannel* ch = c.find_channel(name);
        if (!ch) throw DataError("missing channel " + name + " in case " + c.id);
        const ChannelStats st = channel_stats(ch->samples);
        values.push_back(st.min);
        values.push_back(st.max);
        values.push_back(st.mean);
        values.push_back(st.std);
    }
    return values;
}

std::pair<std::string, std::string> parse_dynamic_feature_name(const std::string& feature) {
    const auto pos = feature.rfind('_');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= feature.size())
        throw ArgumentError("not a dynamic feature name: " + feature);
    return {feature.substr(0, pos), feature.substr(pos + 1)};
}

} // namespace testscape
