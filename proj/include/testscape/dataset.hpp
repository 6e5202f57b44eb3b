#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace testscape {

enum class Outcome { Effective, Ineffective };

std::string to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

struct RoadPoint {
    double x = 0.0;
    double y = 0.0;
};

struct TelemetryChannel {
    std::string name;
    std::vector<double> samples;
};

// One scenario: a road polyline, the telemetry recorded while driving it,
// the generator technique that produced it, and its outcome label.
struct TestCase {
    std::string id;
    std::string technique;
    std::vector<RoadPoint> road;
    std::vector<TelemetryChannel> telemetry; // sorted by channel name
    Outcome outcome = Outcome::Ineffective;

    const TelemetryChannel* find_channel(std::string_view name) const;
};

struct Corpus {
    std::vector<TestCase> cases;
    std::string provenance;

    const TestCase* find_case(std::string_view id) const;
};

// Throws DataError("malformed case <id>: <reason>") on any invariant breach:
// road with < 2 points, non-finite coordinates, repeated consecutive points,
// empty or non-finite telemetry channels.
void validate_case(const TestCase& c);

// Layout: <root>/index.csv with columns id,technique,outcome,road_file,
// telemetry_file; road files are x,y CSVs; telemetry files have one column
// per channel and one row per tick. Malformed cases are collected and
// reported together, sorted by id.
Corpus load_corpus(const std::filesystem::path& root);
void save_corpus(const Corpus& corpus, const std::filesystem::path& root);

// Keeps every Effective case and, per technique, an equal number of
// Ineffective cases sampled uniformly without replacement.
Corpus balanced_subset(const Corpus& corpus, std::uint64_t seed);

// Disjoint partition with train size = round-half-up(train_fraction * n).
std::pair<Corpus, Corpus> split(const Corpus& corpus, double train_fraction,
                                std::uint64_t seed);

} // namespace testscape
