#pragma once

#include "testscape/dataset.hpp"
#include "testscape/feature_matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace testscape::synth {

struct Segment {
    enum class Kind { Straight, Arc };
    Kind kind = Kind::Straight;
    double length = 0.0;    // straights, meters
    double radius = 0.0;    // arcs, meters
    double sweep_deg = 0.0; // arcs, (0, 180]
    bool left = true;

    static Segment straight(double length) { return {Kind::Straight, length, 0.0, 0.0, true}; }
    static Segment arc(double radius, double sweep_deg, bool left) {
        return {Kind::Arc, 0.0, radius, sweep_deg, left};
    }
};

struct RoadSpec {
    std::vector<Segment> segments;
};

struct DriverParams {
    double cruise_speed = 25.0;     // m/s
    double curve_slowdown = 30.0;   // dimensionless gain on |curvature|
    int reaction_lag = 2;           // ticks
    double noise_std = 0.06;        // dimensionless channel noise scale
    double esc_lat_threshold = 6.0; // m/s^2
};

// Effective probability = sigmoid(alpha * max_lateral_accel - beta).
// Calibrated once against the default archetype mix, then frozen.
struct OutcomeRule {
    double alpha = 0.45;
    double beta = 3.5;
};

// Polyline sampled every `step` meters along the composed segments, starting
// at the origin heading +x; the exact path end is always included.
std::vector<RoadPoint> render_road(const RoadSpec& spec, double step);

struct DriveResult {
    std::vector<TelemetryChannel> channels; // altitude, esc, esc_active, speed, steering, steering_input
    Outcome outcome = Outcome::Ineffective;
    double effective_probability = 0.0;
    double max_lateral_accel = 0.0;
};

// Kinematic drive script: steering tracks local curvature with a reaction
// lag plus seeded noise; speed approaches the cruise target with lag and is
// reduced in curves; the outcome is drawn from the lateral-acceleration rule.
DriveResult simulate_drive(std::span<const RoadPoint> road, const DriverParams& params,
                           std::uint64_t seed, const OutcomeRule& rule = {});

struct SyntheticCorpus {
    Corpus corpus;
    FeatureMatrix noise_static; // 20 pure-noise per-case features (distractors)
};

// n seeded cases mixing straight-heavy, curve-heavy, and straight-then-sharp
// road archetypes, with 20 pure-noise telemetry channels per case and 20
// pure-noise static features, technique tags round-robin over three names.
SyntheticCorpus generate_corpus(std::size_t n, std::uint64_t seed);

// Corpus layout plus extra_static.csv holding the noise static features.
void write_synthetic_corpus(const SyntheticCorpus& sc, const std::filesystem::path& dir);

extern const char* const kTechniqueNames[3];
extern const double kRenderStep;

} // namespace testscape::synth
