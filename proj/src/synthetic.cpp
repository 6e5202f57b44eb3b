#include "testscape/synthetic.hpp"

#include "testscape/csv.hpp"
#include "testscape/errors.hpp"
#include "testscape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace testscape::synth {

const char* const kTechniqueNames[3] = {"gen_alpha", "gen_beta", "gen_gamma"};
const double kRenderStep = 5.0;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Internal drive constants; DriverParams carries the tunable knobs.
constexpr double kSpeedGain = 0.05;   // per-tick approach rate toward the target speed
constexpr double kSteerGain = 12.0;   // steering units per (rad/m) curvature
constexpr double kAltitudeGain = 0.02; // meters of roll proxy per (m/s^2)
constexpr double kStartSpeedFactor = 0.5;

double quantize(double v) { return std::round(v * 1e6) / 1e6; }

struct Pen {
    double x = 0.0, y = 0.0, heading = 0.0;
};

RoadPoint point_on_segment(const Pen& pen, const Segment& seg, double at) {
    if (seg.kind == Segment::Kind::Straight)
        return {pen.x + at * std::cos(pen.heading), pen.y + at * std::sin(pen.heading)};
    const double sign = seg.left ? 1.0 : -1.0;
    const double cx = pen.x - sign * seg.radius * std::sin(pen.heading);
    const double cy = pen.y + sign * seg.radius * std::cos(pen.heading);
    // Angle from the center to the segment start.
    const double theta0 = std::atan2(pen.y - cy, pen.x - cx);
    const double dtheta = sign * at / seg.radius;
    return {cx + seg.radius * std::cos(theta0 + dtheta), cy + seg.radius * std::sin(theta0 + dtheta)};
}

double segment_path_length(const Segment& seg) {
    return seg.kind == Segment::Kind::Straight ? seg.length
                                               : seg.radius * seg.sweep_deg * kDegToRad;
}

void advance_pen(Pen& pen, const Segment& seg) {
    const double len = segment_path_length(seg);
    const RoadPoint end = point_on_segment(pen, seg, len);
    pen.x = end.x;
    pen.y = end.y;
    if (seg.kind == Segment::Kind::Arc)
        pen.heading += (seg.left ? 1.0 : -1.0) * seg.sweep_deg * kDegToRad;
}

void validate_spec(const RoadSpec& spec) {
    if (spec.segments.empty()) throw ArgumentError("road spec has no segments");
    for (const auto& seg : spec.segments) {
        if (seg.kind == Segment::Kind::Straight) {
            if (!(seg.length > 0.0)) throw ArgumentError("straight segments need positive length");
        } else {
            if (!(seg.radius > 0.0)) throw ArgumentError("arcs need positive radius");
            if (!(seg.sweep_deg > 0.0 && seg.sweep_deg <= 180.0))
                throw ArgumentError("arc sweep must be in (0, 180] degrees");
        }
    }
}

} // namespace

std::vector<RoadPoint> render_road(const RoadSpec& spec, double step) {
    if (!(step > 0.0)) throw ArgumentError("step must be positive");
    validate_spec(spec);

    double total = 0.0;
    for (const auto& seg : spec.segments) total += segment_path_length(seg);

    std::vector<RoadPoint> points;
    points.reserve(std::size_t(total / step) + 2);

    Pen pen;
    std::size_t seg_index = 0;
    double seg_start = 0.0;
    auto locate = [&](double s) {
        while (seg_index < spec.segments.size() &&
               s > seg_start + segment_path_length(spec.segments[seg_index]) + 1e-9) {
            seg_start += segment_path_length(spec.segments[seg_index]);
            advance_pen(pen, spec.segments[seg_index]);
            ++seg_index;
        }
        const auto& seg = spec.segments[std::min(seg_index, spec.segments.size() - 1)];
        return point_on_segment(pen, seg, s - seg_start);
    };

    double s = 0.0;
    while (s < total - 1e-9) {
        const RoadPoint p = locate(s);
        points.push_back({quantize(p.x), quantize(p.y)});
        s += step;
    }
    const RoadPoint end = locate(total);
    points.push_back({quantize(end.x), quantize(end.y)});
    return points;
}

DriveResult simulate_drive(std::span<const RoadPoint> road, const DriverParams& params,
                           std::uint64_t seed, const OutcomeRule& rule) {
    if (road.size() < 2) throw ArgumentError("road needs at least 2 points");
    const std::size_t ticks = road.size();

    // Signed local curvature (rad/m) at each vertex; endpoints are straight.
    std::vector<double> curvature(ticks, 0.0);
    for (std::size_t k = 1; k + 1 < ticks; ++k) {
        const double v1x = road[k].x - road[k - 1].x;
        const double v1y = road[k].y - road[k - 1].y;
        const double v2x = road[k + 1].x - road[k].x;
        const double v2y = road[k + 1].y - road[k].y;
        const double angle = std::atan2(v1x * v2y - v1y * v2x, v1x * v2x + v1y * v2y);
        const double mean_seg = 0.5 * (std::hypot(v1x, v1y) + std::hypot(v2x, v2y));
        curvature[k] = angle / mean_seg;
    }

    Rng rng(seed);
    const double outcome_draw = rng.uniform01();

    std::vector<double> speed(ticks), lateral(ticks);
    double v = params.cruise_speed * kStartSpeedFactor;
    double max_lat = 0.0;
    for (std::size_t j = 0; j < ticks; ++j) {
        const double target = params.cruise_speed / (1.0 + params.curve_slowdown * std::abs(curvature[j]));
        v = j == 0 ? std::min(v, target) : v + kSpeedGain * (target - v);
        speed[j] = v;
        lateral[j] = v * v * std::abs(curvature[j]);
        max_lat = std::max(max_lat, lateral[j]);
    }

    std::vector<double> steering(ticks), steering_input(ticks), altitude(ticks), esc(ticks),
        esc_active(ticks), speed_meas(ticks);
    const int lag = std::max(0, params.reaction_lag);
    for (std::size_t j = 0; j < ticks; ++j) {
        const double command = kSteerGain * curvature[j];
        const std::size_t delayed = j >= std::size_t(lag) ? j - std::size_t(lag) : 0;
        steering_input[j] = quantize(command + 0.5 * params.noise_std * rng.normal());
        steering[j] = quantize(kSteerGain * curvature[delayed] + params.noise_std * rng.normal());
        altitude[j] = quantize(kAltitudeGain * lateral[j] * (1.0 + 4.0 * params.noise_std * rng.normal()));
        esc[j] = quantize(std::max(0.0, lateral[j] - params.esc_lat_threshold));
        esc_active[j] = lateral[j] > params.esc_lat_threshold ? 1.0 : 0.0;
        speed_meas[j] = quantize(speed[j] * (1.0 + 0.5 * params.noise_std * rng.normal()));
    }

    DriveResult result;
    result.max_lateral_accel = max_lat;
    result.effective_probability = 1.0 / (1.0 + std::exp(-(rule.alpha * max_lat - rule.beta)));
    result.outcome = outcome_draw < result.effective_probability ? Outcome::Effective
                                                                 : Outcome::Ineffective;
    result.channels = {
        {"altitude", std::move(altitude)},
        {"esc", std::move(esc)},
        {"esc_active", std::move(esc_active)},
        {"speed", std::move(speed_meas)},
        {"steering", std::move(steering)},
        {"steering_input", std::move(steering_input)},
    };
    return result;
}

namespace {

RoadSpec straight_heavy_spec(Rng& rng) {
    RoadSpec spec;
    const int straights = 2 + int(rng.below(3)); // 2..4
    for (int s = 0; s < straights; ++s) {
        spec.segments.push_back(Segment::straight(rng.uniform(80.0, 200.0)));
        if (s + 1 < straights)
            spec.segments.push_back(
                Segment::arc(rng.uniform(250.0, 500.0), rng.uniform(10.0, 35.0), rng.below(2) == 0));
    }
    return spec;
}

RoadSpec curve_heavy_spec(Rng& rng) {
    RoadSpec spec;
    spec.segments.push_back(Segment::straight(rng.uniform(5.0, 30.0)));
    const int arcs = 4 + int(rng.below(5)); // 4..8
    for (int a = 0; a < arcs; ++a) {
        spec.segments.push_back(
            Segment::arc(rng.uniform(25.0, 55.0), rng.uniform(40.0, 120.0), rng.below(2) == 0));
        if (a + 1 < arcs) spec.segments.push_back(Segment::straight(rng.uniform(5.0, 30.0)));
    }
    return spec;
}

RoadSpec straight_sharp_spec(Rng& rng) {
    RoadSpec spec;
    spec.segments.push_back(Segment::straight(rng.uniform(120.0, 320.0)));
    spec.segments.push_back(
        Segment::arc(rng.uniform(18.0, 45.0), rng.uniform(70.0, 150.0), rng.below(2) == 0));
    if (rng.below(2) == 0) {
        spec.segments.push_back(Segment::straight(rng.uniform(20.0, 80.0)));
        spec.segments.push_back(
            Segment::arc(rng.uniform(25.0, 60.0), rng.uniform(40.0, 100.0), rng.below(2) == 0));
    }
    return spec;
}

std::string zero_padded(std::size_t value, int width) {
    std::string s = std::to_string(value);
    while (int(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

} // namespace

SyntheticCorpus generate_corpus(std::size_t n, std::uint64_t seed) {
    if (n < 50) throw ArgumentError("synthetic corpus needs n >= 50");

    constexpr int kNoiseChannels = 20;
    constexpr int kNoiseStatics = 20;

    SyntheticCorpus out;
    out.corpus.provenance = "synthetic corpus n=" + std::to_string(n) + " seed=" + std::to_string(seed);
    out.corpus.cases.reserve(n);

    out.noise_static.names.reserve(kNoiseStatics);
    for (int f = 0; f < kNoiseStatics; ++f)
        out.noise_static.names.push_back("noise_s_" + zero_padded(std::size_t(f), 2));
    out.noise_static.values.resize(kNoiseStatics, Eigen::Index(n));

    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t case_seed = mix_seed(seed, i);
        Rng road_rng(mix_seed(case_seed, 0));

        RoadSpec spec;
        const double archetype = road_rng.uniform01();
        if (archetype < 1.0 / 3.0) spec = straight_heavy_spec(road_rng);
        else if (archetype < 2.0 / 3.0) spec = curve_heavy_spec(road_rng);
        else spec = straight_sharp_spec(road_rng);

        DriverParams params;
        params.cruise_speed = road_rng.uniform(15.0, 35.0);

        TestCase tc;
        tc.id = "case_" + zero_padded(i, 6);
        tc.technique = kTechniqueNames[i % 3];
        tc.road = render_road(spec, kRenderStep);

        DriveResult drive = simulate_drive(tc.road, params, mix_seed(case_seed, 1));
        tc.outcome = drive.outcome;
        tc.telemetry = std::move(drive.channels);

        Rng noise_rng(mix_seed(case_seed, 2));
        const std::size_t ticks = tc.road.size();
        for (int c = 0; c < kNoiseChannels; ++c) {
            TelemetryChannel channel;
            channel.name = "noise_d_" + zero_padded(std::size_t(c), 2);
            channel.samples.resize(ticks);
            for (auto& v : channel.samples) v = quantize(noise_rng.normal());
            tc.telemetry.push_back(std::move(channel));
        }
        std::sort(tc.telemetry.begin(), tc.telemetry.end(),
                  [](const TelemetryChannel& a, const TelemetryChannel& b) { return a.name < b.name; });

        Rng static_rng(mix_seed(case_seed, 3));
        for (int f = 0; f < kNoiseStatics; ++f)
            out.noise_static.values(f, Eigen::Index(i)) = quantize(static_rng.normal());

        out.noise_static.instance_ids.push_back(tc.id);
        out.corpus.cases.push_back(std::move(tc));
    }
    out.noise_static.validate();
    return out;
}

void write_synthetic_corpus(const SyntheticCorpus& sc, const std::filesystem::path& dir) {
    save_corpus(sc.corpus, dir);
    write_feature_csv(dir / "extra_static.csv", sc.noise_static);
}

} // namespace testscape::synth
