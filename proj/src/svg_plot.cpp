#include "testscape/svg_plot.hpp"

#include "testscape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace testscape::svgplot {

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kPlotX = 60.0, kPlotY = 40.0, kPlotW = 420.0, kPlotH = 380.0;

const char* kEffectiveColor = "#1f77b4";   // blue
const char* kIneffectiveColor = "#ff7f0e"; // orange

struct Rgb {
    int r, g, b;
};
constexpr Rgb kGradientLow = {44, 123, 182};  // #2c7bb6
constexpr Rgb kGradientHigh = {215, 25, 28};  // #d7191c

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string gradient_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  int(std::lround(kGradientLow.r + t * (kGradientHigh.r - kGradientLow.r))),
                  int(std::lround(kGradientLow.g + t * (kGradientHigh.g - kGradientLow.g))),
                  int(std::lround(kGradientLow.b + t * (kGradientHigh.b - kGradientLow.b))));
    return buf;
}

} // namespace

std::string render_instance_space(const pilot::InstanceSpace& space, const std::string& color_by) {
    if (space.coordinates.empty()) throw ArgumentError("instance space is empty");
    const bool outcome_mode = color_by == "outcome";
    Eigen::Index feature_row = 0;
    if (!outcome_mode) {
        const auto it = std::find(space.feature_names.begin(), space.feature_names.end(), color_by);
        if (it == space.feature_names.end())
            throw ArgumentError("unknown feature " + color_by);
        feature_row = Eigen::Index(it - space.feature_names.begin());
    }

    double z1_min = space.coordinates[0][0], z1_max = z1_min;
    double z2_min = space.coordinates[0][1], z2_max = z2_min;
    for (const auto& c : space.coordinates) {
        z1_min = std::min(z1_min, c[0]);
        z1_max = std::max(z1_max, c[0]);
        z2_min = std::min(z2_min, c[1]);
        z2_max = std::max(z2_max, c[1]);
    }
    const double z1_span = z1_max > z1_min ? z1_max - z1_min : 1.0;
    const double z2_span = z2_max > z2_min ? z2_max - z2_min : 1.0;
    auto map_x = [&](double z1) { return kPlotX + (z1 - z1_min) / z1_span * kPlotW; };
    auto map_y = [&](double z2) { return kPlotY + (1.0 - (z2 - z2_min) / z2_span) * kPlotH; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(kWidth) << "\" height=\""
        << int(kHeight) << "\" viewBox=\"0 0 " << int(kWidth) << ' ' << int(kHeight) << "\">\n";
    svg << "  <rect width=\"" << int(kWidth) << "\" height=\"" << int(kHeight)
        << "\" fill=\"white\"/>\n";
    svg << "  <text x=\"" << fmt(kPlotX + kPlotW / 2.0)
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << (outcome_mode ? std::string("Instance space by outcome")
                         : "Instance space: " + color_by)
        << "</text>\n";

    if (!outcome_mode) {
        svg << "  <defs>\n    <linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n"
            << "      <stop offset=\"0\" stop-color=\"" << gradient_color(0.0) << "\"/>\n"
            << "      <stop offset=\"1\" stop-color=\"" << gradient_color(1.0) << "\"/>\n"
            << "    </linearGradient>\n  </defs>\n";
    }

    // Plot frame and axis labels.
    svg << "  <rect x=\"" << fmt(kPlotX) << "\" y=\"" << fmt(kPlotY) << "\" width=\"" << fmt(kPlotW)
        << "\" height=\"" << fmt(kPlotH) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    svg << "  <text x=\"" << fmt(kPlotX + kPlotW / 2.0) << "\" y=\"" << fmt(kPlotY + kPlotH + 36.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">z1</text>\n";
    svg << "  <text x=\"" << fmt(kPlotX - 40.0) << "\" y=\"" << fmt(kPlotY + kPlotH / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 "
        << fmt(kPlotX - 40.0) << ' ' << fmt(kPlotY + kPlotH / 2.0) << ")\">z2</text>\n";
    svg << "  <text x=\"" << fmt(kPlotX) << "\" y=\"" << fmt(kPlotY + kPlotH + 16.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(z1_min)
        << "</text>\n";
    svg << "  <text x=\"" << fmt(kPlotX + kPlotW) << "\" y=\"" << fmt(kPlotY + kPlotH + 16.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(z1_max)
        << "</text>\n";
    svg << "  <text x=\"" << fmt(kPlotX - 8.0) << "\" y=\"" << fmt(kPlotY + kPlotH)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(z2_min)
        << "</text>\n";
    svg << "  <text x=\"" << fmt(kPlotX - 8.0) << "\" y=\"" << fmt(kPlotY + 10.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(z2_max)
        << "</text>\n";

    // Scatter marks.
    for (std::size_t i = 0; i < space.coordinates.size(); ++i) {
        std::string color;
        if (outcome_mode) {
            color = space.labels[i] == Outcome::Effective ? kEffectiveColor : kIneffectiveColor;
        } else {
            color = gradient_color(space.normalized_features(feature_row, Eigen::Index(i)));
        }
        svg << "  <circle class=\"pt\" cx=\"" << fmt(map_x(space.coordinates[i][0])) << "\" cy=\""
            << fmt(map_y(space.coordinates[i][1])) << "\" r=\"3\" fill=\"" << color
            << "\" fill-opacity=\"0.8\"/>\n";
    }

    // Legend (rect swatches only, so scatter marks are the only circles).
    const double legend_x = kPlotX + kPlotW + 16.0;
    if (outcome_mode) {
        svg << "  <rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(kPlotY) << "\" width=\"12\" height=\"12\" fill=\""
            << kEffectiveColor << "\"/>\n";
        svg << "  <text x=\"" << fmt(legend_x + 18.0) << "\" y=\"" << fmt(kPlotY + 10.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">effective</text>\n";
        svg << "  <rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(kPlotY + 20.0)
            << "\" width=\"12\" height=\"12\" fill=\"" << kIneffectiveColor << "\"/>\n";
        svg << "  <text x=\"" << fmt(legend_x + 18.0) << "\" y=\"" << fmt(kPlotY + 30.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">ineffective</text>\n";
    } else {
        const double bar_h = 160.0;
        svg << "  <rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(kPlotY) << "\" width=\"14\" height=\""
            << fmt(bar_h) << "\" fill=\"url(#scale)\" stroke=\"#444444\"/>\n";
        svg << "  <text x=\"" << fmt(legend_x + 20.0) << "\" y=\"" << fmt(kPlotY + bar_h)
            << "\" font-family=\"sans-serif\" font-size=\"12\">0.0</text>\n";
        svg << "  <text x=\"" << fmt(legend_x + 20.0) << "\" y=\"" << fmt(kPlotY + 10.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">1.0</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace testscape::svgplot
