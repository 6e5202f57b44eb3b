#pragma once

#include "testscape/pilot.hpp"

#include <string>

namespace testscape::svgplot {

// Scatter plot of the instance space. color_by is either "outcome"
// (Effective blue #1f77b4, Ineffective orange #ff7f0e) or the name of a
// selected feature, colored on a blue-to-red gradient over the normalized
// [0,1] value. Output bytes are deterministic for a fixed input.
std::string render_instance_space(const pilot::InstanceSpace& space, const std::string& color_by);

} // namespace testscape::svgplot
