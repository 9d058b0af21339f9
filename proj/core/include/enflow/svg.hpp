#pragma once

#include "enflow/model.hpp"
#include "enflow/network.hpp"

#include <string>
#include <vector>

namespace enflow {

/// Heatmap with time running left to right and component index bottom to
/// top; columns[t] is the vector at time t. Shading is linear in value from
/// white (0) to dark blue (`scale`, or the grid maximum when scale <= 0).
std::string heatmap_svg(const std::vector<Vector>& columns, const std::string& title,
                        double scale = 0.0);

/// Street graph with each directed edge drawn with width proportional to
/// its mass; opposite directions are offset to either side. Sensors are
/// drawn as small red squares.
std::string network_svg(const NetworkModel& network, const Vector& edge_mass,
                        const std::string& title, double max_mass);

/// Places several SVG documents of equal size on a grid with `per_row`
/// panels per row.
std::string tile_svg(const std::vector<std::string>& panels, int per_row,
                     double panel_width, double panel_height);

}  // namespace enflow
