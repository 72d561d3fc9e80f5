#pragma once

#include <span>
#include <string>

#include "tacgraph/graph.hpp"
#include "tacgraph/nn.hpp"
#include "tacgraph/servo.hpp"

namespace tacgraph {

/// Voronoi cells shaded by standardised area (blue small, red large), pins as dots.
std::string voronoi_heatmap_svg(const MarkerFrame& frame, const VoronoiFeatures& features);

/// Contour outline with one coloured polyline per trajectory and a legend.
std::string trajectory_svg(const Contour& contour, std::span<const Trajectory> trajectories);

/// Predicted against true value for depth (left panel) and roll (right panel).
std::string residual_scatter_svg(const EvalReport& report, const std::string& title);

}  // namespace tacgraph
