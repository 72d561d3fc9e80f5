#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tacgraph/graph.hpp"
#include "tacgraph/nn.hpp"
#include "tacgraph/sensor_sim.hpp"
#include "tacgraph/vec2.hpp"

namespace tacgraph {

enum class ContourKind { Circle, TexturedCircle, Square, BeveledPrism, CompliantCircle };

std::string to_string(ContourKind kind);
ContourKind parse_contour_kind(std::string_view name);

struct ContourParams {
  double radius = 40.0;             // mm, circles
  double side = 60.0;               // mm, square and prism
  double chamfer = 12.0;            // mm cut from each prism corner along both sides
  double texture_amplitude = 0.3;   // mm
  double texture_frequency = 40.0;  // bumps per turn
  double compliance_gain = 0.7;     // CompliantCircle only; 1 = rigid
};

/// A closed 2D object outline centred on the origin. Signed distance is negative inside.
class Contour {
 public:
  Contour(ContourKind kind, const ContourParams& params = {});

  ContourKind kind() const { return kind_; }
  const ContourParams& params() const { return params_; }

  double signed_distance(const Vec2& p) const;
  /// Closest point on the outline.
  Vec2 nearest_point(const Vec2& p) const;
  /// Unit outward normal of the distance field at p (the nearest-point direction).
  Vec2 outward_normal(const Vec2& p) const;
  /// Membrane response factor of the object: 1 unless the contour is compliant.
  double compliance() const;
  double perimeter() const { return cumulative_.back(); }
  /// Arc-length position of the nearest outline point, in [0, perimeter).
  double arc_position(const Vec2& p) const;
  /// Point at a given arc length, counter-clockwise from the +x axis crossing.
  Vec2 point_at(double arc) const;
  /// Counter-clockwise outline vertices (dense for curved outlines).
  const std::vector<Vec2>& outline() const { return outline_; }

 private:
  struct Nearest {
    Vec2 point;
    double arc = 0.0;
    double distance = 0.0;
    std::size_t segment = 0;
  };
  Nearest nearest(const Vec2& p) const;
  bool inside(const Vec2& p) const;

  ContourKind kind_;
  ContourParams params_;
  std::vector<Vec2> outline_;
  std::vector<double> cumulative_;  // arc length at each vertex, plus the closing total
};

/// World-frame sensor state: tip position and the direction the sensor axis points (deg).
struct SensorPose2D {
  Vec2 position;
  double heading = 0.0;
};

/// Wraps an angle in degrees to (-180, 180].
double normalize_degrees(double deg);

struct ContactResult {
  ContactPose pose;  // y_depth and theta_roll only
  bool in_contact = false;
};

/// The sensor is a dome of `dome_radius` whose apex is the tip. Depth is how far the dome
/// overlaps the object along the nearest-point normal; roll is the signed angle (deg,
/// counter-clockwise positive) from the inward surface normal to the sensor axis.
/// A separated sensor reports depth 0 with in_contact false.
ContactResult true_contact(const Contour& contour, const SensorPose2D& sensor, double dome_radius);

struct PiGains {
  double kp_r = 0.5;
  double ki_r = 0.05;
  double kp_t = 0.4;
  double ki_t = 0.02;
  double integral_clamp_r = 20.0;   // mm * step
  double integral_clamp_t = 300.0;  // deg * step
  double step_length = 1.0;         // mm
  double y_ref = 5.0;               // mm, middle of the training depths
  double theta_ref = 0.0;           // deg

  /// Throws ConfigError for negative gains or non-positive clamps/step.
  void validate() const;
};

struct ServoCommand {
  double delta_r = 0.0;      // mm along the sensor axis
  double delta_theta = 0.0;  // deg added to the heading
};

class PiController {
 public:
  explicit PiController(const PiGains& gains = {});

  /// Updates the clamped integrators with e * dt, then returns kp * e + ki * I per channel.
  ServoCommand step(const PoseEstimate& estimate, double dt = 1.0);
  void reset();

  const PiGains& gains() const { return gains_; }
  double integral_y() const { return integral_y_; }
  double integral_theta() const { return integral_theta_; }

 private:
  PiGains gains_;
  double integral_y_ = 0.0;
  double integral_theta_ = 0.0;
};

/// Turns one observation (graph, plus the ground truth for oracles) into a pose estimate.
struct Estimator {
  std::string name;
  bool needs_graph = true;
  GraphKind graph_kind = GraphKind::Voronoi;
  std::function<PoseEstimate(const TactileGraph&, const ContactPose&)> estimate;
};

/// Ground truth, optionally with zero-mean Gaussian noise on the depth (mm).
Estimator oracle_estimator(double depth_noise_std = 0.0, std::uint64_t seed = 0);
/// A trained network; 3-feature models read Voronoi graphs, 2-feature models Delaunay graphs.
Estimator model_estimator(GcnModel model);

enum class Termination { Completed, Diverged, MaxSteps };
std::string to_string(Termination t);
Termination parse_termination(std::string_view name);

struct TrajectoryStep {
  int step = 0;
  SensorPose2D sensor;
  PoseEstimate estimate;
  ContactPose truth;
  bool in_contact = false;
  ServoCommand command;
};

struct Trajectory {
  std::string contour;
  std::string estimator;
  std::vector<TrajectoryStep> steps;
  Termination termination = Termination::MaxSteps;
  /// Signed arc length travelled along the outline (mm).
  double traversed = 0.0;
  double perimeter = 0.0;
};

struct ServoConfig {
  PiGains gains;
  DeformationParams deform;
  LayoutKind layout = LayoutKind::Round331;
  double pitch = 1.0;
  LayoutOptions layout_options;
  GraphParams graph;
  int max_steps = 2000;
  double dt = 1.0;
  std::uint64_t seed = 0;
  double divergence_depth = 8.0;  // mm
  int max_lost_steps = 10;
  /// Arc length of the start point along the outline (mm).
  double start_arc = 0.0;
};

/// Sensor placed on the outline at `arc`, axis along the inward normal, indented by `depth`.
SensorPose2D initial_pose(const Contour& contour, double arc, double depth);

/// Closed-loop surface following. Divergence ends the run; it is not an exception.
Trajectory run_servo(const Contour& contour, const Estimator& estimator, const ServoConfig& config);

struct Smoothness {
  double s_turn = 0.0;   // deg per mm
  double s_slope = 0.0;  // dimensionless
};

/// Throws ArgumentError for fewer than 3 points.
Smoothness smoothness(std::span<const Vec2> points);
Smoothness smoothness(const Trajectory& trajectory);

/// Largest |y_true - y_ref| and |theta_true - theta_ref| after the first `transient` steps.
struct SteadyState {
  double max_depth_error = 0.0;
  double max_angle_error = 0.0;
};
SteadyState steady_state(const Trajectory& trajectory, double y_ref, double theta_ref,
                         int transient = 20);

}  // namespace tacgraph
