#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tacgraph/vec2.hpp"

namespace tacgraph {

enum class LayoutKind { Hexagonal127, Round331, Custom };

std::string to_string(LayoutKind kind);
/// Accepts "hexagonal127"/"hex127"/"hexagonal" and "round331"/"round"/"custom" (case-insensitive).
LayoutKind parse_layout_kind(std::string_view name);

/// Rest positions of the pins of one sensor morphology, in mm, centred on the dome apex.
struct SensorLayout {
  LayoutKind kind = LayoutKind::Custom;
  double pitch = 1.0;
  std::vector<Vec2> markers;
  double boundary_radius = 0.0;
  /// Number of concentric rings around the centre pin (0 for Custom).
  int rings = 0;

  std::size_t size() const { return markers.size(); }
  /// Ring index per marker for generated layouts (empty for Custom).
  std::vector<int> ring_of_marker() const;
};

struct LayoutOptions {
  /// Overrides the ring count of the named morphology (6 for hexagonal, 10 for round).
  std::optional<int> rings;
  /// Radial imaging distortion r -> r * (1 + k * (r / r_max)^2). Positive values push the
  /// outer pins of straight hexagon sides slightly inside the hull, as the camera sees them.
  double radial_distortion = 0.05;
};

/// Ring-major, angle-minor layouts: a centred hexagonal grid (3k(k+1)+1 pins) or
/// concentric rings of 6i pins plus a centre pin.
SensorLayout build_layout(LayoutKind kind, double pitch, const LayoutOptions& options = {});

/// Wraps arbitrary rest positions as a Custom layout.
SensorLayout make_custom_layout(std::vector<Vec2> markers, double pitch);

/// Net contact pose: indentation depth along the sensor axis and surface-relative roll,
/// plus shear nuisance applied during data collection.
struct ContactPose {
  double y_depth = 0.0;     // mm
  double theta_roll = 0.0;  // deg
  double shear_x = 0.0;     // mm
  double shear_roll = 0.0;  // deg

  friend bool operator==(const ContactPose&, const ContactPose&) = default;
};

/// Training envelope: depth is a +-2 mm offset around a nominal tap.
struct PoseEnvelope {
  double nominal_tap = 5.0;
  double depth_offset = 2.0;
  double theta_max = 30.0;
  double shear_x_max = 5.0;
  double shear_roll_max = 5.0;
};

bool is_finite(const ContactPose& pose);
/// Throws ArgumentError naming the first field outside the envelope.
void validate_training_range(const ContactPose& pose, const PoseEnvelope& envelope = {});

struct MarkerFrame {
  std::vector<Vec2> positions;
  std::optional<ContactPose> source_pose;

  std::size_t size() const { return positions.size(); }
};

/// Parameters of the synthetic membrane response.
struct DeformationParams {
  double dome_radius = 12.0;       // mm
  double push_gain = 0.12;         // alpha, dimensionless
  double contact_sigma = 3.0;      // mm
  double roll_offset_gain = 10.0;  // mm of contact-centre travel per radian of roll
  double noise_std = 0.02;         // mm
  double compliance_gain = 1.0;    // 1 = rigid
  double core_radius = 1.0;        // mm; radial push falls off linearly inside this radius
  double shear_gain = 0.05;        // tangential drag per mm of shear at the contact centre
  double shear_saturation = 1.0;   // mm of depth at which shear coupling reaches tanh(1)

  /// Largest alpha*d for which the displacement field has Lipschitz constant below one,
  /// which keeps the pose-to-frame map injective.
  double injective_push_bound() const;
};

/// Throws ConfigError unless sigma > 0, dome_radius > boundary_radius, noise_std >= 0, etc.
void validate(const DeformationParams& params, const SensorLayout& layout);

/// Contact centre in the sensor frame for a pose.
Vec2 contact_center(const ContactPose& pose, const DeformationParams& params);

/// Deformed marker positions. Pure function of its arguments (noise drawn from `seed`).
MarkerFrame deform(const SensorLayout& layout, const ContactPose& pose,
                   const DeformationParams& params, std::uint64_t seed);

/// Rest frame (identity deformation, no noise).
MarkerFrame rest_frame(const SensorLayout& layout);

}  // namespace tacgraph
