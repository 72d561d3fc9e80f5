#include "tacgraph/sensor_sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "tacgraph/error.hpp"

namespace tacgraph {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double polar_angle(const Vec2& p) {
  double a = std::atan2(p.y, p.x);
  if (a < 0) a += 2.0 * std::numbers::pi;
  // Snap values within rounding of a full turn back to zero so ordering is stable.
  if (2.0 * std::numbers::pi - a < 1e-12) a = 0.0;
  return a;
}

void sort_ring_by_angle(std::vector<Vec2>& ring) {
  std::stable_sort(ring.begin(), ring.end(),
                   [](const Vec2& a, const Vec2& b) { return polar_angle(a) < polar_angle(b); });
}

std::vector<Vec2> hexagonal_ring(int k, double pitch) {
  std::vector<Vec2> ring;
  ring.reserve(6 * k);
  for (int side = 0; side < 6; ++side) {
    const double a0 = side * std::numbers::pi / 3.0;
    const double a1 = (side + 1) * std::numbers::pi / 3.0;
    const Vec2 c0{k * pitch * std::cos(a0), k * pitch * std::sin(a0)};
    const Vec2 c1{k * pitch * std::cos(a1), k * pitch * std::sin(a1)};
    for (int t = 0; t < k; ++t) ring.push_back(c0 + (c1 - c0) * (static_cast<double>(t) / k));
  }
  sort_ring_by_angle(ring);
  return ring;
}

std::vector<Vec2> round_ring(int i, double pitch) {
  std::vector<Vec2> ring;
  const int count = 6 * i;
  ring.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * k / count;
    ring.push_back({i * pitch * std::cos(a), i * pitch * std::sin(a)});
  }
  return ring;
}

double max_radius(const std::vector<Vec2>& pts) {
  double r = 0.0;
  for (const auto& p : pts) r = std::max(r, norm(p));
  return r;
}

}  // namespace

std::string to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::Hexagonal127: return "hexagonal127";
    case LayoutKind::Round331: return "round331";
    case LayoutKind::Custom: return "custom";
  }
  throw ConfigError("unknown layout kind");
}

LayoutKind parse_layout_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "hexagonal127" || n == "hex127" || n == "hexagonal") return LayoutKind::Hexagonal127;
  if (n == "round331" || n == "round") return LayoutKind::Round331;
  if (n == "custom") return LayoutKind::Custom;
  throw ConfigError("unknown layout kind '" + std::string(name) + "'");
}

std::vector<int> SensorLayout::ring_of_marker() const {
  if (kind == LayoutKind::Custom) return {};
  std::vector<int> out;
  out.reserve(markers.size());
  out.push_back(0);
  for (int k = 1; k <= rings; ++k) out.insert(out.end(), 6 * k, k);
  return out;
}

SensorLayout build_layout(LayoutKind kind, double pitch, const LayoutOptions& options) {
  if (!(pitch > 0.0) || !std::isfinite(pitch)) {
    throw ArgumentError("build_layout: pitch must be positive");
  }
  int default_rings = 0;
  switch (kind) {
    case LayoutKind::Hexagonal127: default_rings = 6; break;
    case LayoutKind::Round331: default_rings = 10; break;
    case LayoutKind::Custom:
      throw ConfigError("build_layout: custom layouts are created with make_custom_layout");
    default: throw ConfigError("build_layout: unknown layout kind");
  }
  const int rings = options.rings.value_or(default_rings);
  if (rings < 0) throw ArgumentError("build_layout: ring count must be non-negative");

  SensorLayout layout;
  layout.kind = kind;
  layout.pitch = pitch;
  layout.rings = rings;
  layout.markers.push_back({0.0, 0.0});
  for (int k = 1; k <= rings; ++k) {
    auto ring = kind == LayoutKind::Hexagonal127 ? hexagonal_ring(k, pitch) : round_ring(k, pitch);
    layout.markers.insert(layout.markers.end(), ring.begin(), ring.end());
  }

  const double r_max = max_radius(layout.markers);
  if (options.radial_distortion != 0.0 && r_max > 0.0) {
    for (auto& p : layout.markers) {
      const double rel = norm(p) / r_max;
      p *= 1.0 + options.radial_distortion * rel * rel;
    }
  }
  layout.boundary_radius = max_radius(layout.markers) + 0.5 * pitch;
  return layout;
}

SensorLayout make_custom_layout(std::vector<Vec2> markers, double pitch) {
  if (!(pitch > 0.0)) throw ArgumentError("make_custom_layout: pitch must be positive");
  SensorLayout layout;
  layout.kind = LayoutKind::Custom;
  layout.pitch = pitch;
  layout.markers = std::move(markers);
  layout.boundary_radius = max_radius(layout.markers) + 0.5 * pitch;
  return layout;
}

bool is_finite(const ContactPose& p) {
  return std::isfinite(p.y_depth) && std::isfinite(p.theta_roll) && std::isfinite(p.shear_x) &&
         std::isfinite(p.shear_roll);
}

void validate_training_range(const ContactPose& pose, const PoseEnvelope& env) {
  auto check = [](double v, double lo, double hi, const char* field) {
    if (!(v >= lo && v <= hi)) {
      throw ArgumentError(std::string("pose field ") + field + "=" + std::to_string(v) +
                          " outside training range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    }
  };
  check(pose.y_depth, env.nominal_tap - env.depth_offset, env.nominal_tap + env.depth_offset,
        "y_depth");
  check(pose.theta_roll, -env.theta_max, env.theta_max, "theta_roll");
  check(pose.shear_x, -env.shear_x_max, env.shear_x_max, "shear_x");
  check(pose.shear_roll, -env.shear_roll_max, env.shear_roll_max, "shear_roll");
}

double DeformationParams::injective_push_bound() const {
  return std::min(core_radius, contact_sigma * std::sqrt(std::exp(1.0)));
}

void validate(const DeformationParams& p, const SensorLayout& layout) {
  if (!(p.contact_sigma > 0.0)) throw ConfigError("deformation: contact_sigma must be > 0");
  if (!(p.dome_radius > layout.boundary_radius)) {
    throw ConfigError("deformation: dome_radius must exceed the layout boundary radius");
  }
  if (!(p.noise_std >= 0.0)) throw ConfigError("deformation: noise_std must be >= 0");
  if (!(p.compliance_gain >= 0.0 && p.compliance_gain <= 1.0)) {
    throw ConfigError("deformation: compliance_gain must lie in [0, 1]");
  }
  if (!(p.core_radius > 0.0)) throw ConfigError("deformation: core_radius must be > 0");
  if (!(p.push_gain >= 0.0)) throw ConfigError("deformation: push_gain must be >= 0");
  if (!(p.shear_saturation > 0.0)) throw ConfigError("deformation: shear_saturation must be > 0");
}

Vec2 contact_center(const ContactPose& pose, const DeformationParams& params) {
  return {params.roll_offset_gain * deg_to_rad(pose.theta_roll), 0.0};
}

MarkerFrame deform(const SensorLayout& layout, const ContactPose& pose,
                   const DeformationParams& params, std::uint64_t seed) {
  if (!is_finite(pose)) throw ArgumentError("deform: pose must be finite");
  validate(params, layout);

  const Vec2 c = contact_center(pose, params);
  const double depth = std::max(0.0, pose.y_depth) * params.compliance_gain;
  const double push = params.push_gain * depth;
  const double two_sigma_sq = 2.0 * params.contact_sigma * params.contact_sigma;
  const double engagement = std::tanh(depth / params.shear_saturation);
  const double drag = params.shear_gain * pose.shear_x * engagement;
  const double twist = deg_to_rad(pose.shear_roll) * engagement;

  MarkerFrame frame;
  frame.source_pose = pose;
  frame.positions.reserve(layout.size());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const Vec2& p : layout.markers) {
    const Vec2 rel = p - c;
    const double r = norm(rel);
    const double g = std::exp(-(r * r) / two_sigma_sq);
    Vec2 q = p + rel * (push * g / std::max(r, params.core_radius));
    q.x += drag * g;
    if (twist != 0.0) q += rotate(rel, twist * g) - rel;
    if (params.noise_std > 0.0) {
      q.x += params.noise_std * noise(rng);
      q.y += params.noise_std * noise(rng);
    }
    frame.positions.push_back(q);
  }
  return frame;
}

MarkerFrame rest_frame(const SensorLayout& layout) {
  MarkerFrame frame;
  frame.positions = layout.markers;
  frame.source_pose = ContactPose{};
  return frame;
}

}  // namespace tacgraph
