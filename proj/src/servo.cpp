#include "tacgraph/servo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "tacgraph/error.hpp"

namespace tacgraph {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_circle(ContourKind k) {
  return k == ContourKind::Circle || k == ContourKind::CompliantCircle;
}

Vec2 axis_of(double heading_deg) {
  const double a = deg_to_rad(heading_deg);
  return {std::cos(a), std::sin(a)};
}

std::vector<Vec2> make_outline(ContourKind kind, const ContourParams& p) {
  std::vector<Vec2> pts;
  switch (kind) {
    case ContourKind::Circle:
    case ContourKind::CompliantCircle: {
      const int n = 1440;
      for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * i / n;
        pts.push_back({p.radius * std::cos(a), p.radius * std::sin(a)});
      }
      break;
    }
    case ContourKind::TexturedCircle: {
      const int n = std::max(1440, static_cast<int>(64 * p.texture_frequency));
      for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * i / n;
        const double r = p.radius + p.texture_amplitude * std::sin(p.texture_frequency * a);
        pts.push_back({r * std::cos(a), r * std::sin(a)});
      }
      break;
    }
    case ContourKind::Square: {
      const double h = p.side / 2.0;
      pts = {{h, 0.0}, {h, h}, {-h, h}, {-h, -h}, {h, -h}};
      break;
    }
    case ContourKind::BeveledPrism: {
      const double h = p.side / 2.0;
      const double c = p.chamfer;
      pts = {{h, 0.0},     {h, h - c},  {h - c, h},   {-h + c, h}, {-h, h - c},
             {-h, -h + c}, {-h + c, -h}, {h - c, -h}, {h, -h + c}};
      break;
    }
  }
  return pts;
}

void validate_params(ContourKind kind, const ContourParams& p) {
  if (is_circle(kind) || kind == ContourKind::TexturedCircle) {
    if (!(p.radius > 0.0)) throw ConfigError("contour: radius must be > 0");
  } else if (!(p.side > 0.0)) {
    throw ConfigError("contour: side must be > 0");
  }
  if (kind == ContourKind::TexturedCircle) {
    if (!(p.texture_amplitude >= 0.0 && p.texture_amplitude < p.radius)) {
      throw ConfigError("contour: texture amplitude must lie in [0, radius)");
    }
    if (!(p.texture_frequency >= 0.0)) throw ConfigError("contour: texture frequency must be >= 0");
  }
  if (kind == ContourKind::BeveledPrism && !(p.chamfer > 0.0 && p.chamfer < p.side / 2.0)) {
    throw ConfigError("contour: chamfer must lie in (0, side / 2)");
  }
  if (kind == ContourKind::CompliantCircle && !(p.compliance_gain > 0.0 && p.compliance_gain <= 1.0)) {
    throw ConfigError("contour: compliance_gain must lie in (0, 1]");
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t step) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (step + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string to_string(ContourKind kind) {
  switch (kind) {
    case ContourKind::Circle: return "circle";
    case ContourKind::TexturedCircle: return "textured_circle";
    case ContourKind::Square: return "square";
    case ContourKind::BeveledPrism: return "beveled_prism";
    case ContourKind::CompliantCircle: return "compliant_circle";
  }
  throw ConfigError("unknown contour kind");
}

ContourKind parse_contour_kind(std::string_view name) {
  std::string n = lower(name);
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "circle") return ContourKind::Circle;
  if (n == "textured_circle" || n == "textured") return ContourKind::TexturedCircle;
  if (n == "square") return ContourKind::Square;
  if (n == "beveled_prism" || n == "prism") return ContourKind::BeveledPrism;
  if (n == "compliant_circle" || n == "compliant") return ContourKind::CompliantCircle;
  throw ConfigError("unknown contour '" + std::string(name) + "'");
}

Contour::Contour(ContourKind kind, const ContourParams& params) : kind_(kind), params_(params) {
  validate_params(kind, params);
  outline_ = make_outline(kind, params);
  cumulative_.reserve(outline_.size() + 1);
  cumulative_.push_back(0.0);
  for (std::size_t i = 0; i < outline_.size(); ++i) {
    cumulative_.push_back(cumulative_.back() +
                          distance(outline_[i], outline_[(i + 1) % outline_.size()]));
  }
}

Contour::Nearest Contour::nearest(const Vec2& p) const {
  Nearest best;
  best.distance = std::numeric_limits<double>::infinity();
  const std::size_t n = outline_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = outline_[i];
    const Vec2& b = outline_[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = squared_norm(ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + ab * t;
    const double d = distance(p, q);
    if (d < best.distance) {
      best = {q, cumulative_[i] + t * std::sqrt(len2), d, i};
    }
  }
  if (best.arc >= perimeter()) best.arc -= perimeter();
  return best;
}

bool Contour::inside(const Vec2& p) const {
  bool in = false;
  const std::size_t n = outline_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = outline_[i];
    const Vec2& b = outline_[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      in = !in;
    }
  }
  return in;
}

double Contour::signed_distance(const Vec2& p) const {
  if (is_circle(kind_)) return norm(p) - params_.radius;
  const double d = nearest(p).distance;
  return inside(p) ? -d : d;
}

Vec2 Contour::nearest_point(const Vec2& p) const {
  if (is_circle(kind_)) {
    const double r = norm(p);
    if (r == 0.0) return {params_.radius, 0.0};
    return p * (params_.radius / r);
  }
  return nearest(p).point;
}

Vec2 Contour::outward_normal(const Vec2& p) const {
  if (is_circle(kind_)) {
    const double r = norm(p);
    return r == 0.0 ? Vec2{1.0, 0.0} : p / r;
  }
  const Nearest q = nearest(p);
  if (q.distance > 1e-12) {
    const Vec2 n = (p - q.point) / q.distance;
    return inside(p) ? n * -1.0 : n;
  }
  const Vec2 t = outline_[(q.segment + 1) % outline_.size()] - outline_[q.segment];
  const Vec2 n{t.y, -t.x};
  return n / norm(n);
}

double Contour::compliance() const {
  return kind_ == ContourKind::CompliantCircle ? params_.compliance_gain : 1.0;
}

double Contour::arc_position(const Vec2& p) const { return nearest(p).arc; }

Vec2 Contour::point_at(double arc) const {
  const double P = perimeter();
  arc = std::fmod(arc, P);
  if (arc < 0.0) arc += P;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), arc);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()) - 1,
                                              outline_.size() - 1);
  const Vec2& a = outline_[i];
  const Vec2& b = outline_[(i + 1) % outline_.size()];
  const double len = cumulative_[i + 1] - cumulative_[i];
  const Vec2 q = len > 0.0 ? a + (b - a) * ((arc - cumulative_[i]) / len) : a;
  return is_circle(kind_) ? nearest_point(q) : q;
}

double normalize_degrees(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

ContactResult true_contact(const Contour& contour, const SensorPose2D& sensor, double dome_radius) {
  if (!(dome_radius > 0.0)) throw ArgumentError("true_contact: dome radius must be > 0");
  const Vec2 a = axis_of(sensor.heading);
  const Vec2 centre = sensor.position - a * dome_radius;
  const double depth = dome_radius - contour.signed_distance(centre);
  const Vec2 inward = contour.outward_normal(centre) * -1.0;
  ContactResult r;
  r.pose.theta_roll = rad_to_deg(std::atan2(cross(inward, a), dot(inward, a)));
  r.in_contact = depth > 0.0;
  r.pose.y_depth = r.in_contact ? depth : 0.0;
  return r;
}

void PiGains::validate() const {
  if (kp_r < 0 || ki_r < 0 || kp_t < 0 || ki_t < 0) throw ConfigError("servo: gains must be >= 0");
  if (!(integral_clamp_r > 0) || !(integral_clamp_t > 0)) {
    throw ConfigError("servo: integral clamps must be > 0");
  }
  if (!(step_length > 0)) throw ConfigError("servo: step_length must be > 0");
  if (!std::isfinite(y_ref) || !std::isfinite(theta_ref)) throw ConfigError("servo: reference must be finite");
}

PiController::PiController(const PiGains& gains) : gains_(gains) { gains_.validate(); }

ServoCommand PiController::step(const PoseEstimate& estimate, double dt) {
  if (!std::isfinite(estimate.y) || !std::isfinite(estimate.theta) || !std::isfinite(dt)) {
    throw ArgumentError("pi_step: non-finite input");
  }
  const double e_y = gains_.y_ref - estimate.y;
  const double e_t = gains_.theta_ref - estimate.theta;
  integral_y_ = std::clamp(integral_y_ + e_y * dt, -gains_.integral_clamp_r, gains_.integral_clamp_r);
  integral_theta_ =
      std::clamp(integral_theta_ + e_t * dt, -gains_.integral_clamp_t, gains_.integral_clamp_t);
  return {gains_.kp_r * e_y + gains_.ki_r * integral_y_,
          gains_.kp_t * e_t + gains_.ki_t * integral_theta_};
}

void PiController::reset() {
  integral_y_ = 0.0;
  integral_theta_ = 0.0;
}

Estimator oracle_estimator(double depth_noise_std, std::uint64_t seed) {
  if (!(depth_noise_std >= 0.0)) throw ArgumentError("oracle: noise std must be >= 0");
  Estimator e;
  e.name = depth_noise_std > 0.0 ? "oracle+noise" : "oracle";
  e.needs_graph = false;
  auto rng = std::make_shared<std::mt19937_64>(seed);
  e.estimate = [rng, depth_noise_std](const TactileGraph&, const ContactPose& truth) {
    PoseEstimate p{truth.y_depth, truth.theta_roll};
    if (depth_noise_std > 0.0) p.y += std::normal_distribution<double>(0.0, depth_noise_std)(*rng);
    return p;
  };
  return e;
}

Estimator model_estimator(GcnModel model) {
  model.validate();
  Estimator e;
  e.graph_kind = model.f_in == 3 ? GraphKind::Voronoi : GraphKind::Delaunay;
  e.name = model.f_in == 3 ? "voronoi_gnn" : "vanilla_gnn";
  auto shared = std::make_shared<const GcnModel>(std::move(model));
  e.estimate = [shared](const TactileGraph& g, const ContactPose&) { return gcn_forward(*shared, g); };
  return e;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::Diverged: return "diverged";
    case Termination::MaxSteps: return "max_steps";
  }
  throw ConfigError("unknown termination");
}

Termination parse_termination(std::string_view name) {
  const std::string n = lower(name);
  if (n == "completed") return Termination::Completed;
  if (n == "diverged") return Termination::Diverged;
  if (n == "max_steps") return Termination::MaxSteps;
  throw ParseError("unknown termination '" + std::string(name) + "'");
}

SensorPose2D initial_pose(const Contour& contour, double arc, double depth) {
  const Vec2 q = contour.point_at(arc);
  const Vec2 n = contour.outward_normal(q);
  return {q - n * depth, normalize_degrees(rad_to_deg(std::atan2(-n.y, -n.x)))};
}

Trajectory run_servo(const Contour& contour, const Estimator& estimator, const ServoConfig& config) {
  config.gains.validate();
  if (config.max_steps < 1) throw ConfigError("servo: max_steps must be >= 1");
  if (!(config.dt > 0.0)) throw ConfigError("servo: dt must be > 0");
  if (!estimator.estimate) throw ArgumentError("servo: estimator has no function");
  const SensorLayout layout = build_layout(config.layout, config.pitch, config.layout_options);
  DeformationParams dp = config.deform;
  dp.compliance_gain *= contour.compliance();
  validate(dp, layout);

  Trajectory traj;
  traj.contour = to_string(contour.kind());
  traj.estimator = estimator.name;
  traj.perimeter = contour.perimeter();

  PiController pi(config.gains);
  SensorPose2D sensor = initial_pose(contour, config.start_arc, config.gains.y_ref);
  const Vec2 start = sensor.position;
  double last_arc = contour.arc_position(sensor.position);
  const double step_len = config.gains.step_length;
  const double R = dp.dome_radius;
  int lost = 0;
  const TactileGraph empty;

  for (int step = 0;; ++step) {
    const ContactResult contact = true_contact(contour, sensor, R);
    TrajectoryStep rec;
    rec.step = step;
    rec.sensor = sensor;
    rec.truth = contact.pose;
    rec.in_contact = contact.in_contact;

    if (step >= config.max_steps) {
      traj.steps.push_back(rec);
      traj.termination = Termination::MaxSteps;
      break;
    }
    if (std::abs(contact.pose.y_depth) > config.divergence_depth) {
      traj.steps.push_back(rec);
      traj.termination = Termination::Diverged;
      break;
    }
    lost = contact.in_contact ? 0 : lost + 1;
    if (lost >= config.max_lost_steps) {
      traj.steps.push_back(rec);
      traj.termination = Termination::Diverged;
      break;
    }
    if (traj.traversed >= 0.9 * traj.perimeter && distance(sensor.position, start) <= 2.0 * step_len) {
      traj.steps.push_back(rec);
      traj.termination = Termination::Completed;
      break;
    }

    if (estimator.needs_graph) {
      const MarkerFrame frame = deform(layout, contact.pose, dp, mix_seed(config.seed, step));
      rec.estimate = estimator.estimate(build_graph(frame, estimator.graph_kind, config.graph), contact.pose);
    } else {
      rec.estimate = estimator.estimate(empty, contact.pose);
    }
    rec.command = pi.step(rec.estimate, config.dt);
    traj.steps.push_back(rec);

    // Roll about the dome centre, press along the new axis, then slide along the surface.
    const Vec2 centre = sensor.position - axis_of(sensor.heading) * R;
    sensor.heading = normalize_degrees(sensor.heading + rec.command.delta_theta);
    const Vec2 a = axis_of(sensor.heading);
    sensor.position = centre + a * (R + rec.command.delta_r) + rotate(a, -kPi / 2.0) * step_len;

    const double arc = contour.arc_position(sensor.position);
    double d = arc - last_arc;
    if (d > traj.perimeter / 2.0) d -= traj.perimeter;
    if (d <= -traj.perimeter / 2.0) d += traj.perimeter;
    traj.traversed += d;
    last_arc = arc;
  }
  return traj;
}

Smoothness smoothness(std::span<const Vec2> pts) {
  if (pts.size() < 3) throw ArgumentError("smoothness: need at least 3 points");
  Smoothness s;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - pts[i - 1];
    s.s_slope += std::abs(d.y) / std::max(std::abs(d.x), 1e-6);
  }
  s.s_slope /= static_cast<double>(pts.size() - 1);
  std::size_t counted = 0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec2 u = pts[i] - pts[i - 1];
    const Vec2 v = pts[i + 1] - pts[i];
    const double len = 0.5 * (norm(u) + norm(v));
    if (len <= 0.0) continue;
    const double turn = (norm(u) > 0.0 && norm(v) > 0.0)
                            ? std::abs(rad_to_deg(std::atan2(cross(u, v), dot(u, v))))
                            : 0.0;
    s.s_turn += turn / len;
    ++counted;
  }
  if (counted > 0) s.s_turn /= static_cast<double>(counted);
  return s;
}

Smoothness smoothness(const Trajectory& trajectory) {
  std::vector<Vec2> pts;
  pts.reserve(trajectory.steps.size());
  for (const auto& s : trajectory.steps) pts.push_back(s.sensor.position);
  return smoothness(pts);
}

SteadyState steady_state(const Trajectory& trajectory, double y_ref, double theta_ref, int transient) {
  SteadyState s;
  for (const auto& st : trajectory.steps) {
    if (st.step < transient) continue;
    s.max_depth_error = std::max(s.max_depth_error, std::abs(st.truth.y_depth - y_ref));
    s.max_angle_error = std::max(s.max_angle_error, std::abs(st.truth.theta_roll - theta_ref));
  }
  return s;
}

}  // namespace tacgraph
