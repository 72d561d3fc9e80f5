#include "tacgraph/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "tacgraph/error.hpp"

namespace tacgraph {

namespace {

struct Binding {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

template <class Int>
Int to_int(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + s + "'");
}

template <class Get>
Binding real(const char* section, const char* key, Get member) {
  return {section, key, [member](RunConfig& c, const std::string& v) { member(c) = to_double(v); },
          [member](const RunConfig& c) { return fmt(member(const_cast<RunConfig&>(c))); }};
}

template <class Int, class Get>
Binding integer(const char* section, const char* key, Get member) {
  return {section, key, [member](RunConfig& c, const std::string& v) { member(c) = to_int<Int>(v); },
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Binding boolean(const char* section, const char* key, Get member) {
  return {section, key, [member](RunConfig& c, const std::string& v) { member(c) = to_bool(v); },
          [member](const RunConfig& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> b;
    // [sensor]
    b.push_back({"sensor", "layout",
                 [](RunConfig& c, const std::string& v) { c.collection.layout = parse_layout_kind(v); },
                 [](const RunConfig& c) { return to_string(c.collection.layout); }});
    b.push_back(real("sensor", "pitch", [](RunConfig& c) -> double& { return c.collection.pitch; }));
    b.push_back({"sensor", "rings",
                 [](RunConfig& c, const std::string& v) {
                   const int r = to_int<int>(v);
                   if (r < 0) throw ConfigError("rings must be >= 0");
                   c.collection.layout_options.rings = r == 0 ? std::nullopt : std::optional<int>(r);
                 },
                 [](const RunConfig& c) { return std::to_string(c.collection.layout_options.rings.value_or(0)); }});
    b.push_back(real("sensor", "radial_distortion",
                     [](RunConfig& c) -> double& { return c.collection.layout_options.radial_distortion; }));
    b.push_back(real("sensor", "dome_radius", [](RunConfig& c) -> double& { return c.collection.deform.dome_radius; }));
    b.push_back(real("sensor", "push_gain", [](RunConfig& c) -> double& { return c.collection.deform.push_gain; }));
    b.push_back(real("sensor", "contact_sigma", [](RunConfig& c) -> double& { return c.collection.deform.contact_sigma; }));
    b.push_back(real("sensor", "roll_offset_gain",
                     [](RunConfig& c) -> double& { return c.collection.deform.roll_offset_gain; }));
    b.push_back(real("sensor", "noise_std", [](RunConfig& c) -> double& { return c.collection.deform.noise_std; }));
    b.push_back(real("sensor", "compliance_gain",
                     [](RunConfig& c) -> double& { return c.collection.deform.compliance_gain; }));
    b.push_back(real("sensor", "core_radius", [](RunConfig& c) -> double& { return c.collection.deform.core_radius; }));
    b.push_back(real("sensor", "shear_gain", [](RunConfig& c) -> double& { return c.collection.deform.shear_gain; }));
    b.push_back(real("sensor", "shear_saturation",
                     [](RunConfig& c) -> double& { return c.collection.deform.shear_saturation; }));
    b.push_back(integer<std::size_t>("sensor", "samples",
                                     [](RunConfig& c) -> std::size_t& { return c.collection.sample_count; }));
    b.push_back({"sensor", "sampling",
                 [](RunConfig& c, const std::string& v) { c.collection.sampling = parse_sampling(v); },
                 [](const RunConfig& c) { return to_string(c.collection.sampling); }});
    b.push_back(integer<std::size_t>("sensor", "grid_y", [](RunConfig& c) -> std::size_t& { return c.collection.grid_y; }));
    b.push_back(integer<std::size_t>("sensor", "grid_theta",
                                     [](RunConfig& c) -> std::size_t& { return c.collection.grid_theta; }));
    b.push_back(real("sensor", "y_min", [](RunConfig& c) -> double& { return c.collection.y_depth.lo; }));
    b.push_back(real("sensor", "y_max", [](RunConfig& c) -> double& { return c.collection.y_depth.hi; }));
    b.push_back(real("sensor", "theta_min", [](RunConfig& c) -> double& { return c.collection.theta_roll.lo; }));
    b.push_back(real("sensor", "theta_max", [](RunConfig& c) -> double& { return c.collection.theta_roll.hi; }));
    b.push_back(real("sensor", "shear_x_min", [](RunConfig& c) -> double& { return c.collection.shear_x.lo; }));
    b.push_back(real("sensor", "shear_x_max", [](RunConfig& c) -> double& { return c.collection.shear_x.hi; }));
    b.push_back(real("sensor", "shear_roll_min", [](RunConfig& c) -> double& { return c.collection.shear_roll.lo; }));
    b.push_back(real("sensor", "shear_roll_max", [](RunConfig& c) -> double& { return c.collection.shear_roll.hi; }));
    b.push_back(integer<std::uint64_t>("sensor", "seed", [](RunConfig& c) -> std::uint64_t& { return c.collection.seed; }));
    b.push_back(integer<std::uint64_t>("sensor", "split_seed",
                                       [](RunConfig& c) -> std::uint64_t& { return c.collection.split_seed; }));
    b.push_back(boolean("sensor", "allow_out_of_envelope",
                        [](RunConfig& c) -> bool& { return c.collection.allow_out_of_envelope; }));
    b.push_back(boolean("sensor", "image_path", [](RunConfig& c) -> bool& { return c.collection.use_image_path; }));
    b.push_back(integer<int>("sensor", "image_size", [](RunConfig& c) -> int& { return c.collection.image_size; }));
    b.push_back(real("sensor", "dot_radius", [](RunConfig& c) -> double& { return c.collection.dot_radius; }));
    // [graph]
    b.push_back({"graph", "kind",
                 [](RunConfig& c, const std::string& v) { c.collection.graph_kind = parse_graph_kind(v); },
                 [](const RunConfig& c) { return to_string(c.collection.graph_kind); }});
    b.push_back(integer<int>("graph", "k", [](RunConfig& c) -> int& { return c.collection.graph.k; }));
    b.push_back(real("graph", "l_scale", [](RunConfig& c) -> double& { return c.collection.graph.l_scale; }));
    // [train]
    b.push_back(integer<int>("train", "epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
    b.push_back(integer<int>("train", "batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
    b.push_back(real("train", "learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; }));
    b.push_back({"train", "optimizer",
                 [](RunConfig& c, const std::string& v) { c.train.optimizer = parse_optimizer(v); },
                 [](const RunConfig& c) { return to_string(c.train.optimizer); }});
    b.push_back(integer<std::uint64_t>("train", "seed", [](RunConfig& c) -> std::uint64_t& { return c.train.seed; }));
    b.push_back(real("train", "train_fraction", [](RunConfig& c) -> double& { return c.train.train_fraction; }));
    b.push_back({"train", "schedule",
                 [](RunConfig& c, const std::string& v) { c.train.schedule = parse_lr_schedule(v); },
                 [](const RunConfig& c) { return to_string(c.train.schedule); }});
    b.push_back({"train", "precision",
                 [](RunConfig& c, const std::string& v) { c.train.precision = parse_precision(v); },
                 [](const RunConfig& c) { return to_string(c.train.precision); }});
    b.push_back(integer<int>("train", "threads", [](RunConfig& c) -> int& { return c.train.threads; }));
    // [servo]
    b.push_back({"servo", "contour",
                 [](RunConfig& c, const std::string& v) { c.contour = parse_contour_kind(v); },
                 [](const RunConfig& c) { return to_string(c.contour); }});
    b.push_back(real("servo", "radius", [](RunConfig& c) -> double& { return c.contour_params.radius; }));
    b.push_back(real("servo", "side", [](RunConfig& c) -> double& { return c.contour_params.side; }));
    b.push_back(real("servo", "chamfer", [](RunConfig& c) -> double& { return c.contour_params.chamfer; }));
    b.push_back(real("servo", "texture_amplitude",
                     [](RunConfig& c) -> double& { return c.contour_params.texture_amplitude; }));
    b.push_back(real("servo", "texture_frequency",
                     [](RunConfig& c) -> double& { return c.contour_params.texture_frequency; }));
    b.push_back(real("servo", "compliance_gain", [](RunConfig& c) -> double& { return c.contour_params.compliance_gain; }));
    b.push_back(real("servo", "kp_r", [](RunConfig& c) -> double& { return c.servo.gains.kp_r; }));
    b.push_back(real("servo", "ki_r", [](RunConfig& c) -> double& { return c.servo.gains.ki_r; }));
    b.push_back(real("servo", "kp_t", [](RunConfig& c) -> double& { return c.servo.gains.kp_t; }));
    b.push_back(real("servo", "ki_t", [](RunConfig& c) -> double& { return c.servo.gains.ki_t; }));
    b.push_back(real("servo", "integral_clamp_r", [](RunConfig& c) -> double& { return c.servo.gains.integral_clamp_r; }));
    b.push_back(real("servo", "integral_clamp_t", [](RunConfig& c) -> double& { return c.servo.gains.integral_clamp_t; }));
    b.push_back(real("servo", "step_length", [](RunConfig& c) -> double& { return c.servo.gains.step_length; }));
    b.push_back(real("servo", "y_ref", [](RunConfig& c) -> double& { return c.servo.gains.y_ref; }));
    b.push_back(real("servo", "theta_ref", [](RunConfig& c) -> double& { return c.servo.gains.theta_ref; }));
    b.push_back(integer<int>("servo", "max_steps", [](RunConfig& c) -> int& { return c.servo.max_steps; }));
    b.push_back(real("servo", "dt", [](RunConfig& c) -> double& { return c.servo.dt; }));
    b.push_back(integer<std::uint64_t>("servo", "seed", [](RunConfig& c) -> std::uint64_t& { return c.servo.seed; }));
    b.push_back(real("servo", "divergence_depth", [](RunConfig& c) -> double& { return c.servo.divergence_depth; }));
    b.push_back(integer<int>("servo", "max_lost_steps", [](RunConfig& c) -> int& { return c.servo.max_lost_steps; }));
    b.push_back(real("servo", "start_arc", [](RunConfig& c) -> double& { return c.servo.start_arc; }));
    return b;
  }();
  return table;
}

/// The servo loop uses the sensor and graph settings of the dataset it was trained on.
void sync_servo(RunConfig& c) {
  c.servo.layout = c.collection.layout;
  c.servo.pitch = c.collection.pitch;
  c.servo.layout_options = c.collection.layout_options;
  c.servo.deform = c.collection.deform;
  c.servo.graph = c.collection.graph;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto comment = line.find_first_of("#;");
    const std::string t = trim(comment == std::string::npos ? line : line.substr(0, comment));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      if (section != "sensor" && section != "graph" && section != "train" && section != "servo") {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + t + "'");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto& table = bindings();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Binding& b) { return b.section == section && b.key == key; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    try {
      it->set(c, value);
    } catch (const Error& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  sync_servo(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string dump_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& b : bindings()) {
    if (b.section != section) {
      if (!section.empty()) out << '\n';
      section = b.section;
      out << '[' << section << "]\n";
    }
    out << b.key << " = " << b.get(config) << '\n';
  }
  return out.str();
}

}  // namespace tacgraph
