#include <doctest.h>

#include <string>

#include "tacgraph/config.hpp"
#include "tacgraph/error.hpp"

using namespace tacgraph;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "run.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parses sections, comments and values") {
  const RunConfig c = parse_config(R"(
# a comment
[sensor]
layout = hexagonal127
push_gain = 0.1   ; trailing comment
samples = 300
allow_out_of_envelope = yes

[graph]
kind = delaunay
k = 4

[train]
epochs = 3
optimizer = sgd
precision = f64

[servo]
contour = square
y_ref = 4.5
)");
  CHECK(c.collection.layout == LayoutKind::Hexagonal127);
  CHECK(c.collection.deform.push_gain == 0.1);
  CHECK(c.collection.sample_count == 300);
  CHECK(c.collection.allow_out_of_envelope);
  CHECK(c.collection.graph_kind == GraphKind::Delaunay);
  CHECK(c.collection.graph.k == 4);
  CHECK(c.train.epochs == 3);
  CHECK(c.train.optimizer == OptimizerKind::Sgd);
  CHECK(c.train.precision == Precision::Float64);
  CHECK(c.contour == ContourKind::Square);
  CHECK(c.servo.gains.y_ref == 4.5);
}

TEST_CASE("errors carry the source line") {
  CHECK(message_of("[sensor]\n\nno_such_key = 1\n").find("run.ini:3") != std::string::npos);
  CHECK(message_of("[sensor]\nno_such_key = 1\n").find("no_such_key") != std::string::npos);
  CHECK(message_of("[extras]\n").find("run.ini:1") != std::string::npos);
  CHECK(message_of("[train]\nepochs = many\n").find("run.ini:2") != std::string::npos);
  CHECK(message_of("[train]\nepochs = 3.5\n").find("epochs") != std::string::npos);
  CHECK(message_of("layout = round331\n").find("run.ini:1") != std::string::npos);
  CHECK(message_of("[sensor]\nlayout round331\n").find("run.ini:2") != std::string::npos);
  CHECK(message_of("[graph]\nkind = mesh\n").find("run.ini:2") != std::string::npos);
  CHECK(message_of("[sensor\n").find("run.ini:1") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("dump and parse round trip") {
  RunConfig c;
  c.collection.layout = LayoutKind::Hexagonal127;
  c.collection.layout_options.rings = 4;
  c.collection.deform.noise_std = 0.0123456789012345;
  c.collection.seed = 18446744073709551615ULL;
  c.collection.sampling = Sampling::Grid;
  c.train.learning_rate = 1.0 / 3.0;
  c.train.schedule = LrSchedule::Constant;
  c.contour = ContourKind::BeveledPrism;
  c.servo.gains.kp_t = 0.123;
  const std::string text = dump_config(c);
  const RunConfig back = parse_config(text);
  CHECK(dump_config(back) == text);
  CHECK(back.collection.layout_options.rings == 4);
  CHECK(back.collection.deform.noise_std == c.collection.deform.noise_std);
  CHECK(back.collection.seed == c.collection.seed);
  CHECK(back.train.learning_rate == c.train.learning_rate);
  CHECK(back.train.schedule == LrSchedule::Constant);
  CHECK(back.contour == ContourKind::BeveledPrism);
  CHECK(dump_config(parse_config("")) == dump_config(RunConfig{}));
}

TEST_CASE("servo mirrors the sensor settings") {
  const RunConfig c = parse_config("[sensor]\nlayout = hexagonal127\npush_gain = 0.09\n[graph]\nl_scale = 1.5\n");
  CHECK(c.servo.layout == LayoutKind::Hexagonal127);
  CHECK(c.servo.deform.push_gain == 0.09);
  CHECK(c.servo.graph.l_scale == 1.5);
}
