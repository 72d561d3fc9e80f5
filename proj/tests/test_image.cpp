#include <doctest.h>

#include <algorithm>

#include "tacgraph/error.hpp"
#include "tacgraph/image.hpp"
#include "tacgraph/sensor_sim.hpp"
#include "test_util.hpp"

using namespace tacgraph;

namespace {

double worst_roundtrip_px(const MarkerFrame& frame, int size, double dot) {
  const GrayImage img = rasterize(frame, size, size, dot);
  const auto found = blob_detect(img, frame.size());
  std::vector<Vec2> truth;
  for (const auto& p : frame.positions) truth.push_back(mm_to_px(p, size, size));
  const auto match = match_to_reference(truth, found);
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) worst = std::max(worst, distance(truth[i], found[match[i]]));
  return worst;
}

}  // namespace

TEST_CASE("empty frame has no blobs") {
  const GrayImage img = rasterize(MarkerFrame{}, 64, 64, 3.0);
  CHECK(blob_detect(img).empty());
}

TEST_CASE("single marker lands on the image centre") {
  MarkerFrame f;
  f.positions = {{0.0, 0.0}};
  const auto found = blob_detect(rasterize(f, 640, 640, 3.0));
  REQUIRE(found.size() == 1);
  CHECK(distance(found[0], {320.0, 320.0}) <= 0.5);
  CHECK(distance(px_to_mm(found[0], 640, 640), {0.0, 0.0}) <= 0.05);
}

TEST_CASE("hexagonal frame round trip") {
  const SensorLayout l = build_layout(LayoutKind::Hexagonal127, 1.0);
  const MarkerFrame f = rest_frame(l);
  CHECK(worst_roundtrip_px(f, 640, 3.0) <= 0.5);
  const MarkerFrame back = frame_via_image(f, l, 640, 640, 3.0);
  REQUIRE(back.size() == 127);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(distance(back.positions[i], f.positions[i]) <= 0.05);
}

TEST_CASE("round trip holds across training poses") {
  const SensorLayout l = build_layout(LayoutKind::Round331, 1.0);
  const DeformationParams p;
  for (double y : {3.0, 5.0, 7.0}) {
    for (double t : {-30.0, 0.0, 30.0}) {
      for (double sx : {-5.0, 5.0}) {
        const MarkerFrame f = deform(l, {y, t, sx, sx}, p, 7);
        CHECK(worst_roundtrip_px(f, 640, 3.0) <= 0.5);
      }
    }
  }
}

TEST_CASE("overlapping dots report the count mismatch") {
  MarkerFrame f;
  f.positions = {{0.0, 0.0}, {0.3, 0.0}, {3.0, 3.0}};
  const GrayImage img = rasterize(f, 200, 200, 3.0);
  try {
    blob_detect(img, 3);
    FAIL("expected DetectionError");
  } catch (const DetectionError& e) {
    CHECK(e.expected() == 3);
    CHECK(e.found() == 2);
  }
}

TEST_CASE("markers outside the image are rejected") {
  MarkerFrame f;
  f.positions = {{40.0, 0.0}};
  CHECK_THROWS_AS(rasterize(f, 640, 640, 3.0), ArgumentError);
}

TEST_CASE("PGM round trip") {
  const auto dir = test::scratch_dir("pgm");
  const MarkerFrame f = rest_frame(build_layout(LayoutKind::Hexagonal127, 1.0));
  const GrayImage img = rasterize(f, 320, 240, 2.5);
  write_pgm(img, dir / "a.pgm");
  const GrayImage back = read_pgm(dir / "a.pgm");
  CHECK(back.width == 320);
  CHECK(back.height == 240);
  CHECK(back.pixels == img.pixels);
}
