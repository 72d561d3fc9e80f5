#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tacgraph/sensor_sim.hpp"

namespace tacgraph {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Fixed imaging scale.
inline constexpr double kPixelsPerMm = 10.0;

/// Sensor-frame mm to pixel coordinates (image centre is the sensor origin, +y up).
Vec2 mm_to_px(const Vec2& mm, int width, int height);
Vec2 px_to_mm(const Vec2& px, int width, int height);

/// Renders each marker as an anti-aliased bright disc on black.
/// Throws ArgumentError if a disc does not fit inside the image.
GrayImage rasterize(const MarkerFrame& frame, int width, int height, double dot_radius);

/// Intensity threshold separating marker pixels from background.
inline constexpr std::uint8_t kBlobThreshold = 64;

/// Centroids (px) of 8-connected components above the threshold, intensity weighted,
/// ordered by their first pixel in raster order.
std::vector<Vec2> blob_detect(const GrayImage& image);

/// blob_detect plus a count check; throws DetectionError on mismatch.
std::vector<Vec2> blob_detect(const GrayImage& image, std::size_t expected_count);

/// Greedy nearest-pair assignment of detections to reference points (closest pairs first).
/// Returns, for each reference index, the matched detection index.
std::vector<std::size_t> match_to_reference(std::span<const Vec2> reference,
                                            std::span<const Vec2> detections);

/// Full image path: rasterize, detect, convert to mm and reorder to the layout.
MarkerFrame frame_via_image(const MarkerFrame& frame, const SensorLayout& layout, int width,
                            int height, double dot_radius);

void write_pgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace tacgraph
