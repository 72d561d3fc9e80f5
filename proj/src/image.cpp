#include "tacgraph/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "tacgraph/error.hpp"

namespace tacgraph {

Vec2 mm_to_px(const Vec2& mm, int width, int height) {
  return {0.5 * width + mm.x * kPixelsPerMm, 0.5 * height - mm.y * kPixelsPerMm};
}

Vec2 px_to_mm(const Vec2& px, int width, int height) {
  return {(px.x - 0.5 * width) / kPixelsPerMm, (0.5 * height - px.y) / kPixelsPerMm};
}

GrayImage rasterize(const MarkerFrame& frame, int width, int height, double dot_radius) {
  if (width <= 0 || height <= 0) throw ArgumentError("rasterize: image size must be positive");
  if (!(dot_radius > 0.0)) throw ArgumentError("rasterize: dot_radius must be positive");
  GrayImage img(width, height);
  for (std::size_t i = 0; i < frame.positions.size(); ++i) {
    const Vec2 c = mm_to_px(frame.positions[i], width, height);
    // Pixel (x, y) covers [x, x+1) x [y, y+1); its centre is (x+0.5, y+0.5).
    if (c.x - dot_radius < 0.0 || c.y - dot_radius < 0.0 || c.x + dot_radius > width ||
        c.y + dot_radius > height) {
      throw ArgumentError("rasterize: marker " + std::to_string(i) + " does not fit in the image");
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x - dot_radius - 1.0)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(c.x + dot_radius + 1.0)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y - dot_radius - 1.0)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(c.y + dot_radius + 1.0)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double d = std::hypot(x + 0.5 - c.x, y + 0.5 - c.y);
        const double cover = std::clamp(dot_radius + 0.5 - d, 0.0, 1.0);
        const auto v = static_cast<std::uint8_t>(std::lround(255.0 * cover));
        img.at(x, y) = std::max(img.at(x, y), v);
      }
    }
  }
  return img;
}

std::vector<Vec2> blob_detect(const GrayImage& image) {
  const int w = image.width, h = image.height;
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Vec2> centroids;
  std::vector<int> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (label[idx] >= 0 || image.pixels[idx] < kBlobThreshold) continue;
      const int id = static_cast<int>(centroids.size());
      double sw = 0.0, sx = 0.0, sy = 0.0;
      label[idx] = id;
      stack.assign(1, static_cast<int>(idx));
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cx = cur % w, cy = cur / w;
        const double wt = image.pixels[cur];
        sw += wt;
        sx += wt * (cx + 0.5);
        sy += wt * (cy + 0.5);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
            if (label[n] >= 0 || image.pixels[n] < kBlobThreshold) continue;
            label[n] = id;
            stack.push_back(static_cast<int>(n));
          }
        }
      }
      centroids.push_back({sx / sw, sy / sw});
    }
  }
  return centroids;
}

std::vector<Vec2> blob_detect(const GrayImage& image, std::size_t expected_count) {
  auto found = blob_detect(image);
  if (found.size() != expected_count) throw DetectionError(expected_count, found.size());
  return found;
}

std::vector<std::size_t> match_to_reference(std::span<const Vec2> reference,
                                            std::span<const Vec2> detections) {
  if (reference.size() != detections.size()) {
    throw DetectionError(reference.size(), detections.size());
  }
  struct Pair {
    double d2;
    std::size_t ref, det;
  };
  std::vector<Pair> pairs;
  pairs.reserve(reference.size() * detections.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    for (std::size_t j = 0; j < detections.size(); ++j) {
      pairs.push_back({squared_norm(reference[i] - detections[j]), i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.ref != b.ref) return a.ref < b.ref;
    return a.det < b.det;
  });
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> match(reference.size(), kUnset);
  std::vector<bool> used(detections.size(), false);
  std::size_t assigned = 0;
  for (const auto& p : pairs) {
    if (match[p.ref] != kUnset || used[p.det]) continue;
    match[p.ref] = p.det;
    used[p.det] = true;
    if (++assigned == reference.size()) break;
  }
  return match;
}

MarkerFrame frame_via_image(const MarkerFrame& frame, const SensorLayout& layout, int width,
                            int height, double dot_radius) {
  const GrayImage img = rasterize(frame, width, height, dot_radius);
  const auto px = blob_detect(img, layout.size());
  std::vector<Vec2> mm;
  mm.reserve(px.size());
  for (const auto& p : px) mm.push_back(px_to_mm(p, width, height));
  const auto match = match_to_reference(layout.markers, mm);
  MarkerFrame out;
  out.source_pose = frame.source_pose;
  out.positions.reserve(mm.size());
  for (std::size_t i = 0; i < layout.size(); ++i) out.positions.push_back(mm[match[i]]);
  return out;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error("failed writing " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  auto token = [&in, &path]() {
    std::string t;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> t)) throw ParseError(path.string() + ": truncated PGM header");
    return t;
  };
  if (token() != "P5") throw ParseError(path.string() + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::logic_error&) {
    throw ParseError(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw ParseError(path.string() + ": unsupported PGM geometry or depth");
  }
  in.get();
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw ParseError(path.string() + ": truncated PGM pixel data");
  }
  return img;
}

}  // namespace tacgraph
