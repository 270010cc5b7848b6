#pragma once

#include <cstdint>
#include <vector>

namespace adgen {

inline constexpr std::size_t kEmbeddingDim = 512;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

// Axis-aligned box in pixel coordinates, origin top-left.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x2 > x1 && y2 > y1; }
  bool operator==(const BoundingBox&) const = default;
};

// Row-major 8-bit RGB image.
struct FrameBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  FrameBuffer() = default;
  FrameBuffer(int w, int h, Rgb fill = {});

  bool valid() const {
    return width > 0 && height > 0 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  bool operator==(const FrameBuffer&) const = default;
};

}  // namespace adgen
