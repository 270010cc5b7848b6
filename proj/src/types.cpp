#include "adgen/types.hpp"

#include "adgen/error.hpp"

namespace adgen {

FrameBuffer::FrameBuffer(int w, int h, Rgb fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw PreconditionError("frame dimensions must be positive");
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb FrameBuffer::at(int x, int y) const {
  const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void FrameBuffer::set(int x, int y, Rgb c) {
  const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

}  // namespace adgen
