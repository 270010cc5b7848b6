#include "adgen/annotate.hpp"

#include <algorithm>
#include <cmath>

#include "adgen/error.hpp"
#include "font5x7.hpp"

namespace adgen {
namespace {

// One printable char per code point; non-ASCII code points become '?'.
std::string glyph_chars(std::string_view text) {
  std::string out;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80) {
      out.push_back(c);
    } else if ((u & 0xC0) != 0x80) {
      out.push_back('?');
    }
  }
  return out;
}

void fill_rect(FrameBuffer& frame, int x0, int y0, int x1, int y1, Rgb color) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, frame.width);
  y1 = std::min(y1, frame.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) frame.set(x, y, color);
  }
}

bool draws_boxes(OverlayMode m) {
  return m == OverlayMode::bbox_only || m == OverlayMode::bbox_and_name;
}
bool draws_names(OverlayMode m) {
  return m == OverlayMode::name_only || m == OverlayMode::bbox_and_name;
}

}  // namespace

OverlayMode parse_overlay_mode(std::string_view text) {
  if (text == "none") return OverlayMode::none;
  if (text == "bbox_only" || text == "bbox") return OverlayMode::bbox_only;
  if (text == "name_only" || text == "name") return OverlayMode::name_only;
  if (text == "bbox_and_name" || text == "both") return OverlayMode::bbox_and_name;
  throw PreconditionError("unknown overlay mode '" + std::string(text) + "'");
}

std::string_view to_string(OverlayMode mode) {
  switch (mode) {
    case OverlayMode::none: return "none";
    case OverlayMode::bbox_only: return "bbox_only";
    case OverlayMode::name_only: return "name_only";
    case OverlayMode::bbox_and_name: return "bbox_and_name";
  }
  return "none";
}

std::vector<int> sample_frames(int num_frames, int n) {
  if (num_frames < 1) throw PreconditionError("sample_frames: clip has no frames");
  if (n < 1) throw PreconditionError("sample_frames: n must be >= 1");
  std::vector<int> out;
  if (num_frames <= n) {
    for (int i = 0; i < num_frames; ++i) out.push_back(i);
    return out;
  }
  if (n == 1) return {0};
  const long long last = num_frames - 1;
  for (int k = 0; k < n; ++k) {
    const int idx = static_cast<int>(k * last / (n - 1));
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

void draw_box(FrameBuffer& frame, const BoundingBox& box, const OverlayStyle& style) {
  const int t = style.box_thickness;
  if (t <= 0) return;
  const int left = std::clamp(static_cast<int>(std::lround(box.x1)), 0, frame.width - 1);
  const int top = std::clamp(static_cast<int>(std::lround(box.y1)), 0, frame.height - 1);
  const int right = std::clamp(static_cast<int>(std::lround(box.x2)) - 1, 0, frame.width - 1);
  const int bottom = std::clamp(static_cast<int>(std::lround(box.y2)) - 1, 0, frame.height - 1);
  if (right < left || bottom < top) return;
  fill_rect(frame, left, top, right + 1, std::min(top + t, bottom + 1), style.box_color);
  fill_rect(frame, left, std::max(bottom + 1 - t, top), right + 1, bottom + 1, style.box_color);
  fill_rect(frame, left, top, std::min(left + t, right + 1), bottom + 1, style.box_color);
  fill_rect(frame, std::max(right + 1 - t, left), top, right + 1, bottom + 1, style.box_color);
}

PixelRect label_rect(int frame_width, int frame_height, int anchor_x, int anchor_y,
                     std::string_view text, int scale) {
  const int s = std::max(scale, 1);
  PixelRect r;
  r.w = static_cast<int>(glyph_chars(text).size()) * kGlyphAdvance * s;
  r.h = kLabelRows * s;
  r.x = std::max(0, std::min(anchor_x, frame_width - r.w));
  r.y = anchor_y - r.h;
  if (r.y < 0) r.y = anchor_y;
  r.y = std::max(0, std::min(r.y, frame_height - r.h));
  return r;
}

void draw_label_at(FrameBuffer& frame, const PixelRect& rect, std::string_view text,
                   const OverlayStyle& style) {
  const int s = std::max(style.label_scale, 1);
  fill_rect(frame, rect.x, rect.y, rect.x + rect.w, rect.y + rect.h, style.box_color);
  const Rgb white{255, 255, 255};
  const auto chars = glyph_chars(text);
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto& g = font::glyph(chars[i]);
    const int gx = rect.x + static_cast<int>(i) * kGlyphAdvance * s;
    const int gy = rect.y + s;
    for (int col = 0; col < kGlyphWidth; ++col) {
      for (int row = 0; row < kGlyphHeight; ++row) {
        if ((g[col] >> row) & 1) {
          const int px = gx + col * s;
          const int py = gy + row * s;
          // Keep glyphs inside the background rectangle.
          fill_rect(frame, px, py, std::min(px + s, rect.x + rect.w),
                    std::min(py + s, rect.y + rect.h), white);
        }
      }
    }
  }
}

PixelRect draw_label(FrameBuffer& frame, int anchor_x, int anchor_y, std::string_view text,
                     const OverlayStyle& style) {
  if (text.empty()) throw PreconditionError("draw_label: empty text");
  const auto rect =
      label_rect(frame.width, frame.height, anchor_x, anchor_y, text, style.label_scale);
  draw_label_at(frame, rect, text, style);
  return rect;
}

std::vector<SampledFrame> render_overlays(std::vector<SampledFrame> frames,
                                          std::span<const Tracklet> tracklets,
                                          const OverlayStyle& style) {
  if (style.mode == OverlayMode::none) return frames;

  std::vector<const Tracklet*> named;
  for (const auto& t : tracklets) {
    if (t.name && !t.name->empty()) named.push_back(&t);
  }
  std::sort(named.begin(), named.end(), [](const Tracklet* a, const Tracklet* b) {
    return a->tracklet_id < b->tracklet_id;
  });

  for (auto& sf : frames) {
    std::vector<std::pair<const Tracklet*, BoundingBox>> present;
    for (const auto* t : named) {
      if (auto it = t->boxes.find(sf.frame_idx); it != t->boxes.end()) {
        present.emplace_back(t, it->second);
      }
    }
    if (draws_boxes(style.mode)) {
      for (const auto& [t, box] : present) draw_box(sf.image, box, style);
    }
    if (!draws_names(style.mode)) continue;
    std::vector<PixelRect> placed;
    for (const auto& [t, box] : present) {
      auto rect = label_rect(sf.image.width, sf.image.height,
                             static_cast<int>(std::lround(box.x1)),
                             static_cast<int>(std::lround(box.y1)), *t->name, style.label_scale);
      // Stack below any label already occupying the spot.
      for (bool moved = true; moved;) {
        moved = false;
        for (const auto& p : placed) {
          if (rect.intersects(p) && p.y + p.h + rect.h <= sf.image.height) {
            rect.y = p.y + p.h;
            moved = true;
          }
        }
      }
      draw_label_at(sf.image, rect, *t->name, style);
      placed.push_back(rect);
    }
  }
  return frames;
}

}  // namespace adgen
