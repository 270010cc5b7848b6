#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adgen/tracker.hpp"
#include "adgen/types.hpp"

namespace adgen {

enum class OverlayMode { none, bbox_only, name_only, bbox_and_name };

OverlayMode parse_overlay_mode(std::string_view text);
std::string_view to_string(OverlayMode mode);

struct OverlayStyle {
  OverlayMode mode = OverlayMode::name_only;
  Rgb box_color{0, 255, 0};
  int box_thickness = 3;
  int label_scale = 2;
};

// Integer pixel rectangle, half-open.
struct PixelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  bool intersects(const PixelRect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  bool operator==(const PixelRect&) const = default;
};

// Built-in 5x7 font: each glyph occupies a (5+1) x (7+2) cell times scale.
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphAdvance = kGlyphWidth + 1;
inline constexpr int kLabelRows = kGlyphHeight + 2;

// Endpoint-inclusive uniform sampling, duplicates removed.
std::vector<int> sample_frames(int num_frames, int n = 10);

void draw_box(FrameBuffer& frame, const BoundingBox& box, const OverlayStyle& style);

// Background rectangle a label would occupy when anchored at `anchor`
// (top-left of the character box): above the anchor, or just inside it when
// that would cross the top edge; clamped horizontally into the frame.
PixelRect label_rect(int frame_width, int frame_height, int anchor_x, int anchor_y,
                     std::string_view text, int scale);
void draw_label_at(FrameBuffer& frame, const PixelRect& rect, std::string_view text,
                   const OverlayStyle& style);
// Returns the rectangle that was filled. Throws PreconditionError on empty text.
PixelRect draw_label(FrameBuffer& frame, int anchor_x, int anchor_y,
                     std::string_view text, const OverlayStyle& style);

struct SampledFrame {
  int frame_idx = 0;
  FrameBuffer image;
};

// Draws every named tracklet that covers each frame, in tracklet_id order.
// Labels that would overlap an earlier label are pushed below it.
std::vector<SampledFrame> render_overlays(std::vector<SampledFrame> frames,
                                          std::span<const Tracklet> tracklets,
                                          const OverlayStyle& style);

}  // namespace adgen
