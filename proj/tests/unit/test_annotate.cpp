#include <doctest.h>

#include "adgen/annotate.hpp"
#include "adgen/error.hpp"

using namespace adgen;

namespace {

int changed_pixels(const FrameBuffer& a, const FrameBuffer& b) {
  int n = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!(a.at(x, y) == b.at(x, y))) ++n;
    }
  }
  return n;
}

Tracklet named(int id, const std::string& name, BoundingBox box, std::initializer_list<int> frames) {
  Tracklet t;
  t.tracklet_id = id;
  for (int f : frames) {
    t.boxes[f] = box;
    t.confidences[f] = 1.0;
  }
  t.name = name;
  return t;
}

}  // namespace

TEST_CASE("sample_frames picks endpoint-inclusive uniform indices") {
  CHECK(sample_frames(55, 10) == std::vector<int>{0, 6, 12, 18, 24, 30, 36, 42, 48, 54});
  CHECK(sample_frames(10, 10) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(sample_frames(3, 10) == std::vector<int>{0, 1, 2});
  CHECK(sample_frames(80, 10) == std::vector<int>{0, 8, 17, 26, 35, 43, 52, 61, 70, 79});
  CHECK(sample_frames(7, 1) == std::vector<int>{0});
  CHECK_THROWS_AS(sample_frames(0, 10), PreconditionError);
  for (int length = 1; length < 300; ++length) {
    const auto s = sample_frames(length, 10);
    CHECK(s.size() == static_cast<std::size_t>(std::min(length, 10)));
    CHECK(s.front() == 0);
    CHECK(s.back() == length - 1);
    CHECK(std::is_sorted(s.begin(), s.end()));
  }
}

TEST_CASE("draw_box changes exactly the outline") {
  const FrameBuffer blank(40, 30, Rgb{0, 0, 0});
  OverlayStyle style;
  style.box_thickness = 2;
  auto f = blank;
  draw_box(f, {10, 5, 20, 15}, style);
  // Outline of a 10x10 box, 2 px thick: 100 - 6*6.
  CHECK(changed_pixels(blank, f) == 64);
  CHECK(f.at(10, 5) == style.box_color);
  CHECK(f.at(15, 10) == Rgb{0, 0, 0});

  auto g = blank;
  draw_box(g, {-10, -10, 100, 100}, style);
  CHECK(g.at(0, 0) == style.box_color);
  CHECK(g.at(39, 29) == style.box_color);
  CHECK(g.at(20, 15) == Rgb{0, 0, 0});

  auto h = blank;
  style.box_thickness = 0;
  draw_box(h, {10, 5, 20, 15}, style);
  CHECK(h.pixels == blank.pixels);
}

TEST_CASE("label geometry") {
  const auto r = label_rect(160, 120, 0, 0, "AMY", 2);
  CHECK(r.w == 3 * (5 + 1) * 2);
  CHECK(r.h == 18);
  CHECK(r.x == 0);
  CHECK(r.y == 0);

  CHECK(label_rect(160, 120, 50, 60, "AMY", 2) == PixelRect{50, 42, 36, 18});
  // Near the right edge the label slides left.
  CHECK(label_rect(160, 120, 150, 60, "AMY", 2).x == 124);
  // Non-ASCII names count one glyph per code point.
  CHECK(label_rect(160, 120, 0, 60, "Zo\xC3\xAB", 1).w == 18);

  FrameBuffer f(60, 40);
  CHECK_THROWS_AS(draw_label(f, 0, 0, "", OverlayStyle{}), PreconditionError);
  const FrameBuffer before = f;
  const auto drawn = draw_label(f, 0, 0, "AMY", OverlayStyle{});
  int white = 0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const bool inside = x >= drawn.x && x < drawn.x + drawn.w && y >= drawn.y && y < drawn.y + drawn.h;
      if (!inside) CHECK(f.at(x, y) == before.at(x, y));
      if (f.at(x, y) == Rgb{255, 255, 255}) ++white;
    }
  }
  CHECK(white > 0);
}

TEST_CASE("render_overlays honours each mode") {
  std::vector<SampledFrame> frames{{3, FrameBuffer(80, 60, Rgb{10, 10, 10})}};
  const std::vector<Tracklet> tracks{named(0, "AMY", {20, 30, 40, 55}, {3})};
  OverlayStyle style;

  style.mode = OverlayMode::none;
  CHECK(render_overlays(frames, tracks, style)[0].image.pixels == frames[0].image.pixels);

  style.mode = OverlayMode::name_only;
  const auto named_only = render_overlays(frames, tracks, style)[0].image;
  const auto rect = label_rect(80, 60, 20, 30, "AMY", style.label_scale);
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 80; ++x) {
      const bool inside = x >= rect.x && x < rect.x + rect.w && y >= rect.y && y < rect.y + rect.h;
      if (!inside) CHECK(named_only.at(x, y) == Rgb{10, 10, 10});
    }
  }
  // The bottom edge of the box is below the label, and untouched.
  CHECK(named_only.at(30, 54) == Rgb{10, 10, 10});

  style.mode = OverlayMode::bbox_only;
  const auto boxed = render_overlays(frames, tracks, style)[0].image;
  CHECK(boxed.at(30, 54) == style.box_color);
  CHECK(boxed.at(30, 20) == Rgb{10, 10, 10});

  style.mode = OverlayMode::bbox_and_name;
  const auto both = render_overlays(frames, tracks, style)[0].image;
  CHECK(both.at(30, 54) == style.box_color);
  CHECK(both.at(rect.x, rect.y) == style.box_color);
  CHECK(render_overlays(frames, tracks, style)[0].image.pixels == both.pixels);
}

TEST_CASE("overlapping labels stack downward") {
  std::vector<SampledFrame> frames{{0, FrameBuffer(120, 90)}};
  const std::vector<Tracklet> tracks{named(0, "AMY", {20, 40, 50, 80}, {0}), named(1, "NICK", {30, 42, 60, 85}, {0})};
  OverlayStyle style;
  const auto out = render_overlays(frames, tracks, style)[0].image;
  const auto first = label_rect(120, 90, 20, 40, "AMY", 2);
  const auto second = label_rect(120, 90, 30, 42, "NICK", 2);
  REQUIRE(first.intersects(second));
  // The second label ends up directly under the first.
  const PixelRect moved{second.x, first.y + first.h, second.w, second.h};
  CHECK_FALSE(moved.intersects(first));
  CHECK(out.at(moved.x + moved.w - 1, moved.y + moved.h - 1) == style.box_color);
  CHECK(out.at(first.x, first.y) == style.box_color);
}

TEST_CASE("unnamed tracklets and other frames are left alone") {
  std::vector<SampledFrame> frames{{5, FrameBuffer(50, 50)}};
  Tracklet t = named(0, "AMY", {10, 20, 30, 40}, {4});
  Tracklet anon = named(1, "", {10, 20, 30, 40}, {5});
  anon.name.reset();
  OverlayStyle style;
  style.mode = OverlayMode::bbox_and_name;
  CHECK(render_overlays(frames, std::vector{t, anon}, style)[0].image.pixels == frames[0].image.pixels);
}

TEST_CASE("overlay modes parse from names") {
  CHECK(parse_overlay_mode("both") == OverlayMode::bbox_and_name);
  CHECK(parse_overlay_mode("name_only") == OverlayMode::name_only);
  CHECK(to_string(OverlayMode::bbox_only) == "bbox_only");
  CHECK_THROWS_AS(parse_overlay_mode("labels"), PreconditionError);
}
