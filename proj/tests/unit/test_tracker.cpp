#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "adgen/error.hpp"
#include "adgen/tracker.hpp"

using namespace adgen;

namespace {

DetectionRecord det(int frame, BoundingBox box, double conf = 0.9) {
  return {frame, box, conf, std::nullopt, std::nullopt};
}

// Best total IoU over every partial one-to-one matching that respects the gate.
double brute_force_total(const std::vector<TrackState>& tracks, const std::vector<BoundingBox>& dets,
                         double iou_min) {
  std::vector<bool> used(dets.size(), false);
  std::function<double(std::size_t)> best = [&](std::size_t t) -> double {
    if (t == tracks.size()) return 0.0;
    double result = best(t + 1);  // track t left unmatched
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (used[d]) continue;
      const double o = iou(tracks[t].box, dets[d]);
      if (!(o > 0.0 && o >= iou_min)) continue;
      used[d] = true;
      result = std::max(result, o + best(t + 1));
      used[d] = false;
    }
    return result;
  };
  return best(0);
}

BoundingBox random_box(std::mt19937& rng) {
  std::uniform_real_distribution<double> pos(0.0, 40.0), size(5.0, 20.0);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + size(rng), y + size(rng)};
}

}  // namespace

TEST_CASE("iou of hand-checked box pairs") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, {10, 0, 20, 10}) == 0.0);
  CHECK(iou(a, {5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0).epsilon(1e-12));
  CHECK(iou(a, {1, 0, 11, 10}) == doctest::Approx(90.0 / 110.0).epsilon(1e-12));
}

TEST_CASE("associate_frame matches overlapping pairs only") {
  const std::vector<TrackState> one{{0, {0, 0, 10, 10}, 3}};
  auto a = associate_frame(one, std::vector<BoundingBox>{{1, 0, 11, 10}});
  REQUIRE(a.matches.size() == 1);
  CHECK(a.total_iou == doctest::Approx(90.0 / 110.0));

  a = associate_frame(one, std::vector<BoundingBox>{{50, 50, 60, 60}});
  CHECK(a.matches.empty());
  CHECK(a.unmatched_tracks == std::vector<std::size_t>{0});
  CHECK(a.unmatched_detections == std::vector<std::size_t>{0});

  // Below the gate even though it overlaps.
  a = associate_frame(one, std::vector<BoundingBox>{{8, 0, 18, 10}});
  CHECK(a.matches.empty());
}

TEST_CASE("associate_frame picks the pairing with the larger summed IoU") {
  // Two tracks that swapped positions partially: both pairings overlap.
  const std::vector<TrackState> tracks{{0, {0, 0, 10, 10}, 5}, {1, {6, 0, 16, 10}, 5}};
  const std::vector<BoundingBox> dets{{5, 0, 15, 10}, {1, 0, 11, 10}};
  const auto a = associate_frame(tracks, dets, 0.1);
  const double straight = iou(tracks[0].box, dets[0]) + iou(tracks[1].box, dets[1]);
  const double crossed = iou(tracks[0].box, dets[1]) + iou(tracks[1].box, dets[0]);
  CHECK(a.total_iou == doctest::Approx(std::max(straight, crossed)).epsilon(1e-12));
  REQUIRE(a.matches.size() == 2);
  CHECK(a.matches[0] == std::pair<std::size_t, std::size_t>{0, 1});
}

TEST_CASE("associate_frame ties prefer the older track, then the lower id") {
  const BoundingBox box{0, 0, 10, 10};
  std::vector<TrackState> tracks{{4, box, 2}, {9, box, 7}};
  auto a = associate_frame(tracks, std::vector<BoundingBox>{box});
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].first == 1);

  tracks = {{9, box, 3}, {4, box, 3}};
  a = associate_frame(tracks, std::vector<BoundingBox>{box});
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].first == 1);
}

TEST_CASE("associate_frame total IoU equals the brute-force maximum") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 400; ++trial) {
    const auto nt = 1 + rng() % 5, nd = rng() % 6;
    std::vector<TrackState> tracks;
    for (std::size_t i = 0; i < nt; ++i) {
      tracks.push_back({static_cast<int>(i), random_box(rng), static_cast<int>(rng() % 4)});
    }
    std::vector<BoundingBox> dets;
    for (std::size_t i = 0; i < nd; ++i) dets.push_back(random_box(rng));
    const double gate = (rng() % 2) ? 0.3 : 0.05;
    const auto a = associate_frame(tracks, dets, gate);
    CHECK(a.total_iou == doctest::Approx(brute_force_total(tracks, dets, gate)).epsilon(1e-9));
    CHECK(a.matches.size() + a.unmatched_tracks.size() == nt);
    CHECK(a.matches.size() + a.unmatched_detections.size() == nd);
  }
}

TEST_CASE("build_tracklets on simple scenes") {
  int next = 0;
  CHECK(build_tracklets(std::vector<DetectionRecord>{}, Shot{0, 10}, next).empty());

  std::vector<DetectionRecord> two;
  for (int f = 0; f < 10; ++f) {
    two.push_back(det(f, {2.0 * f, 0, 2.0 * f + 10, 10}));
    two.push_back(det(f, {2.0 * f, 50, 2.0 * f + 10, 60}));
  }
  auto t = build_tracklets(two, Shot{0, 10}, next);
  REQUIRE(t.size() == 2);
  CHECK(t[0].length() == 10);
  CHECK(t[1].length() == 10);
  CHECK(t[0].boxes.at(9).y1 == 0.0);
  CHECK(t[1].boxes.at(9).y1 == 50.0);
  CHECK(next == 2);

  std::vector<DetectionRecord> gap;
  for (int f : {0, 1, 2, 3, 4, 7, 8, 9}) gap.push_back(det(f, {0, 0, 10, 10}));
  CHECK(build_tracklets(gap, Shot{0, 10}, next).size() == 2);

  std::vector<DetectionRecord> coast;
  for (int f : {0, 1, 2, 3, 4, 6, 7, 8, 9}) coast.push_back(det(f, {2.0 * f, 0, 2.0 * f + 10, 10}, f == 4 ? 0.8 : 0.6));
  t = build_tracklets(coast, Shot{0, 10}, next);
  REQUIRE(t.size() == 1);
  CHECK(t[0].length() == 10);
  CHECK(t[0].boxes.at(5).x1 == doctest::Approx(10.0));
  CHECK(t[0].confidences.at(5) == doctest::Approx(0.7));

  CHECK_THROWS_AS(build_tracklets(std::vector<DetectionRecord>{det(12, {0, 0, 1, 1})}, Shot{0, 10}, next),
                  PreconditionError);
}

TEST_CASE("filter_tracklets applies length and confidence rules") {
  auto make = [](int length, double conf) {
    Tracklet t;
    for (int f = 0; f < length; ++f) {
      t.boxes[f] = {0, 0, 1, 1};
      t.confidences[f] = conf;
    }
    return t;
  };
  CHECK(filter_tracklets({make(4, 0.9)}).empty());
  CHECK(filter_tracklets({make(10, 0.4)}).empty());
  CHECK(filter_tracklets({make(10, 0.9)}).size() == 1);
}

TEST_CASE("non-crossing trajectories are recovered without identity switches") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int people = 1 + static_cast<int>(rng() % 5);
    const int frames = 10 + static_cast<int>(rng() % 30);
    std::uniform_real_distribution<double> v(-2.0, 2.0);
    std::vector<std::pair<double, double>> start_vel;
    for (int p = 0; p < people; ++p) start_vel.emplace_back(20.0 + 10.0 * (rng() % 5), v(rng));
    std::vector<DetectionRecord> dets;
    for (int f = 0; f < frames; ++f) {
      for (int p = 0; p < people; ++p) {
        const double x = start_vel[p].first + start_vel[p].second * f;
        // Each person keeps to a lane 40px tall, so paths never cross.
        dets.push_back(det(f, {x, 40.0 * p, x + 20, 40.0 * p + 30}));
      }
    }
    std::shuffle(dets.begin(), dets.end(), rng);
    const auto tracks = track_clip(dets, std::vector<Shot>{{0, frames}});
    REQUIRE(tracks.size() == static_cast<std::size_t>(people));
    for (const auto& t : tracks) {
      CHECK(t.length() == frames);
      const double lane = t.boxes.begin()->second.y1;
      for (const auto& [f, b] : t.boxes) CHECK(b.y1 == lane);
    }
  }
}

TEST_CASE("no detection is claimed by two tracklets") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<DetectionRecord> dets;
    for (int f = 0; f < 20; ++f) {
      for (int k = 0; k < 4; ++k) {
        if (rng() % 3) dets.push_back(det(f, random_box(rng)));
      }
    }
    int next = 0;
    const auto tracks = build_tracklets(dets, Shot{0, 20}, next, TrackerOptions{0.3, 0, 1, 0.0});
    std::set<std::pair<int, std::tuple<double, double, double, double>>> claimed;
    std::size_t total = 0;
    for (const auto& t : tracks) {
      for (const auto& [f, b] : t.boxes) {
        claimed.insert({f, {b.x1, b.y1, b.x2, b.y2}});
        ++total;
      }
    }
    CHECK(total == dets.size());
    CHECK(claimed.size() <= dets.size());
  }
}
