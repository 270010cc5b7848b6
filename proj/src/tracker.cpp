#include "adgen/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "adgen/error.hpp"

namespace adgen {
namespace {

// Lexicographic weight (IoU, track age, -tracklet_id). IoU is fixed-point so
// equal totals compare exactly.
struct Weight {
  std::int64_t iou = 0;
  std::int64_t age = 0;
  std::int64_t neg_id = 0;

  Weight operator+(const Weight& o) const { return {iou + o.iou, age + o.age, neg_id + o.neg_id}; }
  Weight operator-(const Weight& o) const { return {iou - o.iou, age - o.age, neg_id - o.neg_id}; }
  Weight operator-() const { return {-iou, -age, -neg_id}; }
  Weight& operator+=(const Weight& o) { return *this = *this + o; }
  Weight& operator-=(const Weight& o) { return *this = *this - o; }
  auto operator<=>(const Weight&) const = default;
};

constexpr double kIouScale = 1e12;

// Minimum-cost perfect assignment on a square matrix (Kuhn-Munkres with
// potentials). Returns row -> column.
std::vector<int> solve_assignment(const std::vector<std::vector<Weight>>& cost) {
  const int n = static_cast<int>(cost.size());
  const Weight inf{std::numeric_limits<std::int64_t>::max() / 4, 0, 0};
  std::vector<Weight> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Weight> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      Weight delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Weight cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

BoundingBox lerp(const BoundingBox& a, const BoundingBox& b, double t) {
  return {a.x1 + (b.x1 - a.x1) * t, a.y1 + (b.y1 - a.y1) * t, a.x2 + (b.x2 - a.x2) * t,
          a.y2 + (b.y2 - a.y2) * t};
}

}  // namespace

double Tracklet::mean_confidence() const {
  if (confidences.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [f, c] : confidences) sum += c;
  return sum / static_cast<double>(confidences.size());
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Association associate_frame(std::span<const TrackState> tracks,
                            std::span<const BoundingBox> detections, double iou_min) {
  Association out;
  const std::size_t nt = tracks.size();
  const std::size_t nd = detections.size();
  if (nt == 0 || nd == 0) {
    for (std::size_t t = 0; t < nt; ++t) out.unmatched_tracks.push_back(t);
    for (std::size_t d = 0; d < nd; ++d) out.unmatched_detections.push_back(d);
    return out;
  }

  const std::size_t n = std::max(nt, nd);
  std::vector<std::vector<double>> overlap(nt, std::vector<double>(nd, 0.0));
  std::vector<std::vector<Weight>> cost(n, std::vector<Weight>(n));
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t d = 0; d < nd; ++d) {
      const double o = iou(tracks[t].box, detections[d]);
      overlap[t][d] = o;
      if (o > 0.0 && o >= iou_min) {
        cost[t][d] = -Weight{std::llround(o * kIouScale), tracks[t].age, -tracks[t].tracklet_id};
      }
    }
  }

  const auto row_to_col = solve_assignment(cost);
  std::vector<bool> det_used(nd, false);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto d = static_cast<std::size_t>(row_to_col[t]);
    if (d < nd && overlap[t][d] > 0.0 && overlap[t][d] >= iou_min) {
      out.matches.emplace_back(t, d);
      out.total_iou += overlap[t][d];
      det_used[d] = true;
    } else {
      out.unmatched_tracks.push_back(t);
    }
  }
  for (std::size_t d = 0; d < nd; ++d) {
    if (!det_used[d]) out.unmatched_detections.push_back(d);
  }
  return out;
}

std::vector<Tracklet> build_tracklets(std::span<const DetectionRecord> detections,
                                      const Shot& shot, int& next_id,
                                      const TrackerOptions& options) {
  std::map<int, std::vector<const DetectionRecord*>> by_frame;
  for (const auto& d : detections) {
    if (!shot.contains(d.frame_idx)) {
      throw PreconditionError("build_tracklets: detection at frame " +
                              std::to_string(d.frame_idx) + " outside shot");
    }
    by_frame[d.frame_idx].push_back(&d);
  }
  if (by_frame.empty()) return {};

  std::vector<Tracklet> active;
  std::vector<Tracklet> finished;

  auto extend = [](Tracklet& t, const DetectionRecord& d) {
    const int last = t.boxes.empty() ? d.frame_idx : t.last_frame();
    if (d.frame_idx - last > 1) {
      // Fill coasted frames so the tracklet stays frame-contiguous.
      const BoundingBox& from = t.boxes.at(last);
      const double conf = 0.5 * (t.confidences.at(last) + d.confidence);
      const double span = d.frame_idx - last;
      for (int f = last + 1; f < d.frame_idx; ++f) {
        t.boxes[f] = lerp(from, d.person_box, (f - last) / span);
        t.confidences[f] = conf;
      }
    }
    t.boxes[d.frame_idx] = d.person_box;
    t.confidences[d.frame_idx] = d.confidence;
    if (d.face_embedding) t.face_embeddings[d.frame_idx] = *d.face_embedding;
  };

  const int first = by_frame.begin()->first;
  for (int f = first; f < shot.end_frame; ++f) {
    const auto it = by_frame.find(f);
    if (it != by_frame.end()) {
      const auto& dets = it->second;
      std::vector<TrackState> states;
      states.reserve(active.size());
      for (const auto& t : active) {
        states.push_back({t.tracklet_id, t.boxes.rbegin()->second, f - t.first_frame()});
      }
      std::vector<BoundingBox> boxes;
      boxes.reserve(dets.size());
      for (const auto* d : dets) boxes.push_back(d->person_box);

      const auto assoc = associate_frame(states, boxes, options.iou_min);
      for (auto [t, d] : assoc.matches) extend(active[t], *dets[d]);
      for (auto d : assoc.unmatched_detections) {
        Tracklet t;
        t.tracklet_id = next_id++;
        t.shot = shot;
        extend(t, *dets[d]);
        active.push_back(std::move(t));
      }
    }
    // Unmatched for more than max_coast consecutive frames: terminate.
    auto dead = std::stable_partition(active.begin(), active.end(), [&](const Tracklet& t) {
      return f - t.last_frame() <= options.max_coast;
    });
    std::move(dead, active.end(), std::back_inserter(finished));
    active.erase(dead, active.end());
    if (active.empty() && by_frame.upper_bound(f) == by_frame.end()) break;
  }
  std::move(active.begin(), active.end(), std::back_inserter(finished));
  std::sort(finished.begin(), finished.end(),
            [](const Tracklet& a, const Tracklet& b) { return a.tracklet_id < b.tracklet_id; });
  return finished;
}

std::vector<Tracklet> filter_tracklets(std::vector<Tracklet> tracklets, int min_len,
                                       double min_conf) {
  std::erase_if(tracklets, [&](const Tracklet& t) {
    return t.length() < min_len || t.mean_confidence() < min_conf;
  });
  return tracklets;
}

std::vector<Tracklet> track_clip(std::span<const DetectionRecord> detections,
                                 std::span<const Shot> shots, const TrackerOptions& options) {
  std::vector<Tracklet> out;
  int next_id = 0;
  for (const auto& shot : shots) {
    std::vector<DetectionRecord> in_shot;
    for (const auto& d : detections) {
      if (shot.contains(d.frame_idx)) in_shot.push_back(d);
    }
    auto tracks = filter_tracklets(build_tracklets(in_shot, shot, next_id, options),
                                   options.min_len, options.min_conf);
    std::move(tracks.begin(), tracks.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace adgen
