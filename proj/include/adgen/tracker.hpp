#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adgen/ingest.hpp"
#include "adgen/shotseg.hpp"
#include "adgen/types.hpp"

namespace adgen {

struct Tracklet {
  int tracklet_id = 0;
  Shot shot;
  std::map<int, BoundingBox> boxes;
  std::map<int, double> confidences;
  // Subset of the frames in `boxes`.
  std::map<int, std::vector<float>> face_embeddings;
  std::optional<std::string> cast_id;
  std::optional<std::string> name;

  int first_frame() const { return boxes.begin()->first; }
  int last_frame() const { return boxes.rbegin()->first; }
  int length() const { return static_cast<int>(boxes.size()); }
  double mean_confidence() const;
};

struct TrackerOptions {
  double iou_min = 0.3;
  // Frames a track may go unmatched and still be extended.
  int max_coast = 1;
  int min_len = 5;
  double min_conf = 0.5;
};

double iou(const BoundingBox& a, const BoundingBox& b);

// Live track as seen by the per-frame association step.
struct TrackState {
  int tracklet_id = 0;
  BoundingBox box;
  int age = 0;  // frames since the track started
};

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track, detection)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
  double total_iou = 0.0;
};

// Optimal one-to-one matching maximizing summed IoU over pairs with
// IoU >= iou_min. Equal totals prefer matching older tracks, then lower ids.
Association associate_frame(std::span<const TrackState> tracks,
                            std::span<const BoundingBox> detections,
                            double iou_min = 0.3);

// detections must all fall inside `shot`; ids are allocated from next_id.
std::vector<Tracklet> build_tracklets(std::span<const DetectionRecord> detections,
                                      const Shot& shot, int& next_id,
                                      const TrackerOptions& options = {});

std::vector<Tracklet> filter_tracklets(std::vector<Tracklet> tracklets,
                                       int min_len = 5, double min_conf = 0.5);

// Splits a clip's detections by shot, tracks each shot and filters.
std::vector<Tracklet> track_clip(std::span<const DetectionRecord> detections,
                                 std::span<const Shot> shots,
                                 const TrackerOptions& options = {});

}  // namespace adgen
