#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "adgen/types.hpp"

namespace adgen {

struct Shot {
  int start_frame = 0;  // inclusive
  int end_frame = 0;    // exclusive
  int length() const { return end_frame - start_frame; }
  bool contains(int frame) const { return frame >= start_frame && frame < end_frame; }
  bool operator==(const Shot&) const = default;
};

inline constexpr int kHistogramBins = 512;
using Histogram = std::array<double, kHistogramBins>;

struct ShotDetectorOptions {
  int min_shot_len = 8;
  double k_sigma = 3.0;
  double absolute_floor = 0.3;
};

// 8x8x8 joint RGB histogram, bin width 32 per channel, L1-normalized.
Histogram frame_histogram(const FrameBuffer& frame);
inline constexpr int histogram_bin(int r, int g, int b) {
  return (r >> 5) * 64 + (g >> 5) * 8 + (b >> 5);
}

double hist_distance(std::span<const double> a, std::span<const double> b);

std::vector<Shot> detect_shots(std::span<const FrameBuffer> frames,
                               const ShotDetectorOptions& options = {});
// Same decision rule applied to precomputed consecutive distances;
// distances[i-1] is the distance between frame i-1 and frame i.
std::vector<Shot> shots_from_distances(std::span<const double> distances,
                                       const ShotDetectorOptions& options = {});

// Builds shots from cut positions; each boundary b starts a new shot at b.
std::vector<Shot> shots_from_boundaries(std::vector<int> boundaries, int num_frames);
std::vector<int> load_boundary_file(const std::filesystem::path& path);

}  // namespace adgen
