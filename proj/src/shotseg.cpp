#include "adgen/shotseg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"

namespace adgen {

Histogram frame_histogram(const FrameBuffer& frame) {
  if (!frame.valid()) throw PreconditionError("frame_histogram: invalid frame");
  std::array<std::uint64_t, kHistogramBins> counts{};
  const auto& px = frame.pixels;
  for (std::size_t i = 0; i < px.size(); i += 3) {
    ++counts[static_cast<std::size_t>(histogram_bin(px[i], px[i + 1], px[i + 2]))];
  }
  const double total = static_cast<double>(px.size() / 3);
  Histogram h{};
  for (int b = 0; b < kHistogramBins; ++b) h[b] = static_cast<double>(counts[b]) / total;
  return h;
}

double hist_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("hist_distance: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

std::vector<Shot> shots_from_distances(std::span<const double> distances,
                                       const ShotDetectorOptions& options) {
  const int num_frames = static_cast<int>(distances.size()) + 1;
  if (distances.empty()) return {{0, num_frames}};

  const double n = static_cast<double>(distances.size());
  const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
  double var = 0.0;
  for (double d : distances) var += (d - mean) * (d - mean);
  const double threshold = mean + options.k_sigma * std::sqrt(var / n);

  // Cut at frame i means distances[i - 1] spiked.
  std::vector<int> cuts;
  for (std::size_t j = 0; j < distances.size(); ++j) {
    const double d = distances[j];
    if (!(d > threshold && d > options.absolute_floor)) continue;
    const int frame = static_cast<int>(j) + 1;
    if (!cuts.empty() && frame - cuts.back() < options.min_shot_len) {
      if (d > distances[static_cast<std::size_t>(cuts.back() - 1)]) cuts.back() = frame;
      continue;
    }
    cuts.push_back(frame);
  }
  return shots_from_boundaries(std::move(cuts), num_frames);
}

std::vector<Shot> detect_shots(std::span<const FrameBuffer> frames,
                               const ShotDetectorOptions& options) {
  if (frames.empty()) throw PreconditionError("detect_shots: no frames");
  std::vector<double> distances;
  distances.reserve(frames.size() - 1);
  Histogram prev = frame_histogram(frames[0]);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    Histogram cur = frame_histogram(frames[i]);
    distances.push_back(hist_distance(prev, cur));
    prev = cur;
  }
  return shots_from_distances(distances, options);
}

std::vector<Shot> shots_from_boundaries(std::vector<int> boundaries, int num_frames) {
  if (num_frames < 1) throw PreconditionError("shots_from_boundaries: empty clip");
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());
  std::vector<Shot> shots;
  int start = 0;
  for (int b : boundaries) {
    if (b < 0 || b >= num_frames) {
      throw InputError("shot boundary " + std::to_string(b) + " outside clip of " +
                       std::to_string(num_frames) + " frames");
    }
    if (b == 0) continue;
    shots.push_back({start, b});
    start = b;
  }
  shots.push_back({start, num_frames});
  return shots;
}

std::vector<int> load_boundary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (!doc.is_array()) throw InputError(path.string() + ": expected a list of frame indices");
  std::vector<int> out;
  for (const auto& v : doc) {
    if (!v.is_number_integer()) throw InputError(path.string() + ": boundaries must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace adgen
