#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "adgen/types.hpp"

namespace adgen {

struct MovieClip {
  std::string clip_id;
  std::string movie_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::filesystem::path frame_dir;
  double fps = 25.0;
};

struct Subtitle {
  int index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
  bool operator==(const Subtitle&) const = default;
};

struct CastMember {
  std::string cast_id;
  std::string actor_name;
  std::string character_name;
  std::filesystem::path profile_image;
};

struct DetectionRecord {
  int frame_idx = 0;
  BoundingBox person_box;
  double confidence = 0.0;
  std::optional<BoundingBox> face_box;
  std::optional<std::vector<float>> face_embedding;
};

struct GroundTruthAD {
  std::string clip_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
  int word_count = 0;
};

using DetectionsByClip = std::map<std::string, std::vector<DetectionRecord>>;

// Number of whitespace-separated tokens.
int count_words(std::string_view text);

// Frames named by zero-padded index ("000.png", "0001.ppm", ...), returned in
// ascending index order. Non-image files are ignored.
std::vector<FrameBuffer> load_frames(const std::filesystem::path& frame_dir);
std::vector<std::filesystem::path> list_frame_files(
    const std::filesystem::path& frame_dir);

std::vector<Subtitle> parse_srt(std::string_view text);
std::vector<Subtitle> load_srt(const std::filesystem::path& path);
// Inverse of parse_srt for well-formed subtitles.
std::string format_srt(const std::vector<Subtitle>& subtitles);

std::vector<CastMember> load_cast(const std::filesystem::path& path);
std::vector<GroundTruthAD> load_ground_truth(const std::filesystem::path& path);

// Clip manifest: JSON-lines {clip_id, movie_id, start_s, end_s, fps,
// frame_dir?}. frame_dir defaults to frames_root/clip_id.
std::vector<MovieClip> load_clips(const std::filesystem::path& path,
                                  const std::filesystem::path& frames_root);

// When known_clips is given, records naming any other clip_id are rejected.
DetectionsByClip load_detections(
    const std::filesystem::path& path,
    const std::set<std::string>* known_clips = nullptr);
DetectionsByClip parse_detections(
    std::string_view jsonl, const std::set<std::string>* known_clips = nullptr);

// Clamps boxes to [0,width]x[0,height]; records whose person box collapses
// are dropped, collapsed face boxes are cleared.
std::vector<DetectionRecord> clamp_detections(std::vector<DetectionRecord> records,
                                              int width, int height);

}  // namespace adgen
