#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adgen/annotate.hpp"
#include "adgen/backend.hpp"
#include "adgen/faceid.hpp"
#include "adgen/generation.hpp"
#include "adgen/shotseg.hpp"
#include "adgen/tracker.hpp"

namespace adgen {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  MockBackendOptions mock;
  HttpBackendOptions http;
};

struct RunConfig {
  std::filesystem::path frames_root;
  std::filesystem::path clips;         // clip manifest (JSON-lines)
  std::filesystem::path detections;    // detection interchange (JSON-lines)
  std::filesystem::path gallery;       // cast profile embeddings (JSON-lines)
  std::filesystem::path subtitles;     // SRT, optional
  std::filesystem::path cast;          // cast list JSON
  std::filesystem::path ground_truth;  // JSON-lines, optional
  std::filesystem::path boundaries_dir;  // <clip_id>.json shot cuts, optional
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;       // optional
  std::filesystem::path template_path;   // optional prompt template
  std::filesystem::path dump_annotated;  // optional PNG dump dir
  std::string movie_title;

  OverlayStyle overlay;
  int num_frames = 10;
  int context_T = 100;
  bool context_ad = false;
  int context_ad_limit = -1;  // -1: same as context_T

  ExemplarOptions exemplars;
  bool movie_level_mining = true;
  bool frame_level_only = false;
  double tau = 0.6;

  ShotDetectorOptions shots;
  TrackerOptions tracker;

  LengthPolicy policy = LengthPolicy::fixed(10);
  bool ad_style = true;
  GenerationMode mode = GenerationMode::one_stage;

  BackendConfig backend;
  int concurrency = 4;
  RetryPolicy retry;
};

enum class ConfigUse { generate, identify, annotate, eval };

// Reads a TOML-style file of [section] tables with key = value lines.
RunConfig load_run_config(const std::filesystem::path& path);
// Applies `key = value` settings (keys as "section.key") on top of `config`.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Throws ConfigError listing every problem found.
void validate(const RunConfig& config, ConfigUse use);

nlohmann::json to_json(const RunConfig& config);

}  // namespace adgen
