#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adgen/config.hpp"
#include "adgen/faceid.hpp"
#include "adgen/generation.hpp"
#include "adgen/ingest.hpp"
#include "adgen/metrics.hpp"

namespace adgen {

enum class ClipStatus { done, failed, cached };
std::string_view to_string(ClipStatus status);

struct ManifestEntry {
  std::string clip_id;
  ClipStatus status = ClipStatus::done;
  std::string prompt_hash;
  std::string error;
  int backend_calls = 0;
  double seconds = 0.0;
};

struct RunManifest {
  nlohmann::json config;
  std::vector<ManifestEntry> entries;
  int passes = 1;
  double total_seconds = 0.0;

  int count(ClipStatus status) const;
  bool all_succeeded() const { return count(ClipStatus::failed) == 0; }
};

struct RunResult {
  RunManifest manifest;
  std::vector<ADOutput> outputs;  // clip-manifest order, failed clips absent
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

// Runs every clip through tracking, identification, annotation, context and
// generation; writes ad_outputs.jsonl and manifest.json into output_dir.
// When `backend` is null one is built from config.backend.
RunResult run_pipeline(const RunConfig& config, Backend* backend = nullptr);

EvalReport run_eval(const RunConfig& config, const std::filesystem::path& outputs_path);

struct ClipIdentities {
  std::string clip_id;
  std::set<std::string> cast_ids;
  std::vector<IdentityAssignment> assignments;  // empty in frame-level mode
  std::vector<FaceMatch> face_matches;          // frame-level mode only
};

struct IdentifyResult {
  std::vector<ClipIdentities> clips;
  std::optional<PrecisionRecall> against_ground_truth;
};

// Character recognition only; writes identities.jsonl into output_dir.
IdentifyResult run_identify(const RunConfig& config);

// Writes annotated prompt frames as <dir>/<clip_id>/<frame>.png.
int run_annotate_dump(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace adgen
